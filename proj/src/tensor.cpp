// Copyright 2026 The vesselcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "vesselcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace vesselcast
{

std::string shape_to_string(const Shape & shape)
{
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << (i ? "x" : "") << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_volume(const Shape & shape)
{
  return std::accumulate(
    shape.begin(), shape.end(), std::size_t{1}, std::multiplies<std::size_t>());
}

Tensor::Tensor(Shape shape, double fill)
: shape_(std::move(shape)), data_(shape_volume(shape_), fill)
{
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
  if (data_.size() != shape_volume(shape_)) {
    throw ShapeError(
      "tensor data of length " + std::to_string(data_.size()) + " does not fit shape " +
      shape_to_string(shape_));
  }
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor & a, const Tensor & b, const std::string & what)
{
  if (a.shape() != b.shape()) {
    throw ShapeError(
      what + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
      shape_to_string(b.shape()));
  }
}

Tensor concat_time(const Tensor & first, const Tensor & second)
{
  if (first.rank() != 3 || second.rank() != 3 || first.dim(0) != second.dim(0) ||
      first.dim(1) != second.dim(1)) {
    throw ShapeError(
      "concat_time: incompatible shapes " + shape_to_string(first.shape()) + " and " +
      shape_to_string(second.shape()));
  }
  const std::size_t rows = first.dim(0) * first.dim(1);
  const std::size_t t1 = first.dim(2);
  const std::size_t t2 = second.dim(2);
  Tensor out({first.dim(0), first.dim(1), t1 + t2});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(first.data() + r * t1, t1, out.data() + r * (t1 + t2));
    std::copy_n(second.data() + r * t2, t2, out.data() + r * (t1 + t2) + t1);
  }
  return out;
}

Tensor axpby(const Tensor & a, double a_scale, const Tensor & b, double b_scale)
{
  require_same_shape(a, b, "axpby");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] * a_scale + b[i] * b_scale;
  }
  return out;
}

double squared_norm(const Tensor & t)
{
  double s = 0.0;
  for (double v : t.values()) {
    s += v * v;
  }
  return s;
}

double max_abs_diff(const Tensor & a, const Tensor & b)
{
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace vesselcast
