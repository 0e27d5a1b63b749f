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
#ifndef VESSELCAST__TENSOR_HPP_
#define VESSELCAST__TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselcast
{

class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape & shape);

/// Dense row-major array of doubles. Feature tensors use the layout
/// [channel][vessel][time]; adjacency stacks use [time][vessel][vessel].
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape & shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double * data() { return data_.data(); }
  const double * data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double> & storage() { return data_; }
  const std::vector<double> & storage() const { return data_; }

  double & operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double & at(std::size_t i, std::size_t j, std::size_t k)
  {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const
  {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double & at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  void fill(double value);
  bool all_finite() const;

  bool operator==(const Tensor & other) const = default;

private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_volume(const Shape & shape);

/// Throws ShapeError naming \p what when the shapes differ.
void require_same_shape(const Tensor & a, const Tensor & b, const std::string & what);

/// Concatenates two rank-3 tensors along the last (time) axis.
Tensor concat_time(const Tensor & first, const Tensor & second);

/// Returns a * a_scale + b * b_scale elementwise.
Tensor axpby(const Tensor & a, double a_scale, const Tensor & b, double b_scale);

double squared_norm(const Tensor & t);
double max_abs_diff(const Tensor & a, const Tensor & b);

}  // namespace vesselcast

#endif  // VESSELCAST__TENSOR_HPP_
