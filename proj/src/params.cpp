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
#include "vesselcast/params.hpp"

#include <stdexcept>

namespace vesselcast
{

std::size_t ParamSet::add(const std::string & name, Shape shape)
{
  if (index_.count(name) != 0) {
    throw std::logic_error("duplicate parameter name: " + name);
  }
  const std::size_t slot = tensors_.size();
  names_.push_back(name);
  tensors_.emplace_back(std::move(shape));
  index_[name] = slot;
  return slot;
}

std::size_t ParamSet::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & t : tensors_) {
    n += t.size();
  }
  return n;
}

std::size_t ParamSet::slot(const std::string & name) const
{
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter: " + name);
  }
  return it->second;
}

ParamSet ParamSet::zeros_like() const
{
  ParamSet out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    out.add(names_[i], tensors_[i].shape());
  }
  return out;
}

void ParamSet::set_zero()
{
  for (auto & t : tensors_) {
    t.fill(0.0);
  }
}

void ParamSet::add_scaled(const ParamSet & other, double scale)
{
  if (!same_layout(other)) {
    throw std::invalid_argument("parameter layouts differ");
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    double * dst = tensors_[i].data();
    const double * src = other.tensors_[i].data();
    for (std::size_t j = 0; j < tensors_[i].size(); ++j) {
      dst[j] += scale * src[j];
    }
  }
}

bool ParamSet::same_layout(const ParamSet & other) const
{
  if (names_ != other.names_) {
    return false;
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].shape() != other.tensors_[i].shape()) {
      return false;
    }
  }
  return true;
}

bool ParamSet::all_finite() const
{
  for (const auto & t : tensors_) {
    if (!t.all_finite()) {
      return false;
    }
  }
  return true;
}

}  // namespace vesselcast
