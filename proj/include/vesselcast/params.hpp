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
#ifndef VESSELCAST__PARAMS_HPP_
#define VESSELCAST__PARAMS_HPP_

#include "vesselcast/tensor.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace vesselcast
{

/// Ordered collection of named parameter arrays. Gradients use a ParamSet
/// with the same layout.
class ParamSet
{
public:
  std::size_t add(const std::string & name, Shape shape);

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;

  Tensor & operator[](std::size_t slot) { return tensors_[slot]; }
  const Tensor & operator[](std::size_t slot) const { return tensors_[slot]; }
  const std::string & name(std::size_t slot) const { return names_[slot]; }

  /// Slot of \p name; throws std::out_of_range when absent.
  std::size_t slot(const std::string & name) const;
  bool contains(const std::string & name) const { return index_.count(name) != 0; }

  ParamSet zeros_like() const;
  void set_zero();
  /// this += scale * other (layouts must match).
  void add_scaled(const ParamSet & other, double scale);
  bool same_layout(const ParamSet & other) const;
  bool all_finite() const;

  bool operator==(const ParamSet & other) const
  {
    return names_ == other.names_ && tensors_ == other.tensors_;
  }

private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace vesselcast

#endif  // VESSELCAST__PARAMS_HPP_
