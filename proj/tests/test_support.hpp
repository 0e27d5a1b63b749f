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
#ifndef TESTS__TEST_SUPPORT_HPP_
#define TESTS__TEST_SUPPORT_HPP_

#include "vesselcast/rng.hpp"
#include "vesselcast/tensor.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace vesselcast::test
{

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  TempDir()
  {
    const auto * info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "vesselcast";
    if (info != nullptr) {
      name += std::string("-") + info->test_suite_name() + "-" + info->name();
    }
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  std::filesystem::path operator/(const std::string & leaf) const { return path_ / leaf; }
  const std::filesystem::path & path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Tensor random_tensor(const Shape & shape, Rng & rng, double scale = 1.0)
{
  Tensor t = rng.normal_tensor(shape);
  for (double & v : t.storage()) {
    v *= scale;
  }
  return t;
}

/// max |a - b| / max(1, max |b|)
inline double relative_error(const Tensor & a, const Tensor & b)
{
  double ref = 1.0;
  for (const double v : b.storage()) {
    ref = std::max(ref, std::abs(v));
  }
  return max_abs_diff(a, b) / ref;
}

}  // namespace vesselcast::test

#endif  // TESTS__TEST_SUPPORT_HPP_
