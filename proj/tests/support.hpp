#pragma once

#include <filesystem>
#include <string>

#include "ctcsum/emission.hpp"
#include "oracles.hpp"

namespace test_support {

inline ctcsum::EmissionMatrix to_emissions(const oracle::Probs& y) {
  ctcsum::Matrix m(y.size(), y.empty() ? 0 : y[0].size());
  for (std::size_t t = 0; t < y.size(); ++t)
    for (std::size_t n = 0; n < y[t].size(); ++n) m(t, n) = y[t][n];
  return ctcsum::EmissionMatrix(std::move(m));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ctcsum_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support
