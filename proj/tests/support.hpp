#pragma once

#include <filesystem>
#include <string>

#include "asmlp/checkpoint.hpp"
#include "asmlp/context.hpp"

namespace asmlp::test {

inline std::filesystem::path fixture_root() { return ASMLP_FIXTURE_DIR; }
inline std::filesystem::path source_root() { return ASMLP_SOURCE_DIR; }

inline Checkpoint fixture(const std::string& rel) { return load_checkpoint(fixture_root() / rel); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("asmlp_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline Tensor<double> rand_d(Shape dims, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng = make_rng(seed, 0x7465);
  return random_uniform<double>(std::move(dims), rng, lo, hi);
}

}  // namespace asmlp::test
