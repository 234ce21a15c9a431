#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Fixture corpus: fixtures/<suite>/<case>/{inputs,expected,meta}. inputs and
// expected use the checkpoint format, meta is `key = value` text with the
// provenance (derived, trivial or reported), source and seed.

namespace asmlp::cli {

struct FixtureFile {
  std::string path;  // relative to the fixture root
  std::vector<std::uint8_t> bytes;
};

/// Every fixture file, built from the loop oracles and fixed seeds only.
std::vector<FixtureFile> generate_fixtures();

/// One line per missing, differing or unexpected file under `root`.
std::vector<std::string> diff_fixtures(const std::filesystem::path& root,
                                       const std::vector<FixtureFile>& files);

void write_fixtures(const std::filesystem::path& root, const std::vector<FixtureFile>& files);

}  // namespace asmlp::cli
