#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmlp/training.hpp"

namespace asmlp::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` settings. Lines are UTF-8, `#` starts a comment, blank
/// lines are ignored, a repeated key keeps the last value.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source = "<config>");
  static KeyValues load(const std::filesystem::path& path);

  /// Adds or overrides one entry; `assignment` is "key=value".
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

 private:
  std::map<std::string, std::string> values_;
};

/// Keys understood by train configs, in documentation order.
const std::vector<std::string>& train_keys();

/// Starts from the defaults (toy model) and applies every key. Unknown keys
/// and malformed values raise ConfigError naming the key.
TrainConfig make_train_config(const KeyValues& kv);

std::size_t parse_size(const std::string& key, const std::string& text);
double parse_real(const std::string& key, const std::string& text);
bool parse_bool(const std::string& key, const std::string& text);
/// Comma-separated sizes, e.g. "1,1,2,1".
std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& text);
/// "1x96x56x56" style shapes.
Shape parse_shape(const std::string& text);

}  // namespace asmlp::cli
