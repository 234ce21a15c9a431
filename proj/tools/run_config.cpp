#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

namespace asmlp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse(in, path.string());
}

void KeyValues::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KeyValues::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty key in '" + key + "=" + value + "'");
  values_[key] = value;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_size(key, trim(text.substr(start, comma - start))));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Shape parse_shape(const std::string& text) {
  Shape dims;
  std::size_t start = 0;
  while (true) {
    const auto x = text.find('x', start);
    const std::string part = text.substr(start, x - start);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || v == 0) {
      throw ConfigError("invalid shape '" + text + "' (expected positive sizes like 1x96x56x56)");
    }
    dims.push_back(v);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (dims.size() != 4) throw ConfigError("invalid shape '" + text + "': need 4 sizes b x C x h x w");
  return dims;
}

const std::vector<std::string>& train_keys() {
  static const std::vector<std::string> keys{
      "variant",   "channels",      "depths",     "mlp_ratio",    "shift",      "dilation",
      "padding",   "connection",    "drop_path",  "baseline",     "epochs",     "warmup_epochs",
      "lr",        "min_lr",        "weight_decay", "beta1",      "beta2",      "adam_eps",
      "batch_size", "smoothing",    "hflip",      "seed",         "precision",  "classes",
      "samples",   "image_size",    "data_seed",  "noise",        "checkpoint", "metrics",
      "log_wallclock"};
  return keys;
}

TrainConfig make_train_config(const KeyValues& kv) {
  const auto& known = train_keys();
  for (const auto& [key, value] : kv.values()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  TrainConfig cfg;
  const auto& v = kv.values();
  if (auto it = v.find("variant"); it != v.end() && it->second != "toy") {
    try {
      cfg.model = make_variant(it->second);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("variant: ") + e.what());
    }
    cfg.model.input_size = cfg.data.image_size;
  }

  for (const auto& [key, value] : v) {
    try {
      if (key == "variant") {
      } else if (key == "channels") {
        cfg.model.channels = parse_size(key, value);
      } else if (key == "depths") {
        const auto d = parse_size_list(key, value);
        if (d.size() != kStages) throw ConfigError("depths: expected 4 comma-separated values");
        std::copy(d.begin(), d.end(), cfg.model.depths.begin());
      } else if (key == "mlp_ratio") {
        cfg.model.mlp_ratio = parse_size(key, value);
      } else if (key == "shift") {
        const auto s = parse_size_list(key, value);
        if (s.size() == 1) {
          cfg.model.shift.shift_h = cfg.model.shift.shift_v = s[0];
        } else if (s.size() == 2) {
          cfg.model.shift.shift_h = s[0];
          cfg.model.shift.shift_v = s[1];
        } else {
          throw ConfigError("shift: expected 's' or 's_h,s_v'");
        }
      } else if (key == "dilation") {
        cfg.model.shift.dilation = parse_size(key, value);
      } else if (key == "padding") {
        cfg.model.shift.padding = parse_shift_padding(value);
      } else if (key == "connection") {
        cfg.model.connection = parse_connection(value);
      } else if (key == "drop_path") {
        cfg.model.drop_path_max = parse_real(key, value);
      } else if (key == "baseline") {
        if (value == "none") {
          cfg.model.baseline.reset();
        } else {
          cfg.model.baseline = parse_baseline_kind(value);
        }
      } else if (key == "epochs") {
        cfg.epochs = parse_size(key, value);
      } else if (key == "warmup_epochs") {
        cfg.warmup_epochs = parse_size(key, value);
      } else if (key == "lr") {
        cfg.lr = parse_real(key, value);
      } else if (key == "min_lr") {
        cfg.min_lr = parse_real(key, value);
      } else if (key == "weight_decay") {
        cfg.weight_decay = parse_real(key, value);
      } else if (key == "beta1") {
        cfg.adam.beta1 = parse_real(key, value);
      } else if (key == "beta2") {
        cfg.adam.beta2 = parse_real(key, value);
      } else if (key == "adam_eps") {
        cfg.adam.eps = parse_real(key, value);
      } else if (key == "batch_size") {
        cfg.batch_size = parse_size(key, value);
      } else if (key == "smoothing") {
        cfg.smoothing = parse_real(key, value);
      } else if (key == "hflip") {
        cfg.hflip = parse_bool(key, value);
      } else if (key == "seed") {
        cfg.seed = parse_size(key, value);
      } else if (key == "precision") {
        cfg.precision = parse_precision(value);
      } else if (key == "classes") {
        cfg.data.classes = parse_size(key, value);
        cfg.model.num_classes = cfg.data.classes;
      } else if (key == "samples") {
        cfg.data.samples = parse_size(key, value);
      } else if (key == "image_size") {
        cfg.data.image_size = parse_size(key, value);
        cfg.model.input_size = cfg.data.image_size;
      } else if (key == "data_seed") {
        cfg.data.seed = parse_size(key, value);
      } else if (key == "noise") {
        cfg.data.noise = parse_real(key, value);
      } else if (key == "checkpoint") {
        cfg.checkpoint_path = value;
      } else if (key == "metrics") {
        cfg.metrics_path = value;
      } else if (key == "log_wallclock") {
        cfg.log_wallclock = parse_bool(key, value);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  // The synthetic data decides the head size.
  if (v.find("classes") == v.end()) cfg.model.num_classes = cfg.data.classes;

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid train config: ") + e.what());
  }
  return cfg;
}

}  // namespace asmlp::cli
