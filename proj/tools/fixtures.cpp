#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>

#include "asmlp/analysis.hpp"
#include "asmlp/checkpoint.hpp"
#include "asmlp/oracle.hpp"
#include "commands.hpp"

namespace asmlp::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kFdStep = 1e-5;

struct Meta {
  std::string provenance;
  std::string source;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

class Corpus {
 public:
  void add(const std::string& suite, const std::string& name, const Checkpoint& inputs,
           const Checkpoint& expected, const Meta& meta) {
    const std::string dir = suite + "/" + name + "/";
    files_.push_back({dir + "inputs", encode_checkpoint(inputs)});
    files_.push_back({dir + "expected", encode_checkpoint(expected)});
    std::ostringstream m;
    m << "case = " << suite << '/' << name << '\n'
      << "provenance = " << meta.provenance << '\n'
      << "source = " << meta.source << '\n'
      << "seed = " << meta.seed << '\n';
    for (const auto& [k, v] : meta.extra) m << k << " = " << v << '\n';
    m << "generator = asmlp fixtures --regenerate\n";
    const std::string text = m.str();
    files_.push_back({dir + "meta", {text.begin(), text.end()}});
  }

  std::vector<FixtureFile> take() { return std::move(files_); }

 private:
  std::vector<FixtureFile> files_;
};

Tensor<double> vec(std::initializer_list<double> v) {
  return Tensor<double>(Shape{v.size()}, std::vector<double>(v));
}

Tensor<double> offsets_tensor(const oracle::Offsets& offs) {
  Tensor<double> t({offs.size(), 2});
  std::size_t k = 0;
  for (const auto& [di, dj] : offs) {
    t[2 * k] = di;
    t[2 * k + 1] = dj;
    ++k;
  }
  return t;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.numel(); ++i) s += y[i] * r[i];
  return s;
}

/// Central-difference gradient of `loss` with respect to every entry of `wrt`.
Tensor<double> fd_gradient(const std::function<double()>& loss, Tensor<double>& wrt) {
  Tensor<double> g(wrt.dims());
  for (std::size_t i = 0; i < wrt.numel(); ++i) {
    g[i] = oracle::central_difference(loss, wrt[i], kFdStep);
  }
  return g;
}

void shift_cases(Corpus& corpus) {
  std::uint64_t seed = 0;
  for (std::size_t s : {1, 3, 5, 7, 9}) {
    for (std::size_t d : {1, 2}) {
      for (ShiftPadding pad : {ShiftPadding::zero, ShiftPadding::circular, ShiftPadding::reflect,
                               ShiftPadding::replicate}) {
        const ShiftConfig cfg{s, s, d, pad};
        Rng rng = make_rng(seed, 0x5348);
        Checkpoint in, out;
        in.put("x", random_uniform<double>({2, 16, 9, 12}, rng));
        in.put_scalar("shift", static_cast<double>(s));
        in.put_scalar("dilation", static_cast<double>(d));
        in.put_scalar("padding", static_cast<double>(pad));
        const auto& x = std::get<Tensor<double>>(in.tensors[0].value);
        out.put("height", oracle::shift(x, Axis::height, cfg));
        out.put("width", oracle::shift(x, Axis::width, cfg));
        Meta meta{s == 1 ? "trivial" : "derived",
                  s == 1 ? "identity shift (one group, offset 0)" : "index-map shift oracle", seed,
                  {{"config", describe(cfg)}}};
        corpus.add("shift-oracle",
                   "s" + std::to_string(s) + "-d" + std::to_string(d) + "-" +
                       std::string(to_string(pad)),
                   in, out, meta);
        ++seed;
      }
    }
  }
}

void complexity_cases(Corpus& corpus) {
  for (const char* name : {"tiny", "small", "base", "mobile"}) {
    const VariantConfig v = make_variant(name);
    Checkpoint in, out;
    in.put_scalar("channels", static_cast<double>(v.channels));
    in.put("depths", vec({double(v.depths[0]), double(v.depths[1]), double(v.depths[2]),
                          double(v.depths[3])}));
    in.put_scalar("mlp_ratio", static_cast<double>(v.mlp_ratio));
    in.put_scalar("patch_size", static_cast<double>(v.patch_size));
    in.put_scalar("num_classes", static_cast<double>(v.num_classes));
    in.put_scalar("input_size", 224.0);
    for (bool aux : {false, true}) {
      const auto bd = formula_costs(v, 224, 224, aux);
      const std::size_t n = bd.entries.size();
      Tensor<double> stage({n}), comp({n}), params({n}), macs({n});
      for (std::size_t k = 0; k < n; ++k) {
        stage[k] = static_cast<double>(bd.entries[k].stage);
        comp[k] = static_cast<double>(bd.entries[k].component);
        params[k] = static_cast<double>(bd.entries[k].params);
        macs[k] = static_cast<double>(bd.entries[k].macs);
      }
      const std::string p = aux ? "with_aux." : "weights.";
      out.put(p + "stage", stage);
      out.put(p + "component", comp);
      out.put(p + "params", params);
      out.put(p + "macs", macs);
    }
    corpus.add("complexity", name, in, out,
               {"derived", "closed-form parameter and MAC formulas", 0, {}});
  }

  // Unit law 4hwC^2 on integer arithmetic.
  Rng rng = make_rng(11, 0x554c);
  Tensor<double> triples({11, 3}), macs({11});
  for (std::size_t k = 0; k < 11; ++k) {
    std::uint64_t h = 56, w = 56, c = 96;
    if (k > 0) {
      h = 4 + rng() % 29;
      w = 4 + rng() % 29;
      c = 9 + rng() % 56;
    }
    triples[3 * k] = double(h);
    triples[3 * k + 1] = double(w);
    triples[3 * k + 2] = double(c);
    macs[k] = double(4 * h * w * c * c);
  }
  Checkpoint in, out;
  in.put("hwc", triples);
  out.put("unit_macs", macs);
  corpus.add("complexity", "unit-law", in, out, {"derived", "4hwC^2 arithmetic", 11, {}});

  Checkpoint cin, cout;
  cin.put("hwcm", vec({56, 56, 96, 7}));
  const auto cmp = complexity_compare(56, 56, 96, 7);
  cout.put("msa_wmsa_as", vec({double(cmp.msa), double(cmp.wmsa), double(cmp.as)}));
  corpus.add("complexity", "attention-vs-shift", cin, cout,
             {"derived", "4hwC^2 + 2(hw)^2C, 4hwC^2 + 2M^2hwC and 4hwC^2 arithmetic", 0, {}});
}

void reported_cases(Corpus& corpus) {
  Checkpoint in, out;
  in.put_scalar("input_size", 224.0);
  out.put("params_millions", vec({28, 50, 88}));
  out.put("flops_giga", vec({4.4, 8.5, 15.2}));
  corpus.add("reported", "tiny-small-base", in, out,
             {"reported", "published model sizes for the tiny, small and base variants at 224x224",
              0, {{"variants", "tiny,small,base"}, {"params_decimals", "0"}, {"flops_decimals", "1"}}});

  Checkpoint min, mout;
  min.put_scalar("input_size", 224.0);
  mout.put("params_millions", vec({9.6}));
  corpus.add("reported", "mobile", min, mout,
             {"reported", "published model size of the mobile variant", 0,
              {{"variants", "mobile"}, {"params_decimals", "1"}}});
}

void matmul_cases(Corpus& corpus) {
  const std::size_t shapes[][4] = {{1, 3, 4, 5}, {2, 8, 5, 6}, {2, 16, 3, 7}};
  const std::size_t outs[] = {4, 8, 5};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto* s = shapes[k];
    Rng rng = make_rng(k, 0x4d4d);
    Checkpoint in, out;
    const auto x = random_uniform<double>({s[0], s[1], s[2], s[3]}, rng);
    const auto w = random_uniform<double>({outs[k], s[1]}, rng);
    const auto b = random_uniform<double>({outs[k]}, rng);
    in.put("x", x);
    in.put("weight", w);
    in.put("bias", b);
    out.put("y", oracle::matmul_channels(x, w, b));
    corpus.add("matmul", "case" + std::to_string(k), in, out,
               {"derived", "loop channel projection", k, {}});
  }
}

void gradient_cases(Corpus& corpus) {
  {
    Rng rng = make_rng(0, 0x4744);
    Tensor<double> x = random_uniform<double>({2, 6, 3, 4}, rng);
    const auto gamma = random_uniform<double>({6}, rng, 0.5, 1.5);
    const auto beta = random_uniform<double>({6}, rng);
    const auto r = random_uniform<double>({2, 6, 3, 4}, rng);
    Checkpoint in, out;
    in.put("x", x);
    in.put("gamma", gamma);
    in.put("beta", beta);
    in.put("r", r);
    in.put_scalar("eps", 1e-5);
    out.put("grad.x", fd_gradient(
                          [&] { return weighted_sum(oracle::layer_norm(x, gamma, beta, 1e-5), r); },
                          x));
    corpus.add("gradients", "layer-norm", in, out,
               {"derived", "central differences of sum(r * layer_norm(x)), step 1e-5", 0, {}});
  }
  {
    Rng rng = make_rng(1, 0x4744);
    Tensor<double> x = random_uniform<double>({1, 4, 3, 3}, rng, -3.0, 3.0);
    const auto r = random_uniform<double>({1, 4, 3, 3}, rng);
    Checkpoint in, out;
    in.put("x", x);
    in.put("r", r);
    out.put("grad.x", fd_gradient([&] { return weighted_sum(oracle::gelu(x), r); }, x));
    corpus.add("gradients", "gelu", in, out,
               {"derived", "central differences of sum(r * gelu(x)), step 1e-5", 1, {}});
  }
  {
    Rng rng = make_rng(2, 0x4744);
    Tensor<double> x = random_uniform<double>({2, 4, 3, 3}, rng);
    Tensor<double> w = random_uniform<double>({5, 4}, rng);
    const auto r = random_uniform<double>({2, 5, 3, 3}, rng);
    Checkpoint in, out;
    in.put("x", x);
    in.put("weight", w);
    in.put("r", r);
    auto loss = [&] { return weighted_sum(oracle::matmul_channels(x, w), r); };
    out.put("grad.weight", fd_gradient(loss, w));
    out.put("grad.x", fd_gradient(loss, x));
    corpus.add("gradients", "channel-projection", in, out,
               {"derived", "central differences of sum(r * (w x)), step 1e-5", 2, {}});
  }
}

void rfield_cases(Corpus& corpus) {
  const std::size_t single[][2] = {{1, 1}, {3, 1}, {5, 1}, {7, 1}, {3, 2}, {5, 2}};
  for (const auto& sd : single) {
    const ShiftConfig cfg{sd[0], sd[0], sd[1], ShiftPadding::zero};
    Checkpoint in, out;
    in.put("shift", vec({double(sd[0]), double(sd[0])}));
    in.put_scalar("dilation", double(sd[1]));
    in.put_scalar("depth", 1.0);
    out.put("offsets", offsets_tensor(oracle::cross(cfg)));
    corpus.add("rfield", "s" + std::to_string(sd[0]) + "-d" + std::to_string(sd[1]), in, out,
               {sd[0] == 1 ? "trivial" : "derived",
                sd[0] == 1 ? "single cell" : "cross of offsets k*d, |k| <= floor(s/2)", 0, {}});
  }
  const std::size_t stacked[][3] = {{3, 1, 2}, {5, 1, 2}, {3, 2, 3}, {5, 1, 3}};
  for (const auto& sdk : stacked) {
    const ShiftConfig cfg{sdk[0], sdk[0], sdk[1], ShiftPadding::zero};
    oracle::Offsets field{{0, 0}};
    for (std::size_t k = 0; k < sdk[2]; ++k) field = oracle::minkowski_sum(field, oracle::cross(cfg));
    Checkpoint in, out;
    in.put("shift", vec({double(sdk[0]), double(sdk[0])}));
    in.put_scalar("dilation", double(sdk[1]));
    in.put_scalar("depth", double(sdk[2]));
    out.put("offsets", offsets_tensor(field));
    corpus.add("rfield",
               "s" + std::to_string(sdk[0]) + "-d" + std::to_string(sdk[1]) + "-depth" +
                   std::to_string(sdk[2]),
               in, out, {"derived", "Minkowski sum of single-unit crosses", 0, {}});
  }
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string describe_difference(const std::vector<std::uint8_t>& have,
                                const std::vector<std::uint8_t>& want) {
  try {
    const auto a = decode_checkpoint(have);
    const auto b = decode_checkpoint(want);
    for (const auto& t : b.tensors) {
      const AnyTensor* other = a.find(t.name);
      if (other == nullptr) return "tensor '" + t.name + "' missing";
      if (!(*other == t.value)) return "tensor '" + t.name + "' differs";
    }
    if (a.tensors.size() != b.tensors.size()) return "unexpected extra tensors";
  } catch (const CheckpointError&) {
  }
  const auto mismatch = std::mismatch(have.begin(), have.end(), want.begin(), want.end());
  return "bytes differ from offset " + std::to_string(mismatch.first - have.begin()) + " (" +
         std::to_string(have.size()) + " vs " + std::to_string(want.size()) + " bytes)";
}

}  // namespace

std::vector<FixtureFile> generate_fixtures() {
  Corpus corpus;
  shift_cases(corpus);
  complexity_cases(corpus);
  reported_cases(corpus);
  matmul_cases(corpus);
  gradient_cases(corpus);
  rfield_cases(corpus);
  return corpus.take();
}

std::vector<std::string> diff_fixtures(const fs::path& root, const std::vector<FixtureFile>& files) {
  std::vector<std::string> report;
  std::map<std::string, const FixtureFile*> wanted;
  for (const auto& f : files) wanted[f.path] = &f;
  for (const auto& [path, f] : wanted) {
    const fs::path p = root / path;
    if (!fs::exists(p)) {
      report.push_back(path + ": missing");
      continue;
    }
    const auto have = read_bytes(p);
    if (have != f->bytes) report.push_back(path + ": " + describe_difference(have, f->bytes));
  }
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), root).generic_string();
      if (!wanted.count(rel)) report.push_back(rel + ": not produced by the generator");
    }
  }
  return report;
}

void write_fixtures(const fs::path& root, const std::vector<FixtureFile>& files) {
  for (const auto& f : files) {
    const fs::path p = root / f.path;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(f.bytes.data()),
              static_cast<std::streamsize>(f.bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
  }
}

int cmd_fixtures(const FixtureOptions& opts, std::ostream& out, std::ostream& err) {
  const auto files = generate_fixtures();
  if (opts.regenerate) {
    try {
      write_fixtures(opts.dir, files);
    } catch (const std::exception& e) {
      err << "fixtures: " << e.what() << '\n';
      return kUsage;
    }
    out << "wrote " << files.size() << " files under " << opts.dir << '\n';
  }
  const auto diffs = diff_fixtures(opts.dir, files);
  for (const auto& d : diffs) out << "DIFF " << d << '\n';
  out << "fixtures: " << (files.size() / 3) << " cases, " << diffs.size() << " differences\n";
  return diffs.empty() ? kOk : kFailure;
}

}  // namespace asmlp::cli
