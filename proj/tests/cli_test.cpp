#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "fixtures.hpp"
#include "run_config.hpp"
#include "support.hpp"

using namespace asmlp;
using namespace asmlp::cli;

namespace {

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(KeyValues, ParsesCommentsSpacesAndOverrides) {
  std::istringstream in("\xEF\xBB\xBF# toy\n  epochs = 5  # short\n\nlr=0.002\nepochs = 6\n");
  auto kv = KeyValues::parse(in, "t.cfg");
  EXPECT_EQ(kv.values().at("epochs"), "6");
  EXPECT_EQ(kv.values().at("lr"), "0.002");
  kv.set("lr=0.5");
  EXPECT_EQ(kv.values().at("lr"), "0.5");
}

TEST(KeyValues, MalformedLineNamesSourceAndLine) {
  std::istringstream in("epochs = 5\njust words\n");
  try {
    KeyValues::parse(in, "t.cfg");
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("t.cfg:2"), std::string::npos);
  }
  EXPECT_THROW(KeyValues().set("novalue"), ConfigError);
}

TEST(TrainConfigKeys, AppliesValues) {
  KeyValues kv;
  kv.set("shift", "1,1");
  kv.set("epochs", "7");
  kv.set("padding", "circular");
  kv.set("hflip", "false");
  kv.set("precision", "wide");
  const auto cfg = make_train_config(kv);
  EXPECT_EQ(cfg.model.shift.shift_h, 1u);
  EXPECT_EQ(cfg.model.shift.shift_v, 1u);
  EXPECT_EQ(cfg.model.shift.padding, ShiftPadding::circular);
  EXPECT_EQ(cfg.epochs, 7u);
  EXPECT_FALSE(cfg.hflip);
  EXPECT_EQ(cfg.precision, Precision::wide);
  EXPECT_EQ(cfg.model.num_classes, 4u);
}

TEST(TrainConfigKeys, UnknownKeysAndBadValuesAreErrors) {
  KeyValues unknown;
  unknown.set("learning_rate", "0.1");
  EXPECT_THROW(make_train_config(unknown), ConfigError);
  KeyValues bad;
  bad.set("epochs", "ten");
  EXPECT_THROW(make_train_config(bad), ConfigError);
  KeyValues even;
  even.set("shift", "4");
  EXPECT_THROW(make_train_config(even), ConfigError);
  KeyValues depths;
  depths.set("depths", "1,2");
  EXPECT_THROW(make_train_config(depths), ConfigError);
}

TEST(TrainConfigKeys, ShippedToyConfigLoads) {
  const auto cfg = make_train_config(KeyValues::load(test::source_root() / "configs/toy.cfg"));
  EXPECT_EQ(cfg.model.channels, 16u);
  EXPECT_EQ(cfg.model.depths, (std::array<std::size_t, 4>{1, 1, 2, 1}));
  EXPECT_EQ(cfg.epochs, 30u);
  EXPECT_EQ(cfg.data.samples, 512u);
}

TEST(Parsers, ShapesAndLists) {
  EXPECT_EQ(parse_shape("1x96x56x56"), (Shape{1, 96, 56, 56}));
  EXPECT_THROW(parse_shape("1x96x56"), ConfigError);
  EXPECT_THROW(parse_shape("1x0x5x5"), ConfigError);
  EXPECT_THROW(parse_shape("1xx5x5"), ConfigError);
  EXPECT_EQ(parse_size_list("k", "1, 2,3"), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_THROW(parse_real("k", "1e"), ConfigError);
  EXPECT_TRUE(parse_bool("k", "Yes"));
}

TEST(Describe, TinyTotalsAndExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_describe({}, out, err), kOk);
  EXPECT_NE(out.str().find("28282696"), std::string::npos);
  EXPECT_NE(out.str().find("(28.28M params, 4.35G MACs)"), std::string::npos);
  EXPECT_NE(out.str().find("(match)"), std::string::npos);
  DescribeOptions bad;
  bad.variant = "giant";
  EXPECT_EQ(cmd_describe(bad, out, err), kUsage);
  EXPECT_NE(err.str().find("unknown variant"), std::string::npos);
}

TEST(Describe, WeightOnlyBlocksLine) {
  DescribeOptions o;
  o.include_aux = false;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_describe(o, out, err), kOk);
  // 12 * C^2 * (2 + 4*2 + 16*6 + 64*2) with C = 96
  EXPECT_NE(out.str().find("blocks: 25878528 params"), std::string::npos);
}

TEST(Verify, UnknownSuiteIsUsageError) {
  std::ostringstream out, err;
  VerifyOptions o;
  o.suite = "speed";
  EXPECT_EQ(cmd_verify(o, out, err), kUsage);
}

TEST(Verify, OracleSuiteReportsAllConfigs) {
  std::ostringstream out, err;
  VerifyOptions o;
  o.suite = "oracle";
  o.seed = 7;
  EXPECT_EQ(cmd_verify(o, out, err), kOk);
  EXPECT_EQ(out.str().rfind("oracle: 160/160 configs exact\n", 0), 0u);
}

TEST(Bench, UnitMacsAndShiftFree) {
  ShiftConfig cfg;
  EXPECT_EQ(bench_op(BenchOp::unit, {1, 96, 56, 56}, cfg, 1).macs, 115605504u);
  EXPECT_EQ(bench_op(BenchOp::axial_shift, {1, 16, 8, 8}, cfg, 1).macs, 0u);
  std::ostringstream out, err;
  BenchOptions bad;
  bad.shape = "1x96";
  EXPECT_EQ(cmd_bench(bad, out, err), kUsage);
}

TEST(Probe, WritesCrossGrid) {
  const auto dir = test::scratch("probe");
  ProbeOptions o;
  o.random_init = true;
  o.output = (dir / "grid.txt").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_probe(o, out, err), kOk);
  const std::string text = read_text(dir / "grid.txt");
  const std::string grid = text.substr(text.find('\n') + 1);
  EXPECT_EQ(grid,
            ".......\n"
            "...#...\n"
            "...#...\n"
            ".#####.\n"
            "...#...\n"
            "...#...\n"
            ".......\n");
}

TEST(Probe, PositionOutOfRange) {
  ProbeOptions o;
  o.random_init = true;
  o.position = Position{9, 0};
  o.output = (test::scratch("probe_oob") / "g.txt").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_probe(o, out, err), kUsage);
  EXPECT_NE(err.str().find("outside"), std::string::npos);
  ProbeOptions neither;
  EXPECT_EQ(cmd_probe(neither, out, err), kUsage);
}

TEST(RenderGrid, MarksField) {
  EXPECT_EQ(render_grid({{0, 1}, {1, 0}}, 2, 3), ".#.\n#..\n");
}

TEST(Fixtures, StoredCorpusRegeneratesByteIdentically) {
  const auto diffs = diff_fixtures(test::fixture_root(), generate_fixtures());
  for (const auto& d : diffs) ADD_FAILURE() << d;
}

TEST(Fixtures, EveryCaseHasProvenance) {
  for (const auto& f : generate_fixtures()) {
    if (f.path.size() < 4 || f.path.substr(f.path.size() - 4) != "meta") continue;
    const std::string text(f.bytes.begin(), f.bytes.end());
    const bool tagged = text.find("provenance = derived\n") != std::string::npos ||
                        text.find("provenance = trivial\n") != std::string::npos ||
                        text.find("provenance = reported\n") != std::string::npos;
    EXPECT_TRUE(tagged) << f.path;
    EXPECT_NE(text.find("seed = "), std::string::npos) << f.path;
  }
}

TEST(Fixtures, DiffReportsTamperedAndOrphanFiles) {
  const auto dir = test::scratch("fixtures_copy");
  const auto files = generate_fixtures();
  write_fixtures(dir, files);
  EXPECT_TRUE(diff_fixtures(dir, files).empty());

  Checkpoint tampered = decode_checkpoint(files[1].bytes);  // first case's expected
  auto& first = std::get<Tensor<double>>(tampered.tensors[0].value);
  first[0] += 1e-12;
  save_checkpoint(tampered, dir / files[1].path);
  std::ofstream(dir / "stray.txt") << "x";
  std::filesystem::remove(dir / files[2].path);

  const auto diffs = diff_fixtures(dir, files);
  ASSERT_EQ(diffs.size(), 3u);
  std::string all;
  for (const auto& d : diffs) all += d + "\n";
  EXPECT_NE(all.find("tensor '" + tampered.tensors[0].name + "' differs"), std::string::npos);
  EXPECT_NE(all.find("missing"), std::string::npos);
  EXPECT_NE(all.find("stray.txt: not produced by the generator"), std::string::npos);
}
