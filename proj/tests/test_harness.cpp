#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "test_util.hpp"
#include "webster/harness.hpp"

using namespace webster;
namespace fs = std::filesystem;

namespace {

fs::path work(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "webster_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

RunConfig quick(const std::string& vowel = "a", double duration = 0.4) {
  RunConfig cfg;
  cfg.vowel = vowel;
  cfg.setup.duration = duration;
  return cfg;
}

double metric(const std::vector<MetricRecord>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.metric == name) return r.value;
  ADD_FAILURE() << "no metric " << name;
  return NAN;
}

double lsd_between(const fs::path& a, const fs::path& b) {
  const auto [x, y] = align_for_metrics(read_wav(a), read_wav(b), 0.05);
  return lsd(x, y);
}

}  // namespace

TEST(Render, PresetDefaultsAndDeterminism) {
  const auto dir = work("render");
  const auto one = cmd_render(RunConfig{}, dir / "one");
  const auto two = cmd_render(RunConfig{}, dir / "two");
  EXPECT_EQ(read_wav(one.wav).size(), 12800u);
  EXPECT_EQ(slurp(one.wav), slurp(two.wav));
  EXPECT_EQ(slurp(one.meta), slurp(two.meta));
  const auto meta = slurp(one.meta);
  EXPECT_NE(meta.find("config_hash = " + config_hash(RunConfig{})), std::string::npos);
  EXPECT_NE(meta.find("seed = 1"), std::string::npos);
  EXPECT_NE(meta.find("zeta = 0.06"), std::string::npos);
  const auto params = read_parameters(one.params);
  EXPECT_EQ(params.zeta, 0.06);
  EXPECT_EQ(params.provenance.at("vowel"), "a");

  auto reseeded = RunConfig{};
  set_config_value(reseeded, "run.seed", "2");
  EXPECT_NE(slurp(cmd_render(reseeded, dir / "three").wav), slurp(one.wav));
}

TEST(Render, ConfigErrors) {
  auto cfg = quick();
  cfg.setup.duration = 0.0;
  EXPECT_THROW(cmd_render(cfg, work("render_bad")), ConfigError);
  auto unstable = quick();
  unstable.setup.courant = 1.5;
  EXPECT_THROW(cmd_render(unstable, work("render_bad")), StabilityError);
}

TEST(Postrender, TransferSurrogate) {
  const auto dir = work("post");
  const auto cfg = quick("i");
  const auto ref = cmd_render(cfg, dir);
  const auto same = cmd_postrender(ref.params, ref.pitch, cfg, {}, dir, "same");
  const auto fine = cmd_postrender(ref.params, ref.pitch, cfg, {{"grid.nx=95"}, 1.0, 1.0}, dir, "fine");
  const auto finer = cmd_postrender(ref.params, ref.pitch, cfg, {{"grid.nx=189"}, 1.0, 1.0}, dir, "finer");
  const auto high = cmd_postrender(ref.params, ref.pitch, cfg, {{}, 1.1, 1.0}, dir, "high");
  const double d_same = lsd_between(ref.wav, same.wav);
  const double d_fine = lsd_between(ref.wav, fine.wav);
  const double d_high = lsd_between(ref.wav, high.wav);
  EXPECT_LE(d_same, 0.5);
  // refinement converges: halving dx again moves the output less
  EXPECT_LT(lsd_between(fine.wav, finer.wav), d_fine);
  EXPECT_GT(d_high, d_fine);
  const auto meta = slurp(fine.meta);
  EXPECT_NE(meta.find("override1 = grid.nx=95"), std::string::npos);
  EXPECT_NE(meta.find("realized_nx = 95"), std::string::npos);
  EXPECT_THROW(cmd_postrender(ref.params, ref.pitch, cfg, {{"grid.courant=1.5"}, 1.0, 1.0}, dir, "bad"), StabilityError);
}

TEST(Evaluate, IdentityAndErrors) {
  const auto dir = work("evaluate");
  const auto cfg = quick();
  const auto ref = cmd_render(cfg, dir);
  const auto out = cmd_evaluate(ref.wav, ref.wav, cfg, dir, ref.pitch);
  EXPECT_EQ(metric(out.rows, "mstft"), 0.0);
  EXPECT_EQ(metric(out.rows, "lsd"), 0.0);
  EXPECT_EQ(metric(out.rows, "log_mel"), 0.0);
  EXPECT_EQ(metric(out.rows, "formant_mae"), 0.0);
  EXPECT_EQ(metric(out.rows, "delta_hnr"), 0.0);
  EXPECT_EQ(slurp(out.csv).substr(0, 31), "vowel,axis,condition,metric,val");

  auto other = read_wav(ref.wav);
  other.fs = 22050.0;
  write_wav(dir / "fast.wav", other);
  EXPECT_THROW(cmd_evaluate(ref.wav, dir / "fast.wav", cfg, dir), SampleRateError);
}

TEST(Evaluate, DdspBaselineMetricsFinite) {
  const auto dir = work("baseline");
  const auto cfg = quick("a", 0.8);
  const auto ref = cmd_render(cfg, dir);
  const auto base = cmd_baseline(ref.wav, ref.pitch, cfg, dir);
  EXPECT_EQ(read_wav(base.wav).size(), 12800u);
  const auto rows = cmd_evaluate(ref.wav, base.wav, cfg, dir, ref.pitch).rows;
  for (const char* m : {"mstft", "lsd", "log_mel", "hnr_reference", "hnr_candidate", "delta_hnr"})
    EXPECT_TRUE(std::isfinite(metric(rows, m))) << m;
  std::istringstream env(slurp(base.envelope_csv));
  std::string header;
  std::getline(env, header);
  EXPECT_EQ(header.substr(0, 12), "frame,h1,h2,");
}

TEST(Invert, BudgetWarningAndErrors) {
  const auto dir = work("invert");
  auto cfg = quick();
  const auto ref = cmd_render(cfg, dir);
  cfg.inverse.max_evals = 1;
  const auto out = cmd_invert(ref.wav, ref.pitch, cfg, dir);
  EXPECT_TRUE(out.fit.convergence_warning);
  EXPECT_NE(slurp(out.report).find("ConvergenceWarning"), std::string::npos);
  EXPECT_EQ(slurp(out.loss_trace).substr(0, 9), "eval,loss");
  const auto params = read_parameters(out.params);
  EXPECT_EQ(params.area.size(), 8u);
  EXPECT_EQ(params.provenance.at("config_hash"), config_hash(cfg));

  EXPECT_THROW(cmd_invert(ref.wav, dir / "missing.txt", cfg, dir), IoError);
  auto other = read_wav(ref.wav);
  other.fs = 44100.0;
  write_wav(dir / "cd.wav", other);
  EXPECT_THROW(cmd_invert(dir / "cd.wav", ref.pitch, cfg, dir), SampleRateError);
}

TEST(Invert, RepeatRunIsIdentical) {
  const auto dir = work("invert_repeat");
  auto cfg = quick();
  const auto ref = cmd_render(cfg, dir);
  cfg.inverse.max_evals = 30;
  const auto a = cmd_invert(ref.wav, ref.pitch, cfg, dir / "one");
  const auto b = cmd_invert(ref.wav, ref.pitch, cfg, dir / "two");
  EXPECT_EQ(slurp(a.params), slurp(b.params));
  EXPECT_EQ(slurp(a.loss_trace), slurp(b.loss_trace));
  EXPECT_EQ(slurp(a.report), slurp(b.report));
}

TEST(SweepSpec, Parsing) {
  std::istringstream ok("[p]\naxis = pitch\nvalues = 0.9, 1.0, 1.1\nbaseline = 1\n[g]\naxis = grid_cfl\nvalues = 1 2@0.8\n");
  const auto specs = parse_sweep_specs(ok);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].values, (std::vector<std::string>{"0.9", "1.0", "1.1"}));
  EXPECT_EQ(specs[0].baseline_index, 1u);
  EXPECT_EQ(specs[1].axis, SweepAxis::grid_cfl);
  std::istringstream bad_axis("[x]\naxis = loudness\nvalues = 1\n");
  EXPECT_THROW(parse_sweep_specs(bad_axis), ConfigError);
  std::istringstream empty("[x]\naxis = pitch\nvalues =\n");
  EXPECT_THROW(parse_sweep_specs(empty), ConfigError);
  std::istringstream out_of_range("[x]\naxis = zeta\nvalues = 1\nbaseline = 1\n");
  EXPECT_THROW(parse_sweep_specs(out_of_range), ConfigError);

  const RunConfig cfg;
  EXPECT_EQ(condition_overrides(SweepAxis::grid_cfl, "2@0.7", cfg).config,
            (std::vector<std::string>{"grid.nx=95", "grid.courant=0.7"}));
  EXPECT_EQ(condition_overrides(SweepAxis::source, "oq=0.5&beta=20", cfg).config,
            (std::vector<std::string>{"source.oq=0.5", "boundary.beta=20"}));
  EXPECT_TRUE(condition_overrides(SweepAxis::source, "base", cfg).config.empty());
  EXPECT_THROW(condition_overrides(SweepAxis::source, "gain=2", cfg), ConfigError);
}

TEST(Sweep, BaselineOnlyHasZeroDeltas) {
  const auto cfg = quick();
  const auto area = vowel_preset("a").area;
  const ParameterFile params{area, 0.06, {}};
  const auto pitch = config_pitch(cfg);
  for (auto axis : {SweepAxis::pitch, SweepAxis::zeta, SweepAxis::grid_cfl, SweepAxis::source}) {
    const SweepSpec spec{axis, {axis == SweepAxis::source ? "base" : "1"}, 0};
    const auto conds = run_sweep(params, pitch, cfg, spec, "a");
    ASSERT_EQ(conds.size(), 1u);
    EXPECT_EQ(conds[0].delta_lsd, 0.0);
    EXPECT_EQ(conds[0].delta_hnr, 0.0);
    const auto sum = summarize_sweep(conds);
    EXPECT_EQ(sum[0].conditions, 0u);
    EXPECT_EQ(sum[0].median_abs_delta_lsd, 0.0);
  }
}

TEST(Sweep, PitchAxisMedianOverTwoConditions) {
  const auto cfg = quick();
  const ParameterFile params{vowel_preset("a").area, 0.06, {}};
  const auto conds = run_sweep(params, config_pitch(cfg), cfg, {SweepAxis::pitch, {"0.9", "1.0", "1.1"}, 1}, "a");
  ASSERT_EQ(conds.size(), 3u);
  EXPECT_TRUE(conds[1].baseline);
  EXPECT_GT(conds[0].delta_lsd, 0.0);
  EXPECT_GT(conds[2].delta_lsd, 0.0);
  const auto sum = summarize_sweep(conds);
  ASSERT_EQ(sum.size(), 1u);
  EXPECT_EQ(sum[0].conditions, 2u);
  EXPECT_DOUBLE_EQ(sum[0].median_abs_delta_lsd, 0.5 * (conds[0].delta_lsd + conds[2].delta_lsd));
  EXPECT_DOUBLE_EQ(sum[0].median_abs_delta_hnr, 0.5 * (std::abs(conds[0].delta_hnr) + std::abs(conds[2].delta_hnr)));
}

TEST(Sweep, CommandWritesLongFormatAndRepeats) {
  const auto dir = work("sweep");
  const auto cfg = quick("u");
  const auto ref = cmd_render(cfg, dir);
  {
    std::ofstream f(dir / "spec.ini");
    f << "[grid]\naxis = grid_cfl\nvalues = 1, 2\n[pitch]\naxis = pitch\nvalues = 0.9, 1, 1.1\nbaseline = 1\n";
  }
  const auto a = cmd_sweep(ref.params, ref.pitch, dir / "spec.ini", cfg, dir / "one");
  const auto b = cmd_sweep(ref.params, ref.pitch, dir / "spec.ini", cfg, dir / "two");
  EXPECT_EQ(slurp(a.csv), slurp(b.csv));
  EXPECT_EQ(slurp(a.summary_csv), slurp(b.summary_csv));
  EXPECT_EQ(a.conditions.size(), 5u);
  EXPECT_EQ(a.summary.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "one" / "u_sweep_pitch_2.wav"));
  std::istringstream summary(slurp(a.summary_csv));
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line, "vowel,axis,condition,metric,value");
  std::getline(summary, line);
  EXPECT_EQ(line.substr(0, 32), "u,grid_cfl,median,abs_delta_lsd,");
}
