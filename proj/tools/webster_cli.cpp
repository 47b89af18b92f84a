// webster: render, invert, post-render, evaluate, sweep and DDSP baseline.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage/config/IO error, 3 unstable grid.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "webster/webster.hpp"

namespace fs = std::filesystem;
using namespace webster;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string name;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "seed for the source noise and the optimizer (overrides run.seed)");
  cmd->add_option("--out-dir", c.out_dir, "output directory (created if missing)");
  cmd->add_option("--name", c.name, "stem for output files");
  cmd->add_option("--override", c.overrides, "section.key=value, repeatable");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.seed) set_config_value(cfg, "run.seed", std::to_string(*c.seed));
  cfg.validate();
  return cfg;
}

void print_written(std::initializer_list<fs::path> files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Webster vocal-tract toolkit"};
  app.require_subcommand(1);

  Common render_opts, invert_opts, post_opts, eval_opts, sweep_opts, base_opts;

  auto* render_cmd = app.add_subcommand("render", "render a vowel preset (or area file) to a 16 kHz WAV");
  add_common(render_cmd, render_opts);

  std::string reference, pitch, params, candidate, spec;
  auto* invert_cmd = app.add_subcommand("invert", "estimate area function and zeta from a recording");
  add_common(invert_cmd, invert_opts);
  invert_cmd->add_option("reference", reference, "16 kHz reference WAV")->required();
  invert_cmd->add_option("pitch", pitch, "two-column pitch track")->required();

  double pitch_ratio = 1.0, zeta_ratio = 1.0;
  auto* post_cmd = app.add_subcommand("postrender", "re-render exported parameters, optionally on another grid");
  add_common(post_cmd, post_opts);
  post_cmd->add_option("params", params, "parameter file")->required();
  post_cmd->add_option("pitch", pitch, "two-column pitch track")->required();
  post_cmd->add_option("--pitch-ratio", pitch_ratio, "scale the pitch track");
  post_cmd->add_option("--zeta-ratio", zeta_ratio, "scale the exported zeta");

  auto* eval_cmd = app.add_subcommand("evaluate", "compare two WAV files and write a metrics CSV");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("reference", reference, "reference WAV")->required();
  eval_cmd->add_option("candidate", candidate, "candidate WAV")->required();
  std::string eval_pitch;
  eval_cmd->add_option("--pitch", eval_pitch, "pitch track bounding the HNR search (default: config f0)");

  auto* sweep_cmd = app.add_subcommand("sweep", "robustness sweep of exported parameters");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("params", params, "parameter file")->required();
  sweep_cmd->add_option("pitch", pitch, "two-column pitch track")->required();
  sweep_cmd->add_option("spec", spec, "sweep spec (INI, one section per axis)")->required();

  auto* base_cmd = app.add_subcommand("baseline", "fit and render the harmonic additive baseline");
  add_common(base_cmd, base_opts);
  base_cmd->add_option("reference", reference, "16 kHz reference WAV")->required();
  base_cmd->add_option("pitch", pitch, "two-column pitch track")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (render_cmd->parsed()) {
      const auto out = cmd_render(resolve(render_opts), render_opts.out_dir, render_opts.name);
      print_written({out.wav, out.pitch, out.params, out.meta});
    } else if (invert_cmd->parsed()) {
      const auto out = cmd_invert(reference, pitch, resolve(invert_opts), invert_opts.out_dir, invert_opts.name);
      for (const auto& w : out.fit.warnings) std::cerr << "warning: " << w << '\n';
      std::cerr << "loss " << format_double(out.fit.loss) << ", zeta " << format_double(out.fit.zeta) << ", LSD "
                << format_double(out.fit.final_metrics.lsd_db) << " dB\n";
      print_written({out.params, out.loss_trace, out.report});
    } else if (post_cmd->parsed()) {
      PostrenderOverrides ov;
      ov.config = post_opts.overrides;
      ov.pitch_ratio = pitch_ratio;
      ov.zeta_ratio = zeta_ratio;
      // Overrides are applied to the exported parameters, so they are recorded
      // as overrides rather than folded into the base config.
      Common base = post_opts;
      base.overrides.clear();
      const auto out = cmd_postrender(params, pitch, resolve(base), ov, post_opts.out_dir, post_opts.name);
      print_written({out.wav, out.meta});
    } else if (eval_cmd->parsed()) {
      std::optional<fs::path> p;
      if (!eval_pitch.empty()) p = eval_pitch;
      const auto out = cmd_evaluate(reference, candidate, resolve(eval_opts), eval_opts.out_dir, p, eval_opts.name);
      for (const auto& r : out.rows) std::cerr << r.metric << ' ' << csv_value(r.value) << '\n';
      print_written({out.csv});
    } else if (sweep_cmd->parsed()) {
      const auto out = cmd_sweep(params, pitch, spec, resolve(sweep_opts), sweep_opts.out_dir, sweep_opts.name);
      for (const auto& s : out.summary)
        std::cerr << axis_name(s.axis) << ": median |dLSD| " << csv_value(s.median_abs_delta_lsd) << " dB, median |dHNR| "
                  << csv_value(s.median_abs_delta_hnr) << " dB over " << s.conditions << " conditions\n";
      print_written({out.csv, out.summary_csv, out.meta});
    } else if (base_cmd->parsed()) {
      const auto out = cmd_baseline(reference, pitch, resolve(base_opts), base_opts.out_dir, base_opts.name);
      print_written({out.wav, out.envelope_csv, out.meta});
    }
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const SampleRateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
