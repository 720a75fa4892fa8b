#include "ebdiff/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ebdiff/analysis.hpp"
#include "ebdiff/config.hpp"
#include "ebdiff/errors.hpp"
#include "ebdiff/experiment.hpp"

namespace ebdiff {

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve(const CommonArgs& args) {
  ExperimentConfig c = load_config(args.config_path);
  if (!args.out_dir.empty()) c.out_dir = args.out_dir;
  if (args.seed) c.seed = *args.seed;
  return c;
}

int cmd_validate(const CommonArgs& args, std::ostream& out) {
  const auto c = resolve(args);
  out << "ok: " << args.config_path << " (N=" << c.nodes << ", M=" << c.dim
      << ", replicas=" << c.replicas << ", horizon=" << c.horizon << ")\n";
  return 0;
}

int cmd_simulate(const CommonArgs& args, std::ostream& out, std::ostream& err) {
  const auto c = resolve(args);
  RunOptions opts;
  opts.threads = args.threads;
  opts.collect_trace = c.trace;
  try {
    auto result = run_experiment(c, opts);
    write_outputs(c.out_dir, result);
    for (const auto& a : result.algorithms) {
      out << a.spec.label() << ": msd_ss=" << a.summary.msd_ss_db
          << " dB, entr_ss=" << a.summary.entr_ss << ", settle=" << a.summary.settle_instant
          << "\n";
    }
    out << "wrote " << result.manifest.files.size() << " files to " << c.out_dir << "\n";
  } catch (ExperimentAborted& e) {
    auto partial = e.partial();
    write_outputs(c.out_dir, partial);
    err << "error: run aborted: " << e.what() << " (partial results in " << c.out_dir << ")\n";
    return 2;
  }
  return 0;
}

int cmd_analyze(const CommonArgs& args, std::ostream& out) {
  const auto c = resolve(args);
  const auto scenario = build_scenario(c);
  const auto ws = build_workspace(scenario.weights, scenario.profiles, c.f_cap);
  const auto stability = stability_report(ws, scenario.weights, scenario.profiles);

  std::filesystem::create_directories(c.out_dir);
  const auto dir = std::filesystem::path(c.out_dir);
  {
    std::ofstream f(dir / "stability.txt");
    write_key_values(f, to_key_values(stability));
  }
  out << "[stability]\n";
  write_key_values(out, to_key_values(stability));

  for (const auto& spec : c.algorithms) {
    if (spec.algorithm == Algorithm::kNonCoop) continue;
    const std::vector<TriggerPolicy> policies(c.nodes, c.policy_for(spec));
    const auto bounds = bound_report(ws, scenario.weights, scenario.profiles, policies);
    const auto kv = to_key_values(bounds);
    std::ofstream f(dir / ("bounds_" + spec.slug() + ".txt"));
    write_key_values(f, kv);
    out << "[bounds " << spec.label() << "]\n";
    write_key_values(out, kv);
  }
  return 0;
}

int cmd_compare(const CommonArgs& args, std::ostream& out) {
  const auto c = resolve(args);
  RunOptions opts;
  opts.threads = args.threads;
  const auto result = run_bound_comparison(c, opts);
  write_comparison(c.out_dir, result);
  for (const auto& r : result.rows) {
    out << r.spec.label() << ": mean_error " << r.empirical_mean_error << " <= "
        << r.mean_error_bound << " (slack " << r.mean_slack() << "); msd " << r.empirical_msd
        << " <= " << (r.msd_bound ? std::to_string(r.msd_bound->value) : std::string("inf"))
        << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-based diffusion LMS simulator and bound evaluator", "ebdiff"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonArgs common;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("config", common.config_path, "experiment config (key=value)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "output directory (overrides config 'out')");
    sub->add_option("--seed", seed, "master seed override");
    if (runs) {
      sub->add_option("--threads", common.threads, "worker threads (speed only)")
          ->check(CLI::PositiveNumber);
    }
  };
  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo experiment, write CSVs");
  auto* analyze = app.add_subcommand("analyze", "stability conditions and bounds, no simulation");
  auto* compare = app.add_subcommand("compare", "simulate and check against the bounds");
  auto* validate = app.add_subcommand("validate", "check a config and exit");
  add_common(simulate, true);
  add_common(analyze, false);
  add_common(compare, true);
  add_common(validate, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (auto* sub : {simulate, analyze, compare, validate}) {
    if (sub->parsed() && sub->count("--seed") > 0) common.seed = seed;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, out);
    if (simulate->parsed()) return cmd_simulate(common, out, err);
    if (analyze->parsed()) return cmd_analyze(common, out);
    if (compare->parsed()) return cmd_compare(common, out);
  } catch (const ParseError& e) {
    err << "error: " << common.config_path << ": " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ebdiff
