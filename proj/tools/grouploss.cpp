#include <CLI11.hpp>
#include <iostream>
#include <stdexcept>
#include <string>

#include "grouploss/cli.hpp"

namespace gl = grouploss;

namespace {

// Shared estimation flags; parsed strings are converted after CLI11 runs.
struct ConfigFlags {
  std::string rule = "brier";
  std::size_t bins = 15;
  std::size_t region_ratio = 30;
  std::string partition = "tree";
  std::size_t min_leaf = 15;
  std::string recalibrate = "none";
  std::string reduction = "auto";
  std::uint64_t seed = 0;
  double bandwidth = 0.3;

  void add_to(CLI::App* app) {
    app->add_option("--rule", rule, "brier | brier-vector | logloss")->capture_default_str();
    app->add_option("--bins", bins, "equal-width score bins")->capture_default_str();
    app->add_option("--region-ratio", region_ratio, "training rows per tree region")->capture_default_str();
    app->add_option("--partition", partition, "tree | stump | kmeans[:k]")->capture_default_str();
    app->add_option("--min-leaf", min_leaf, "fewest training rows per tree leaf")->capture_default_str();
    app->add_option("--recalibrate", recalibrate, "none | isotonic")->capture_default_str();
    app->add_option("--reduction", reduction, "auto | top-label | classwise:<k>")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--bandwidth", bandwidth, "calibration-curve neighbour fraction")->capture_default_str();
  }

  gl::RunConfig to_config() const {
    gl::RunConfig c;
    c.rule = gl::parse_scoring_rule(rule);
    c.n_bins = bins;
    c.region_ratio = region_ratio;
    c.partition = gl::parse_partition_strategy(partition);
    c.partition.tree_min_leaf = min_leaf;
    if (recalibrate == "isotonic") c.isotonic = true;
    else if (recalibrate != "none") throw std::invalid_argument("--recalibrate must be none or isotonic");
    c.reduction = gl::parse_reduction(reduction);
    c.seed = seed;
    c.bandwidth_fraction = bandwidth;
    return c;
  }
};

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty() || s == "-") return std::nullopt;
  return std::filesystem::path(s);
}

int with_config(const ConfigFlags& flags, gl::RunConfig& config) {
  try {
    config = flags.to_config();
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gl::cli::kExitInputError;
  }
  return gl::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grouping-loss estimation for probabilistic classifiers"};
  app.require_subcommand(1);
  int exit_code = 0;

  // estimate
  ConfigFlags est_flags;
  std::string est_input, est_out, est_diagram;
  auto* est = app.add_subcommand("estimate", "estimate CL and the grouping-loss lower bound from a score CSV");
  est->add_option("input", est_input, "input CSV")->required();
  est_flags.add_to(est);
  est->add_option("--out", est_out, "report JSON (default stdout)");
  est->add_option("--diagram-out", est_diagram, "grouping-diagram CSV");
  est->callback([&] {
    gl::cli::EstimateArgs args;
    if ((exit_code = with_config(est_flags, args.config)) != 0) return;
    args.input = est_input;
    args.out = optional_path(est_out);
    args.diagram_out = optional_path(est_diagram);
    exit_code = gl::cli::cmd_estimate(args, std::cout, std::cerr);
  });

  // simulate
  gl::cli::SimulateArgs sim_args;
  std::string sim_rule = "brier", sim_out, sim_oracle;
  auto* sim = app.add_subcommand("simulate", "sample a simulator with known posterior");
  sim->add_option("spec", sim_args.spec, "simulator JSON")->required();
  sim->add_option("-n", sim_args.n, "rows")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "random seed")->capture_default_str();
  sim->add_option("--rule", sim_rule, "rule for the oracle summary")->capture_default_str();
  sim->add_option("--n-mc", sim_args.n_mc, "Monte-Carlo rows for the oracle")->capture_default_str();
  sim->add_option("--out", sim_out, "dataset CSV (default stdout)");
  sim->add_option("--oracle-out", sim_oracle, "oracle summary JSON");
  sim->callback([&] {
    try {
      sim_args.rule = gl::parse_scoring_rule(sim_rule);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      exit_code = gl::cli::kExitInputError;
      return;
    }
    sim_args.out = optional_path(sim_out);
    sim_args.oracle_out = optional_path(sim_oracle);
    exit_code = gl::cli::cmd_simulate(sim_args, std::cout, std::cerr);
  });

  // sweep
  ConfigFlags sw_flags;
  gl::cli::SweepArgs sw_args;
  std::string sw_axis = "region_ratio", sw_out;
  auto* sw = app.add_subcommand("sweep", "average estimates over seeded simulator draws along one axis");
  sw->add_option("spec", sw_args.spec, "simulator JSON")->required();
  sw->add_option("--axis", sw_axis, "bins | region_ratio")->capture_default_str();
  sw->add_option("--values", sw_args.values, "axis values")->required()->delimiter(',');
  sw->add_option("--repeats", sw_args.repeats, "seeded repeats per value")->capture_default_str();
  sw->add_option("-n", sw_args.n, "rows per repeat")->capture_default_str();
  sw->add_option("--n-mc", sw_args.n_mc, "Monte-Carlo rows for the oracle")->capture_default_str();
  sw->add_option("--out", sw_out, "sweep CSV (default stdout)");
  sw_flags.add_to(sw);
  sw->callback([&] {
    if (sw_axis == "bins") sw_args.axis = gl::cli::SweepAxis::Bins;
    else if (sw_axis == "region_ratio") sw_args.axis = gl::cli::SweepAxis::RegionRatio;
    else {
      std::cerr << "error: --axis must be bins or region_ratio\n";
      exit_code = gl::cli::kExitInputError;
      return;
    }
    // The swept field may legitimately be out of range; validate the rest.
    try {
      sw_args.config = sw_flags.to_config();
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      exit_code = gl::cli::kExitInputError;
      return;
    }
    sw_args.out = optional_path(sw_out);
    exit_code = gl::cli::cmd_sweep(sw_args, std::cout, std::cerr);
  });

  // recalibrate
  gl::cli::RecalibrateArgs rc_args;
  std::string rc_reduction = "auto", rc_out;
  auto* rc = app.add_subcommand("recalibrate", "isotonic recalibration fitted on the train half");
  rc->add_option("input", rc_args.input, "input CSV")->required();
  rc->add_option("--seed", rc_args.seed, "split seed")->capture_default_str();
  rc->add_option("--bins", rc_args.n_bins, "stratification bins")->capture_default_str();
  rc->add_option("--reduction", rc_reduction, "auto | top-label | classwise:<k>")->capture_default_str();
  rc->add_option("--out", rc_out, "output CSV (default stdout)");
  rc->callback([&] {
    try {
      rc_args.reduction = gl::parse_reduction(rc_reduction);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      exit_code = gl::cli::kExitInputError;
      return;
    }
    rc_args.out = optional_path(rc_out);
    exit_code = gl::cli::cmd_recalibrate(rc_args, std::cout, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gl::cli::kExitInputError;
  }
  return exit_code;
}
