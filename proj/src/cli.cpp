#include "grouploss/cli.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "grouploss/calibration.hpp"
#include "grouploss/csv_io.hpp"
#include "grouploss/random.hpp"
#include "grouploss/simulate.hpp"

namespace grouploss::cli {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(0, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or to `fallback` when no path is given.
void emit(const std::optional<std::filesystem::path>& path, std::ostream& fallback, const std::string& text) {
  if (!path) {
    fallback << text;
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path->string());
  f << text;
}

template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.config.validate();
    const CsvDataset data = read_dataset_csv(args.input);
    const GroupingReport report = estimate_grouping(data.dataset, args.config);
    emit(args.out, out, report_json(report, args.config));
    if (args.diagram_out) {
      std::ostringstream csv;
      write_diagram_csv(csv, report);
      emit(args.diagram_out, out, csv.str());
    }
    if (report.all_unestimable) {
      err << "error: every bin is unestimable (a region holds a single test row)\n";
      return kExitUnestimable;
    }
    return kExitOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SimulatorSpec spec = parse_simulator_spec(read_text(args.spec));
    if (args.n == 0) throw std::invalid_argument("-n must be positive");
    const SimulatedData data = sample(spec, args.n, args.seed);
    std::ostringstream csv;
    write_binary_csv(csv, data.view, &data.q);
    emit(args.out, out, csv.str());

    if (args.oracle_out) {
      const OracleSummary o = true_gl_monte_carlo(spec, args.rule, args.n_mc, args.seed);
      nlohmann::ordered_json j;
      j["spec"] = nlohmann::ordered_json::parse(simulator_spec_json(spec));
      j["seed"] = args.seed;
      j["n"] = args.n;
      j["rule"] = to_string(args.rule);
      j["n_mc"] = o.n_mc;
      j["n_strata"] = o.n_strata;
      j["GL_true"] = o.gl_true;
      j["GL_true_se"] = o.gl_se;
      j["GL_true_refined"] = o.gl_refined;
      j["converged"] = o.converged;
      j["CL_true"] = std::isfinite(o.cl_true) ? nlohmann::ordered_json(o.cl_true) : nlohmann::ordered_json(nullptr);
      j["CL_true_se"] = std::isfinite(o.cl_se) ? nlohmann::ordered_json(o.cl_se) : nlohmann::ordered_json(nullptr);
      emit(args.oracle_out, out, j.dump(2) + "\n");
    }
    return kExitOk;
  });
}

std::vector<SweepRow> run_sweep(const SweepArgs& args) {
  const SimulatorSpec spec = parse_simulator_spec(read_text(args.spec));
  if (args.repeats == 0) throw std::invalid_argument("--repeats must be positive");
  const OracleSummary oracle = true_gl_monte_carlo(spec, args.config.rule, args.n_mc, args.config.seed);

  std::vector<SimulatedData> samples;
  for (std::size_t r = 0; r < args.repeats; ++r) samples.push_back(sample(spec, args.n, derive_seed(args.config.seed, r)));

  std::vector<SweepRow> rows;
  for (std::size_t value : args.values) {
    SweepRow row;
    row.value = value;
    row.gl_true = oracle.gl_true;
    row.gl_true_se = oracle.gl_se;
    RunConfig config = args.config;
    if (args.axis == SweepAxis::Bins) config.n_bins = value;
    else config.region_ratio = value;

    bool ok = true;
    try {
      config.validate();
    } catch (const std::invalid_argument&) {
      if (args.axis == SweepAxis::RegionRatio && value < 2) ok = false;
      else throw;
    }
    std::vector<double> lb, plugin, explained, induced;
    for (std::size_t r = 0; ok && r < args.repeats; ++r) {
      config.seed = derive_seed(args.config.seed, r);
      const GroupingReport rep = estimate_binary(samples[r].view, config);
      if (rep.all_unestimable) ok = false;
      lb.push_back(rep.gl_lb);
      plugin.push_back(rep.gl_plugin);
      explained.push_back(rep.gl_explained);
      induced.push_back(rep.gl_induced);
    }
    if (!ok) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.unestimable = true;
      row.gl_lb = row.gl_lb_sd = row.gl_plugin = row.gl_plugin_sd = nan;
      row.gl_explained = row.gl_explained_sd = row.gl_induced = row.gl_induced_sd = nan;
    } else {
      row.gl_lb = mean_of(lb);
      row.gl_lb_sd = sd_of(lb);
      row.gl_plugin = mean_of(plugin);
      row.gl_plugin_sd = sd_of(plugin);
      row.gl_explained = mean_of(explained);
      row.gl_explained_sd = sd_of(explained);
      row.gl_induced = mean_of(induced);
      row.gl_induced_sd = sd_of(induced);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, SweepAxis axis) {
  out << (axis == SweepAxis::Bins ? "bins" : "region_ratio")
      << ",GL_LB,GL_LB_sd,GL_plugin,GL_plugin_sd,GL_explained,GL_explained_sd,GL_induced,GL_induced_sd,"
         "GL_true,GL_true_se,unestimable\n";
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  for (const SweepRow& r : rows) {
    out << r.value << ',' << num(r.gl_lb) << ',' << num(r.gl_lb_sd) << ',' << num(r.gl_plugin) << ','
        << num(r.gl_plugin_sd) << ',' << num(r.gl_explained) << ',' << num(r.gl_explained_sd) << ','
        << num(r.gl_induced) << ',' << num(r.gl_induced_sd) << ',' << num(r.gl_true) << ',' << num(r.gl_true_se)
        << ',' << (r.unestimable ? 1 : 0) << '\n';
  }
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<SweepRow> rows = run_sweep(args);
    std::ostringstream csv;
    write_sweep_csv(csv, rows, args.axis);
    emit(args.out, out, csv.str());
    return kExitOk;
  });
}

int cmd_recalibrate(const RecalibrateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.n_bins < 1) throw std::invalid_argument("--bins must be at least 1");
    const CsvDataset data = read_dataset_csv(args.input);
    BinaryView bv = reduce(data.dataset, args.reduction);
    if (bv.size() < 4) throw std::invalid_argument("need at least 4 rows");
    const SplitIndex split = stratified_split(bv, args.n_bins, args.seed);
    std::vector<double> ts;
    std::vector<int> tl;
    for (std::size_t i : split.train_rows) {
      ts.push_back(bv.score[i]);
      tl.push_back(bv.label[i]);
    }
    bv.score = isotonic_apply(isotonic_fit(ts, tl), bv.score);
    std::ostringstream csv;
    write_binary_csv(csv, bv, data.q_true ? &*data.q_true : nullptr);
    emit(args.out, out, csv.str());
    return kExitOk;
  });
}

}  // namespace grouploss::cli
