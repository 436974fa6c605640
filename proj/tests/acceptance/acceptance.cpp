// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Tolerances are fixed by the acceptance criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "grouploss/binning.hpp"
#include "grouploss/cli.hpp"
#include "grouploss/csv_io.hpp"
#include "grouploss/decomposition.hpp"
#include "grouploss/glestim.hpp"
#include "grouploss/parallel.hpp"
#include "grouploss/pipeline.hpp"
#include "grouploss/random.hpp"
#include "grouploss/simulate.hpp"

using namespace grouploss;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.sd += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(r.sd / static_cast<double>(v.size() - 1));
  return r;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SimulatorSpec kDefaultSim = RealisticSimulator(RealisticSimulator::Config{});
constexpr std::size_t kSeeds = 10;
constexpr std::size_t kRows = 100000;

struct SeedRun {
  std::vector<double> gl_lb, gl_plugin, cl;
};

SeedRun run_seeds(const SimulatorSpec& spec, RunConfig cfg) {
  SeedRun r;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    cfg.seed = s;
    const GroupingReport rep = estimate_binary(sample(spec, kRows, 1000 + s).view, cfg);
    r.gl_lb.push_back(rep.gl_lb);
    r.gl_plugin.push_back(rep.gl_plugin);
    r.cl.push_back(rep.cl_binned);
  }
  return r;
}

const OracleSummary& default_oracle() {
  static const OracleSummary o = true_gl_monte_carlo(kDefaultSim, ScoringRule::brier(), 1000000, 99);
  return o;
}

Outcome tightness() {
  const auto t0 = std::chrono::steady_clock::now();
  const OracleSummary& o = default_oracle();
  const SeedRun r = run_seeds(kDefaultSim, RunConfig{});
  const double secs = seconds_since(t0);
  const MeanSd lb = mean_sd(r.gl_lb), plug = mean_sd(r.gl_plugin);
  const bool ok = lb.mean >= 0.7 * o.gl_true && lb.mean <= o.gl_true + 2 * lb.sd && plug.mean > o.gl_true && secs < 60;
  return {ok, fmt("GL_true=%.5f (se %.1e) GL_LB=%.5f sd %.5f in [%.5f, %.5f]; GL_plugin=%.5f; %.1fs", o.gl_true, o.gl_se,
                  lb.mean, lb.sd, 0.7 * o.gl_true, o.gl_true + 2 * lb.sd, plug.mean, secs)};
}

Outcome plugin_gap() {
  RunConfig cfg;
  cfg.region_ratio = 10;
  const SeedRun r = run_seeds(kDefaultSim, cfg);
  const MeanSd lb = mean_sd(r.gl_lb), plug = mean_sd(r.gl_plugin);
  const double gap = plug.mean - lb.mean;
  return {gap > 3 * lb.sd, fmt("ratio 10: GL_plugin=%.5f GL_LB=%.5f gap %.5f > 3*sd %.5f", plug.mean, lb.mean, gap,
                              3 * lb.sd)};
}

Outcome binning_law() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5);
  std::vector<double> s(1000000);
  for (double& v : s) v = uniform01(rng);
  const std::vector<int> y(s.size(), 0);
  bool ok = true;
  std::string detail;
  for (std::size_t n_bins : {5, 15, 50}) {
    const BinnedView b = make_bins(s, y, n_bins);
    double within = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k)
      within += static_cast<double>(b.stats(k).count) / static_cast<double>(s.size()) * b.stats(k).score_variance;
    const double n2 = static_cast<double>(n_bins * n_bins);
    const double law = 1.0 / (12.0 * n2);
    ok = ok && std::abs(within / law - 1.0) < 0.02 && within <= 1.0 / (4.0 * n2);
    detail += fmt("N=%zu ratio %.4f; ", n_bins, within / law);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 10;
  return {ok, detail + fmt("%.1fs", secs)};
}

Outcome debiasing() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(6);
  constexpr int M = 1000;
  constexpr std::size_t per_region = 100;
  std::vector<double> scores(2 * per_region, 0.75);
  std::vector<std::size_t> regions(2 * per_region), rows(2 * per_region);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = i;
    regions[i] = i < per_region ? 0 : 1;
  }
  std::vector<double> plug, deb;
  std::vector<int> y(rows.size());
  for (int m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = bernoulli(rng, regions[i] ? 0.8 : 0.6);
    const auto e = gl_explained_debiased(region_stats(regions, make_bins(scores, y, 15), y, rows), ScoringRule::brier());
    plug.push_back(e.plugin);
    deb.push_back(e.explained);
  }
  const MeanSd p = mean_sd(plug), d = mean_sd(deb);
  const double se_p = p.sd / std::sqrt(M), se_d = d.sd / std::sqrt(M);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(d.mean - 0.01) < 3 * se_d && p.mean - 0.01 > 3 * se_p && secs < 30;
  return {ok, fmt("debiased %.5f (se %.1e), plugin %.5f (se %.1e); %.1fs", d.mean, se_d, p.mean, se_p, secs)};
}

// Expected one-hot loss of a finite law, from the rule definitions.
double direct_loss(RuleKind kind, const FiniteDistribution& d, bool scalar) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.s.size(); ++i)
    for (std::size_t y = 0; y < d.s[i].size(); ++y) {
      double loss = 0.0;
      if (kind == RuleKind::LogLoss)
        loss = -std::log(d.s[i][y]);
      else
        for (std::size_t k = 0; k < d.s[i].size(); ++k) loss += std::pow(d.s[i][k] - (k == y ? 1.0 : 0.0), 2);
      total += d.weights[i] * d.q[i][y] * loss;
    }
  return scalar ? total / 2.0 : total;
}

ProbVector random_simplex(Rng& rng, std::size_t k) {
  ProbVector p(k);
  double s = 0.0;
  for (double& v : p) s += v = uniform01(rng) + 0.05;
  for (double& v : p) v /= s;
  return p;
}

FiniteDistribution random_law(Rng& rng, std::size_t k, std::size_t atoms) {
  std::vector<ProbVector> levels;
  for (int l = 0; l < 4; ++l) levels.push_back(random_simplex(rng, k));
  FiniteDistribution d;
  double w = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) {
    d.s.push_back(levels[uniform_index(rng, levels.size())]);
    d.q.push_back(random_simplex(rng, k));
    d.weights.push_back(uniform01(rng) + 0.1);
    w += d.weights.back();
  }
  for (double& x : d.weights) x /= w;
  return d;
}

Outcome exact_identities() {
  Rng rng(7);
  double worst_total = 0.0, worst_decomp = 0.0, worst_report = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 10 + uniform_index(rng, 55);
    // Law of total h-variance over random groups.
    for (const ScoringRule& rule : {ScoringRule::brier(), ScoringRule::log_loss()}) {
      std::vector<double> v(n), w(n);
      std::vector<std::size_t> g(n);
      double wsum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = 0.02 + 0.96 * uniform01(rng);
        w[i] = uniform01(rng) + 0.1;
        wsum += w[i];
        g[i] = uniform_index(rng, 4);
      }
      for (double& x : w) x /= wsum;
      double within = 0.0;
      std::vector<double> means, masses;
      for (std::size_t grp = 0; grp < 4; ++grp) {
        std::vector<double> gv, gw;
        double mass = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (g[i] == grp) {
            gv.push_back(v[i]);
            gw.push_back(w[i]);
            mass += w[i];
            mean += w[i] * v[i];
          }
        if (gv.empty()) continue;
        for (double& x : gw) x /= mass;
        within += mass * h_variance(rule, gv, gw);
        means.push_back(mean / mass);
        masses.push_back(mass);
      }
      const double total = h_variance(rule, v, w);
      worst_total = std::max(worst_total, std::abs(total - within - h_variance(rule, means, masses)));
    }
    // Three-term decomposition with an exact posterior.
    const FiniteDistribution d2 = random_law(rng, 2, n);
    const FiniteDistribution d3 = random_law(rng, 3, n);
    for (const ScoringRule& rule : {ScoringRule::brier(), ScoringRule::log_loss()}) {
      const Decomposition r = decompose(rule, d2);
      worst_decomp = std::max(worst_decomp, std::abs(r.cl + r.gl + r.il - direct_loss(rule.kind, d2, rule.kind == RuleKind::Brier)));
    }
    for (const ScoringRule& rule : {ScoringRule::brier(BinaryConvention::Vector), ScoringRule::log_loss()}) {
      const Decomposition r = decompose(rule, d3);
      worst_decomp = std::max(worst_decomp, std::abs(r.cl + r.gl + r.il - direct_loss(rule.kind, d3, false)));
    }
    // Report arithmetic on a small random dataset.
    std::vector<double> x(n), s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = standard_normal(rng);
      s[i] = uniform01(rng);
      y[i] = bernoulli(rng, s[i]);
    }
    RunConfig cfg;
    cfg.n_bins = 3;
    cfg.region_ratio = 2;
    cfg.partition.tree_min_leaf = 2;
    cfg.seed = static_cast<std::uint64_t>(t);
    const GroupingReport rep = estimate_binary(BinaryView{std::make_shared<const Matrix>(n, 1, x), s, y}, cfg);
    worst_report = std::max({worst_report, std::abs(rep.gl_lb - (rep.gl_explained - rep.gl_induced)),
                             std::abs(rep.gl_explained - (rep.gl_plugin - rep.gl_bias))});
  }
  const bool ok = worst_total < 1e-10 && worst_decomp < 1e-10 && worst_report < 1e-10;
  return {ok, fmt("max error: total h-variance %.1e, decomposition %.1e, report %.1e", worst_total, worst_decomp,
                  worst_report)};
}

Outcome classwise() {
  Rng rng(8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const FiniteDistribution d = random_law(rng, 3, 2 + uniform_index(rng, 63));
    for (RuleKind kind : {RuleKind::Brier, RuleKind::LogLoss}) {
      const Decomposition r = decompose_classwise(kind, d);
      worst = std::max(worst, std::abs(r.cl + r.gl + r.il - direct_loss(kind, d, false)));
    }
  }
  return {worst < 1e-10, fmt("max error %.1e over 100 instances", worst)};
}

double worst_bin_gap(const std::vector<double>& s, const std::vector<double>& q) {
  std::vector<double> ds(15), dq(15), cnt(15);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t b = bin_index(s[i], 15);
    ds[b] += s[i];
    dq[b] += q[i];
    cnt[b] += 1;
  }
  double worst = 0.0;
  for (int b = 0; b < 15; ++b)
    if (cnt[b] > 0) worst = std::max(worst, std::abs(dq[b] - ds[b]) / cnt[b]);
  return worst;
}

Outcome calibrated_oracles() {
  const auto realistic = sample(kDefaultSim, 1000000, 11);
  const auto link = sample(LinkSimulator1D(LinkKind::Min2s), 1000000, 12);
  const double g1 = worst_bin_gap(realistic.view.score, realistic.q);
  const double g2 = worst_bin_gap(link.view.score, link.q);
  RealisticSimulator::Config acc;
  acc.accuracy_preserving = true;
  const auto a1 = sample(RealisticSimulator(acc), 1000000, 13);
  const auto a2 = sample(LinkSimulator1D(LinkKind::StepAccurate), 1000000, 14);
  std::size_t bad = 0;
  for (const auto* d : {&a1, &a2})
    for (std::size_t i = 0; i < d->q.size(); ++i) bad += !same_side(d->view.score[i], d->q[i]);
  const double g3 = worst_bin_gap(a1.view.score, a1.q), g4 = worst_bin_gap(a2.view.score, a2.q);
  const bool ok = std::max({g1, g2, g3, g4}) < 0.01 && bad == 0;
  return {ok, fmt("sup bin gap realistic %.4f, link %.4f, accurate %.4f/%.4f; same-side violations %zu", g1, g2, g3, g4,
                  bad)};
}

Outcome recalibration_neutral() {
  RealisticSimulator::Config cfg;
  cfg.distortion = {Distortion::Kind::Power, 2.0};
  const SimulatorSpec spec = RealisticSimulator(cfg);
  RunConfig raw_cfg, iso_cfg;
  iso_cfg.isotonic = true;
  const SeedRun raw = run_seeds(spec, raw_cfg), iso = run_seeds(spec, iso_cfg);
  const MeanSd lr = mean_sd(raw.gl_lb), li = mean_sd(iso.gl_lb), cr = mean_sd(raw.cl), ci = mean_sd(iso.cl);
  const double sd = std::max(lr.sd, li.sd);
  const bool ok = std::abs(li.mean - lr.mean) < 2 * sd && cr.mean >= 5 * ci.mean;
  return {ok, fmt("GL_LB %.5f -> %.5f (2 sd %.5f); CL_binned %.5f -> %.5f (x%.1f)", lr.mean, li.mean, 2 * sd, cr.mean,
                  ci.mean, cr.mean / ci.mean)};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "grouploss_acceptance";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "data.csv";
  {
    const auto d = sample(kDefaultSim, kRows, 21);
    std::ofstream out(csv);
    write_binary_csv(out, d.view, &d.q);
  }
  std::vector<std::string> outputs;
  for (std::size_t threads : {1, 8, 1, 8}) {
    set_max_threads(threads);
    cli::EstimateArgs args;
    args.input = csv;
    args.config.seed = 3;
    args.diagram_out = dir / ("diagram" + std::to_string(outputs.size()) + ".csv");
    std::ostringstream out, err;
    const int code = cli::cmd_estimate(args, out, err);
    std::ifstream diagram(*args.diagram_out);
    std::ostringstream dd;
    dd << diagram.rdbuf();
    outputs.push_back(std::to_string(code) + out.str() + dd.str());
  }
  set_max_threads(0);
  std::filesystem::remove_all(dir);
  const bool same = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& o) { return o == outputs[0]; });
  const bool ok = same && outputs[0].rfind("0{", 0) == 0;
  return {ok, fmt("%zu runs at 1 and 8 threads, %zu bytes each, identical: %s", outputs.size(), outputs[0].size(),
                  same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 simulation tightness", tightness},
      {"2 plugin over-estimates at ratio 10", plugin_gap},
      {"3 binning variance law", binning_law},
      {"4 debiasing unbiasedness", debiasing},
      {"5 exact identities", exact_identities},
      {"6 classwise decomposition", classwise},
      {"7 calibrated-by-construction oracles", calibrated_oracles},
      {"8 recalibration neutrality on grouping", recalibration_neutral},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
