#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "grouploss/parallel.hpp"
#include "grouploss/simulate.hpp"
#include "support.hpp"

using namespace grouploss;
using testing::near;

namespace {

// Largest |mean(v) - mean(s)| over 15 equal-width score bins.
double worst_bin_gap(const std::vector<double>& s, const std::vector<double>& v) {
  std::vector<double> ds(15), dv(15), cnt(15);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t b = std::min<std::size_t>(14, static_cast<std::size_t>(s[i] * 15));
    ds[b] += s[i];
    dv[b] += v[i];
    cnt[b] += 1;
  }
  double worst = 0.0;
  for (int b = 0; b < 15; ++b)
    if (cnt[b] > 0) worst = std::max(worst, std::abs(dv[b] - ds[b]) / cnt[b]);
  return worst;
}

std::vector<double> as_double(const std::vector<int>& y) { return {y.begin(), y.end()}; }

}  // namespace

TEST_CASE("link constructions") {
  const LinkSimulator1D id(LinkKind::Identity);
  const LinkSimulator1D step(LinkKind::StepAccurate);
  const LinkSimulator1D min2s(LinkKind::Min2s);
  for (double s = 0.0; s <= 1.0; s += 0.01) {
    CHECK(id.h(s) == s);
    CHECK(near(min2s.g(s), std::max(0.0, 2 * s - 1), 1e-15));
    CHECK(min2s.h(s) == std::min(2 * s, 1.0));
  }
  CHECK(step.accuracy_preserving());
  CHECK_FALSE(min2s.accuracy_preserving());
  CHECK(id.score(0.0) == 0.0);
  CHECK(near(id.score(-1.3), id.score(1.3), 0.0));
  CHECK(near(id.score(1.959963984540054), 0.95, 1e-12));
  CHECK_THROWS_AS(parse_link_kind("cubic"), std::invalid_argument);
}

TEST_CASE("one-dimensional samples") {
  const auto d = sample_link_1d(LinkSimulator1D(LinkKind::Identity), 1000, 3);
  CHECK(d.view.feature_dim() == 1);
  CHECK(d.q == d.view.score);

  const auto acc = sample_link_1d(LinkSimulator1D(LinkKind::StepAccurate), 100000, 4);
  for (std::size_t i = 0; i < acc.q.size(); ++i) CHECK(same_side(acc.view.score[i], acc.q[i]));

  const auto m = sample_link_1d(LinkSimulator1D(LinkKind::Min2s), 1000000, 5);
  CHECK(worst_bin_gap(m.view.score, m.q) < 0.01);
  CHECK(worst_bin_gap(m.view.score, as_double(m.view.label)) < 0.01);
  const auto oracle = oracle_from_sample(m.view.score, m.q, ScoringRule::brier(), 1);
  CHECK(oracle.gl_true > 0.01);
}

TEST_CASE("realistic simulator") {
  RealisticSimulator::Config cfg;
  const RealisticSimulator sim(cfg);
  // psi is odd along w_perp: mirrored points average to the score.
  for (double z : {0.3, 1.0, 2.5}) {
    const std::vector<double> a{0.7, z}, b{0.7, -z};
    CHECK(near(sim.posterior(a) + sim.posterior(b), 2 * sim.calibrated_score(a), 1e-14));
    CHECK(sim.posterior(a) != sim.calibrated_score(a));
  }

  const auto d = sample_realistic(sim, 1000000, 6);
  CHECK(worst_bin_gap(d.view.score, d.q) < 0.01);
  for (double q : d.q) CHECK((q >= 0.0 && q <= 1.0));

  cfg.accuracy_preserving = true;
  const auto acc = sample_realistic(RealisticSimulator(cfg), 100000, 7);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < acc.q.size(); ++i) bad += !same_side(acc.view.score[i], acc.q[i]);
  CHECK(bad == 0);

  cfg.psi = PsiKind::Zero;
  const auto flat = sample_realistic(RealisticSimulator(cfg), 50000, 8);
  CHECK(flat.q == flat.view.score);
  const auto o = oracle_from_sample(flat.view.score, flat.q, ScoringRule::brier(), 2);
  // Q = S still varies inside a stratum of width 1/1000: at most 1/(12 * 1000^2).
  CHECK(std::abs(o.gl_true) <= 2 * o.gl_se + 1.0 / 12e6);

  RealisticSimulator::Config bad_cfg;
  bad_cfg.omega_perp = {1.0, 1.0};
  CHECK_THROWS_AS(RealisticSimulator{bad_cfg}, std::invalid_argument);
  bad_cfg.omega_perp = {0.0, 0.0};
  CHECK_THROWS_AS(RealisticSimulator{bad_cfg}, std::invalid_argument);
  bad_cfg = {};
  bad_cfg.sigma_eigenvalues = {1.0, -1.0};
  CHECK_THROWS_AS(RealisticSimulator{bad_cfg}, std::invalid_argument);
}

TEST_CASE("sampling is seeded and independent of the thread count") {
  const SimulatorSpec spec = RealisticSimulator(RealisticSimulator::Config{});
  set_max_threads(1);
  const auto a = sample(spec, 200000, 9);
  set_max_threads(4);
  const auto b = sample(spec, 200000, 9);
  set_max_threads(0);
  CHECK(a.view.score == b.view.score);
  CHECK(a.view.label == b.view.label);
  CHECK(a.q == b.q);
  CHECK(a.view.features->data() == b.view.features->data());
  CHECK(sample(spec, 1000, 10).q != sample(spec, 1000, 11).q);
}

TEST_CASE("oracle on a two-region law") {
  std::vector<double> s(100000, 0.7), q(100000);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = i % 2 ? 0.8 : 0.6;
  const auto o = oracle_from_sample(s, q, ScoringRule::brier(), 3);
  CHECK(near(o.gl_true, 0.01, 1e-6));
  CHECK(near(o.cl_true, 0.0, 1e-12));
  const auto v = oracle_from_sample(s, q, ScoringRule::brier(BinaryConvention::Vector), 3);
  CHECK(near(v.gl_true, 0.02, 2e-6));
}

TEST_CASE("strata losses") {
  std::vector<double> s{0.1, 0.1, 0.9, 0.9, 0.5};
  std::vector<double> q{0.0, 0.2, 0.9, 0.9, 0.3};
  const auto r = strata_losses(s, q, ScoringRule::brier(), 10);
  // The single-row stratum at 0.5 is dropped; weights are over kept rows.
  CHECK(near(r.gl, 0.5 * 0.01, 1e-15));
  CHECK(near(r.cl, 0.0, 1e-15));
  CHECK(near(strata_losses(s, q, ScoringRule::brier(), 10, true).gl, 0.5 * 0.02, 1e-15));
}

TEST_CASE("monte-carlo oracle converges on the default configuration") {
  const SimulatorSpec spec = RealisticSimulator(RealisticSimulator::Config{});
  const auto o = true_gl_monte_carlo(spec, ScoringRule::brier(), 1000000, 12);
  CHECK(o.converged);
  CHECK(o.gl_true > 0.0);
  CHECK(o.gl_se < 0.05 * o.gl_true);
  CHECK(std::abs(o.cl_true) < 1e-3);
}

TEST_CASE("simulator spec JSON") {
  const auto spec = parse_simulator_spec(R"({"kind":"realistic","d":3,"omega":[1,0,0],"omega_perp":[0,0,2],)"
                                         R"("psi":"sign","accuracy_preserving":true,"sigma_eigenvalues":[1,2,3]})");
  const auto& sim = std::get<RealisticSimulator>(spec);
  CHECK(sim.config().d == 3);
  CHECK(sim.config().psi == PsiKind::Sign);
  const auto again = parse_simulator_spec(simulator_spec_json(spec));
  CHECK(simulator_spec_json(again) == simulator_spec_json(spec));

  const auto link = parse_simulator_spec(R"({"kind":"link1d","link":"min2s"})");
  CHECK(std::get<LinkSimulator1D>(link).link() == LinkKind::Min2s);
  CHECK(std::holds_alternative<RealisticSimulator>(parse_simulator_spec("{}")));

  CHECK_THROWS_AS(parse_simulator_spec(R"({"colour":1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_simulator_spec(R"({"kind":"other"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_simulator_spec(R"({"omega":[1,1],"omega_perp":[1,0]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_simulator_spec("[1,"), std::invalid_argument);
}
