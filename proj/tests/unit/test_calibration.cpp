#include <cmath>
#include <stdexcept>

#include "grouploss/calibration.hpp"
#include "grouploss/simulate.hpp"
#include "support.hpp"

using namespace grouploss;
using testing::near;

TEST_CASE("calibration curve degenerate inputs") {
  std::vector<double> s(50);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i / 49.0;
  const auto ones = fit_calibration_curve(s, std::vector<int>(50, 1));
  for (double x : {0.0, 0.3, 1.0}) CHECK(near(ones(x), 1.0, 1e-12));

  std::vector<int> y(20, 0);
  for (int i = 0; i < 6; ++i) y[i] = 1;
  const auto flat = fit_calibration_curve(std::vector<double>(20, 0.4), y);
  for (double x : {0.0, 0.4, 0.9}) CHECK(near(flat(x), 0.3, 1e-12));

  CHECK_THROWS_AS(fit_calibration_curve(std::vector<double>(9, 0.5), std::vector<int>(9, 0)), std::invalid_argument);
  CHECK_THROWS_AS(fit_calibration_curve(s, std::vector<int>(50, 0), 0.0), std::invalid_argument);
}

TEST_CASE("calibration curve recovers the identity on calibrated data") {
  const std::size_t n = 100000;
  Rng rng(1);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = uniform01(rng);
    y[i] = bernoulli(rng, s[i]);
  }
  const auto curve = fit_calibration_curve(s, y, 0.3);
  double worst = 0.0;
  for (int g = 0; g <= 100; ++g) worst = std::max(worst, std::abs(curve(g / 100.0) - g / 100.0));
  CHECK(worst < 0.02);
  for (double v : curve.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("isotonic fit") {
  const std::vector<double> s{0.1, 0.2, 0.3};
  const auto m = isotonic_fit(s, std::vector<int>{1, 0, 0});
  for (double x : s) CHECK(near(m(x), 1.0 / 3.0, 1e-15));

  const std::vector<double> s2{0.1, 0.1, 0.2, 0.2, 0.3};
  const auto id = isotonic_fit(s2, std::vector<int>{0, 0, 0, 1, 1});
  CHECK(id(0.1) == 0.0);
  CHECK(id(0.2) == 0.5);
  CHECK(id(0.3) == 1.0);
  CHECK(id(0.25) == 0.75);
  CHECK(id(0.0) == 0.0);
  CHECK(id(1.0) == 1.0);
}

TEST_CASE("isotonic output is nondecreasing and lowers binned calibration loss") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 200 + uniform_index(rng, 300);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = uniform01(rng);
      y[i] = bernoulli(rng, std::pow(s[i], 0.5));
    }
    const auto map = isotonic_fit(s, y);
    for (std::size_t k = 1; k < map.values().size(); ++k) CHECK(map.values()[k] >= map.values()[k - 1]);
    for (std::size_t k = 1; k < map.breakpoints().size(); ++k) CHECK(map.breakpoints()[k] > map.breakpoints()[k - 1]);
    const auto r = isotonic_apply(map, s);
    const double before = calibration_loss_binned(make_bins(s, y, 10), ScoringRule::brier()).value;
    const double after = calibration_loss_binned(make_bins(r, y, 10), ScoringRule::brier()).value;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("isotonic fitted on one half calibrates the other") {
  RealisticSimulator::Config c;
  c.distortion = {Distortion::Kind::Power, 2.0};
  const SimulatedData d = sample_realistic(RealisticSimulator(c), 100000, 5);
  const SplitIndex split = stratified_split(d.view, 15, 5);
  std::vector<double> ts;
  std::vector<int> tl;
  for (std::size_t i : split.train_rows) {
    ts.push_back(d.view.score[i]);
    tl.push_back(d.view.label[i]);
  }
  const auto r = isotonic_apply(isotonic_fit(ts, tl), d.view.score);
  const double raw = calibration_loss_binned(make_bins(d.view.score, d.view.label, 15, split.test_rows),
                                             ScoringRule::brier()).value;
  const double cl = calibration_loss_binned(make_bins(r, d.view.label, 15, split.test_rows), ScoringRule::brier()).value;
  CHECK(cl < 1e-3);
  CHECK(cl < raw);
}

TEST_CASE("binned calibration loss worked values") {
  // One bin: S_B = 0.7, c = 0.6.
  const std::vector<double> s{0.7, 0.7, 0.7, 0.7, 0.7};
  const std::vector<int> y{1, 1, 1, 0, 0};
  CHECK(near(calibration_loss_binned(make_bins(s, y, 10), ScoringRule::brier()).value, 0.01, 1e-15));

  // Two equal bins: (0.3, 0.4) and (0.8, 0.8).
  std::vector<double> s2;
  std::vector<int> y2;
  for (int i = 0; i < 5; ++i) {
    s2.push_back(0.3);
    y2.push_back(i < 2);
    s2.push_back(0.8);
    y2.push_back(i < 4);
  }
  CHECK(near(calibration_loss_binned(make_bins(s2, y2, 10), ScoringRule::brier()).value, 0.005, 1e-15));

  // Bin means match the positive fractions: no calibration loss.
  const std::vector<double> s3{0.21, 0.29, 0.25, 0.25, 0.72, 0.78, 0.75, 0.75};
  const std::vector<int> y3{1, 0, 0, 0, 1, 1, 1, 0};
  CHECK(near(calibration_loss_binned(make_bins(s3, y3, 10), ScoringRule::brier()).value, 0.0, 1e-15));
}

TEST_CASE("log-loss calibration loss is infinite only where the divergence is") {
  const std::vector<double> s{0.0, 0.0, 0.5, 0.5};
  const auto inf = calibration_loss_binned(make_bins(s, std::vector<int>{1, 0, 1, 0}, 10), ScoringRule::log_loss());
  CHECK(inf.infinite);
  CHECK(std::isinf(inf.value));

  // c-hat = 0 with S_B inside (0, 1) is finite.
  const auto fin = calibration_loss_binned(make_bins(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 0}, 10),
                                           ScoringRule::log_loss());
  CHECK_FALSE(fin.infinite);
  CHECK(near(fin.value, std::log(2.0), 1e-15));
}
