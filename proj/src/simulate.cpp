#include "grouploss/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "grouploss/parallel.hpp"
#include "grouploss/random.hpp"

namespace grouploss {

namespace {

using nlohmann::json;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double psi(PsiKind kind, double z) {
  switch (kind) {
    case PsiKind::Sigmoid: return 2.0 * sigmoid(z) - 1.0;
    case PsiKind::Sign: return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case PsiKind::Zero: return 0.0;
  }
  return 0.0;
}

// Runs `fill(first_row, count, rng)` per block with a block-derived seed.
template <typename Fill>
void for_blocks(std::size_t n, std::uint64_t seed, Fill fill) {
  const std::size_t blocks = (n + kSimulationBlock - 1) / kSimulationBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const std::size_t first = b * kSimulationBlock;
    fill(first, std::min(kSimulationBlock, n - first), rng);
  });
}

}  // namespace

std::string to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Identity: return "identity";
    case LinkKind::Min2s: return "min2s";
    case LinkKind::Poly: return "poly";
    case LinkKind::StepAccurate: return "step_accurate";
  }
  return "identity";
}

LinkKind parse_link_kind(std::string_view name) {
  for (LinkKind k : {LinkKind::Identity, LinkKind::Min2s, LinkKind::Poly, LinkKind::StepAccurate})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown link: " + std::string(name));
}

LinkSimulator1D::LinkSimulator1D(LinkKind link) : link_(link) {
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    const double v = h(s);
    if (v < 2.0 * s - 1.0 - 1e-12 || v > 2.0 * s + 1e-12 || v < 0.0 || v > 1.0)
      throw std::invalid_argument("link leaves the band 2s - 1 <= h(s) <= 2s");
  }
}

double LinkSimulator1D::h(double s) const {
  switch (link_) {
    case LinkKind::Identity: return s;
    case LinkKind::Min2s: return std::min(2.0 * s, 1.0);
    case LinkKind::Poly: return -s * s + 2.0 * s;
    case LinkKind::StepAccurate: return std::max(std::min(2.0 * s, 0.5), 2.0 * s - 1.0);
  }
  return s;
}

double LinkSimulator1D::score(double x) const { return std::erf(std::abs(x) / std::numbers::sqrt2); }

double LinkSimulator1D::posterior(double x) const {
  const double s = score(x);
  if (x > 0.0) return std::clamp(h(s), 0.0, 1.0);
  if (x < 0.0) return std::clamp(g(s), 0.0, 1.0);
  return s;
}

bool LinkSimulator1D::accuracy_preserving() const {
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    if (!same_side(s, h(s)) || !same_side(s, g(s))) return false;
  }
  return true;
}

std::string to_string(PsiKind kind) {
  switch (kind) {
    case PsiKind::Sigmoid: return "sigmoid";
    case PsiKind::Sign: return "sign";
    case PsiKind::Zero: return "zero";
  }
  return "sigmoid";
}

PsiKind parse_psi_kind(std::string_view name) {
  for (PsiKind k : {PsiKind::Sigmoid, PsiKind::Sign, PsiKind::Zero})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown psi: " + std::string(name));
}

double Distortion::apply(double s) const {
  switch (kind) {
    case Kind::None: return s;
    case Kind::Power: return std::pow(s, parameter);
    case Kind::LogitScale: {
      if (s <= 0.0 || s >= 1.0) return s;
      return sigmoid(parameter * std::log(s / (1.0 - s)));
    }
  }
  return s;
}

RealisticSimulator::RealisticSimulator(Config config) : config_(std::move(config)) {
  const std::size_t d = config_.d;
  if (d < 2) throw std::invalid_argument("realistic simulator needs d >= 2");
  if (config_.omega.size() != d || config_.omega_perp.size() != d)
    throw std::invalid_argument("omega and omega_perp must have d entries");
  const double nw = norm(config_.omega);
  const double np = norm(config_.omega_perp);
  if (nw == 0.0 || np == 0.0) throw std::invalid_argument("omega and omega_perp must be nonzero");
  if (std::abs(dot(config_.omega, config_.omega_perp)) > 1e-9 * nw * np)
    throw std::invalid_argument("omega and omega_perp must be orthogonal");
  if (config_.sigma_eigenvalues.size() > d) throw std::invalid_argument("too many sigma eigenvalues");
  std::vector<double> eig = config_.sigma_eigenvalues;
  eig.resize(d, 1.0);
  for (double e : eig)
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("sigma must be positive semidefinite");
  if (config_.distortion.kind != Distortion::Kind::None && !(config_.distortion.parameter > 0.0))
    throw std::invalid_argument("distortion parameter must be positive");

  // Orthonormal basis starting with w and w_perp (Gram-Schmidt on the rest).
  basis_ = Matrix(d, d);
  std::size_t filled = 0;
  auto try_add = [&](std::vector<double> v) {
    for (std::size_t r = 0; r < filled; ++r) {
      const double p = dot(v, basis_.row(r));
      for (std::size_t j = 0; j < d; ++j) v[j] -= p * basis_(r, j);
    }
    const double nv = norm(v);
    if (nv < 1e-9 || filled == d) return;
    for (std::size_t j = 0; j < d; ++j) basis_(filled, j) = v[j] / nv;
    ++filled;
  };
  try_add(config_.omega);
  try_add(config_.omega_perp);
  for (std::size_t j = 0; j < d && filled < d; ++j) {
    std::vector<double> e(d, 0.0);
    e[j] = 1.0;
    try_add(e);
  }
  scale_.resize(d);
  for (std::size_t i = 0; i < d; ++i) scale_[i] = std::sqrt(eig[i]);
}

double RealisticSimulator::calibrated_score(std::span<const double> x) const {
  return sigmoid(dot(config_.omega, x));
}

double RealisticSimulator::posterior(std::span<const double> x) const {
  const double s = calibrated_score(x);
  double delta = std::min(s, 1.0 - s);
  if (config_.accuracy_preserving) delta = std::min(delta, std::abs(0.5 - s));
  return std::clamp(s + psi(config_.psi, dot(config_.omega_perp, x)) * delta, 0.0, 1.0);
}

namespace {

std::vector<double> number_array(const json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string(key) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const char* distortion_name(Distortion::Kind k) {
  switch (k) {
    case Distortion::Kind::None: return "none";
    case Distortion::Kind::Power: return "power";
    case Distortion::Kind::LogitScale: return "logit_scale";
  }
  return "none";
}

}  // namespace

SimulatorSpec parse_simulator_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("simulator spec: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("simulator spec must be a JSON object");
  static const std::vector<std::string> known{"kind", "d", "omega", "omega_perp", "psi", "accuracy_preserving",
                                              "sigma_eigenvalues", "link", "distortion"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown simulator key: " + key);

  try {
    const std::string kind = j.value("kind", std::string("realistic"));
    if (kind == "link1d") {
      return LinkSimulator1D(parse_link_kind(j.value("link", std::string("identity"))));
    }
    if (kind != "realistic") throw std::invalid_argument("unknown simulator kind: " + kind);

    RealisticSimulator::Config c;
    if (j.contains("d")) {
      if (!j["d"].is_number_unsigned()) throw std::invalid_argument("d must be a positive integer");
      c.d = j["d"].get<std::size_t>();
      c.omega.assign(c.d, 0.0);
      c.omega_perp.assign(c.d, 0.0);
      if (c.d >= 2) {
        c.omega[0] = 1.0;
        c.omega_perp[1] = 1.0;
      }
    }
    if (j.contains("omega")) c.omega = number_array(j["omega"], "omega");
    if (j.contains("omega_perp")) c.omega_perp = number_array(j["omega_perp"], "omega_perp");
    if (j.contains("psi")) c.psi = parse_psi_kind(j["psi"].get<std::string>());
    if (j.contains("accuracy_preserving")) c.accuracy_preserving = j["accuracy_preserving"].get<bool>();
    if (j.contains("sigma_eigenvalues")) c.sigma_eigenvalues = number_array(j["sigma_eigenvalues"], "sigma_eigenvalues");
    if (j.value("link", std::string("sigmoid")) != "sigmoid")
      throw std::invalid_argument("realistic simulator supports the sigmoid link only");
    if (j.contains("distortion")) {
      const json& dj = j["distortion"];
      const std::string dk = dj.value("kind", std::string("none"));
      if (dk == "none") c.distortion.kind = Distortion::Kind::None;
      else if (dk == "power") c.distortion.kind = Distortion::Kind::Power;
      else if (dk == "logit_scale") c.distortion.kind = Distortion::Kind::LogitScale;
      else throw std::invalid_argument("unknown distortion: " + dk);
      c.distortion.parameter = dj.value("parameter", 1.0);
    }
    return RealisticSimulator(std::move(c));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("simulator spec: ") + e.what());
  }
}

std::string simulator_spec_json(const SimulatorSpec& spec) {
  nlohmann::ordered_json j;
  if (const auto* link = std::get_if<LinkSimulator1D>(&spec)) {
    j["kind"] = "link1d";
    j["link"] = to_string(link->link());
  } else {
    const auto& c = std::get<RealisticSimulator>(spec).config();
    j["kind"] = "realistic";
    j["d"] = c.d;
    j["omega"] = c.omega;
    j["omega_perp"] = c.omega_perp;
    j["psi"] = to_string(c.psi);
    j["accuracy_preserving"] = c.accuracy_preserving;
    j["sigma_eigenvalues"] = c.sigma_eigenvalues;
    j["link"] = "sigmoid";
    j["distortion"] = {{"kind", distortion_name(c.distortion.kind)}, {"parameter", c.distortion.parameter}};
  }
  return j.dump(2);
}

SimulatedData sample_realistic(const RealisticSimulator& sim, std::size_t n, std::uint64_t seed) {
  const std::size_t d = sim.config().d;
  Matrix x(n, d);
  std::vector<double> score(n), q(n);
  std::vector<int> label(n);
  for_blocks(n, seed, [&](std::size_t first, std::size_t count, Rng& rng) {
    std::vector<double> z(d);
    for (std::size_t i = first; i < first + count; ++i) {
      for (double& v : z) v = standard_normal(rng);
      auto row = x.row(i);
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t e = 0; e < d; ++e) {
        const double a = sim.scale()[e] * z[e];
        for (std::size_t j = 0; j < d; ++j) row[j] += a * sim.basis()(e, j);
      }
      q[i] = sim.posterior(row);
      score[i] = std::clamp(sim.config().distortion.apply(sim.calibrated_score(row)), 0.0, 1.0);
      label[i] = bernoulli(rng, q[i]) ? 1 : 0;
    }
  });
  SimulatedData out;
  out.view = BinaryView::native(std::make_shared<const Matrix>(std::move(x)), std::move(score), std::move(label));
  out.q = std::move(q);
  out.seed = seed;
  return out;
}

SimulatedData sample_link_1d(const LinkSimulator1D& sim, std::size_t n, std::uint64_t seed) {
  Matrix x(n, 1);
  std::vector<double> score(n), q(n);
  std::vector<int> label(n);
  for_blocks(n, seed, [&](std::size_t first, std::size_t count, Rng& rng) {
    for (std::size_t i = first; i < first + count; ++i) {
      const double xi = standard_normal(rng);
      x(i, 0) = xi;
      score[i] = sim.score(xi);
      q[i] = sim.posterior(xi);
      label[i] = bernoulli(rng, q[i]) ? 1 : 0;
    }
  });
  SimulatedData out;
  out.view = BinaryView::native(std::make_shared<const Matrix>(std::move(x)), std::move(score), std::move(label));
  out.q = std::move(q);
  out.seed = seed;
  return out;
}

SimulatedData sample(const SimulatorSpec& spec, std::size_t n, std::uint64_t seed) {
  if (const auto* link = std::get_if<LinkSimulator1D>(&spec)) return sample_link_1d(*link, n, seed);
  return sample_realistic(std::get<RealisticSimulator>(spec), n, seed);
}

StrataLosses strata_losses(std::span<const double> scores, std::span<const double> q, const ScoringRule& rule,
                           std::size_t n_strata, bool sampled) {
  if (scores.size() != q.size()) throw std::invalid_argument("strata_losses: size mismatch");
  if (n_strata == 0) throw std::invalid_argument("strata_losses: need at least one stratum");
  std::vector<std::size_t> count(n_strata, 0);
  std::vector<double> q_sum(n_strata, 0.0), h_sum(n_strata, 0.0);
  std::vector<std::size_t> stratum(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t k = std::min(static_cast<std::size_t>(scores[i] * static_cast<double>(n_strata)), n_strata - 1);
    stratum[i] = k;
    ++count[k];
    q_sum[k] += q[i];
    h_sum[k] += negative_entropy(rule, q[i]);
  }
  std::size_t kept = 0;
  for (std::size_t k = 0; k < n_strata; ++k)
    if (count[k] >= 2) kept += count[k];
  StrataLosses out;
  if (kept == 0) return out;
  std::vector<double> c(n_strata, 0.0);
  for (std::size_t k = 0; k < n_strata; ++k) {
    if (count[k] < 2) continue;
    const double nk = static_cast<double>(count[k]);
    c[k] = std::clamp(q_sum[k] / nk, 0.0, 1.0);
    double within = h_sum[k] - nk * negative_entropy(rule, c[k]);
    if (sampled && rule.kind == RuleKind::Brier) within *= nk / (nk - 1.0);
    out.gl += within / static_cast<double>(kept);
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (count[stratum[i]] < 2) continue;
    const double s = scores[i];
    const double ck = c[stratum[i]];
    double d;
    if (rule.kind == RuleKind::LogLoss && ((s <= 0.0 && ck > 0.0) || (s >= 1.0 && ck < 1.0)))
      d = std::numeric_limits<double>::infinity();
    else
      d = divergence(rule, s, ck);
    out.cl += d / static_cast<double>(kept);
  }
  out.gl = std::max(out.gl, 0.0);
  return out;
}

OracleSummary oracle_from_sample(std::span<const double> scores, std::span<const double> q,
                                 const ScoringRule& rule, std::uint64_t seed, std::size_t n_strata) {
  constexpr std::size_t kResamples = 20;
  OracleSummary out;
  out.n_mc = scores.size();
  out.n_strata = n_strata;
  const StrataLosses base = strata_losses(scores, q, rule, n_strata, true);
  out.gl_true = base.gl;
  out.cl_true = base.cl;
  out.gl_refined = strata_losses(scores, q, rule, 4 * n_strata, true).gl;

  std::vector<StrataLosses> boot(kResamples);
  parallel_for(kResamples, [&](std::size_t b) {
    Rng rng(derive_seed(seed, 0xb007 + b));
    std::vector<double> bs(scores.size()), bq(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const auto j = static_cast<std::size_t>(uniform_index(rng, scores.size()));
      bs[i] = scores[j];
      bq[i] = q[j];
    }
    boot[b] = strata_losses(bs, bq, rule, n_strata, true);
  });
  auto sd = [&](auto field) {
    double m = 0.0;
    for (const auto& b : boot) m += field(b);
    m /= kResamples;
    double v = 0.0;
    for (const auto& b : boot) v += (field(b) - m) * (field(b) - m);
    return std::sqrt(v / (kResamples - 1));
  };
  out.gl_se = sd([](const StrataLosses& s) { return s.gl; });
  out.cl_se = sd([](const StrataLosses& s) { return s.cl; });
  out.converged = std::abs(out.gl_refined - out.gl_true) < out.gl_se;
  return out;
}

OracleSummary true_gl_monte_carlo(const SimulatorSpec& spec, const ScoringRule& rule, std::size_t n_mc,
                                  std::uint64_t seed, std::size_t n_strata) {
  const SimulatedData data = sample(spec, n_mc, derive_seed(seed, 0x0c1e));
  return oracle_from_sample(data.view.score, data.q, rule, seed, n_strata);
}

bool same_side(double s, double q) { return s >= 0.5 ? q >= 0.5 : q <= 0.5; }

}  // namespace grouploss
