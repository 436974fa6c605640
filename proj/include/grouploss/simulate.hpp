#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "grouploss/data.hpp"
#include "grouploss/scoring.hpp"

namespace grouploss {

/// Link h for the one-dimensional construction; g(s) = 2s - h(s).
enum class LinkKind {
  Identity,      // h(s) = s
  Min2s,         // h(s) = min(2s, 1)
  Poly,          // h(s) = -s^2 + 2s
  StepAccurate,  // h(s) = max(min(2s, 1/2), 2s - 1)
};

std::string to_string(LinkKind kind);
LinkKind parse_link_kind(std::string_view name);

/// X ~ N(0, 1), S(x) = 2 Phi(|x|) - 1 (even, uniform on [0, 1), single zero at
/// x = 0), Q = h(S) for x > 0, g(S) for x < 0 and S(0) at 0.
class LinkSimulator1D {
 public:
  /// Throws std::invalid_argument when h leaves [2s - 1, 2s] on [0, 1].
  explicit LinkSimulator1D(LinkKind link);

  LinkKind link() const { return link_; }
  double h(double s) const;
  double g(double s) const { return 2.0 * s - h(s); }
  double score(double x) const;
  double posterior(double x) const;
  /// h keeps Q on the same side of 1/2 as S for every s.
  bool accuracy_preserving() const;

 private:
  LinkKind link_;
};

enum class PsiKind {
  Sigmoid,  // 2 / (1 + e^-z) - 1
  Sign,
  Zero,
};

std::string to_string(PsiKind kind);
PsiKind parse_psi_kind(std::string_view name);

/// Monotone map applied to the calibrated score before it is reported.
struct Distortion {
  enum class Kind { None, Power, LogitScale } kind = Kind::None;
  double parameter = 1.0;  // exponent, or logit multiplier

  double apply(double s) const;
};

/// S = sigmoid(w^T x), Q = S + psi(w_perp^T x) * D(S) with
/// D(S) = min(S, 1 - S), or min(S, 1 - S, |1/2 - S|) when accuracy preserving.
/// X ~ N(0, Sigma) where Sigma has eigenvalues sigma_eigenvalues[0] along w,
/// [1] along w_perp, and the remaining entries (default 1) on a completion.
class RealisticSimulator {
 public:
  struct Config {
    std::size_t d = 2;
    std::vector<double> omega{1.0, 0.0};
    std::vector<double> omega_perp{0.0, 1.0};
    PsiKind psi = PsiKind::Sigmoid;
    bool accuracy_preserving = false;
    std::vector<double> sigma_eigenvalues{1.0, 1.0};
    Distortion distortion{};
  };

  /// Throws std::invalid_argument on a bad dimension, w^T w_perp != 0, a
  /// zero direction or a negative eigenvalue.
  explicit RealisticSimulator(Config config);

  const Config& config() const { return config_; }
  /// Calibrated score before distortion.
  double calibrated_score(std::span<const double> x) const;
  double posterior(std::span<const double> x) const;
  /// Eigenvector basis, row i has eigenvalue scale()[i].
  const Matrix& basis() const { return basis_; }
  const std::vector<double>& scale() const { return scale_; }

 private:
  Config config_;
  Matrix basis_;
  std::vector<double> scale_;  // square roots of the eigenvalues
};

using SimulatorSpec = std::variant<LinkSimulator1D, RealisticSimulator>;

/// JSON keys: kind ("realistic" | "link1d"), d, omega, omega_perp, psi,
/// accuracy_preserving, sigma_eigenvalues, link, distortion. Missing keys take
/// the defaults above. Throws std::invalid_argument on a bad spec.
SimulatorSpec parse_simulator_spec(std::string_view json_text);
std::string simulator_spec_json(const SimulatorSpec& spec);

struct SimulatedData {
  BinaryView view;          // reported scores, drawn labels, features
  std::vector<double> q;    // oracle posterior
  std::uint64_t seed = 0;
};

/// Rows are drawn in blocks of `kSimulationBlock` with per-block seeds, so the
/// output does not depend on the thread count.
inline constexpr std::size_t kSimulationBlock = 65536;

SimulatedData sample(const SimulatorSpec& spec, std::size_t n, std::uint64_t seed);
SimulatedData sample_realistic(const RealisticSimulator& sim, std::size_t n, std::uint64_t seed);
SimulatedData sample_link_1d(const LinkSimulator1D& sim, std::size_t n, std::uint64_t seed);

/// GL and CL of (scores, q) from equal-width score strata: within each
/// stratum C is the mean of q. Strata with fewer than two rows are dropped.
/// With `sampled` set and a Brier rule, each stratum's variance gets the
/// m / (m - 1) correction for rows drawn from the conditional law.
struct StrataLosses {
  double gl = 0.0;
  double cl = 0.0;
};
StrataLosses strata_losses(std::span<const double> scores, std::span<const double> q, const ScoringRule& rule,
                           std::size_t n_strata, bool sampled = false);

struct OracleSummary {
  double gl_true = 0.0;
  double gl_se = 0.0;
  double cl_true = 0.0;
  double cl_se = 0.0;
  double gl_refined = 0.0;  // with four times as many strata
  bool converged = false;   // |gl_refined - gl_true| < gl_se
  std::size_t n_mc = 0;
  std::size_t n_strata = 0;
};

/// Monte-Carlo oracle on n_mc fresh rows; SE from 20 bootstrap resamples.
OracleSummary true_gl_monte_carlo(const SimulatorSpec& spec, const ScoringRule& rule, std::size_t n_mc,
                                  std::uint64_t seed, std::size_t n_strata = 1000);
OracleSummary oracle_from_sample(std::span<const double> scores, std::span<const double> q,
                                 const ScoringRule& rule, std::uint64_t seed, std::size_t n_strata = 1000);

/// Same-side property: Q >= 1/2 when S >= 1/2 and Q <= 1/2 otherwise.
bool same_side(double s, double q);

}  // namespace grouploss
