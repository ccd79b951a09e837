#pragma once

// Coupling of a Cilleruelo-type field G with a Cilleruelo field F built from
// G's own coefficients, and experiments on the difference G − F.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nodal/gaussian_fields.hpp"
#include "nodal/monte_carlo.hpp"

namespace nodal {

struct CoupledPair {
  PlanarField g;
  PlanarField f;
  double eps;
  // Nearest axis direction k (angle kπ/2) of every term of g.
  std::vector<int> axis_of_term;

  // F's coefficients (B₁, C₁, B₂, C₂) at directions (1,0) and (0,1).
  std::array<double, 4> aggregated() const;
  double difference(Vec2 x) const { return g.evaluate(x) - f.evaluate(x); }
};

// Groups every term of g onto its nearest axis direction; terms near π and
// 3π/2 join the (1,0) and (0,1) groups with the sine coefficient negated.
// F's aggregated coefficient is Σ √(2p_j)·b_j, so F has unit variance when
// G does. Throws NotCillerueloType if a term lies farther than eps from
// every axis.
CoupledPair couple(const PlanarField& g, double eps);

// Deterministic per-realisation bound ω·eps·R·Σ √p_j(|b_j| + |c_j|) on
// sup_{|x|≤R} |G(x) − F(x)|.
double lipschitz_difference_bound(const CoupledPair& pair, double R);

// Bound on the gradient of G − F over |x| ≤ R.
double lipschitz_gradient_bound(const CoupledPair& pair, double R);

struct DifferenceReport {
  double R = 0.0;
  double grid_step = 0.0;
  double sup_norm = 0.0;
  Vec2 argmax;
  double log_threshold = 0.0;     // 2 eps R log R
  double square_threshold = 0.0;  // 2 eps R²
  bool log_exceeded = false;
  bool square_exceeded = false;
};

// Max of |G − F| over grid points of step grid_step (≤ 0.1) inside B_R.
DifferenceReport difference_sup_norm(const CoupledPair& pair, double R, double grid_step = 0.1);

// Covariance of a field at lag d: Σ p cos(ω⟨d, y⟩).
double field_covariance(const PlanarField& field, Vec2 lag);

// Draws M angles uniformly in [−eps, eps] and then a Cilleruelo-type field,
// all from `rng`.
PlanarField random_cilleruelo_type(std::size_t M, double eps, Rng& rng);

struct TailRow {
  double R = 0.0;
  Estimate log_exceedance;     // P(sup ≥ 2εR log R)
  Estimate square_exceedance;  // P(sup ≥ 2εR²)
  double mean_sup = 0.0;
  double mean_sup_over_eps_r = 0.0;
  double mean_sup_over_eps_r_log_r = 0.0;
  std::size_t lipschitz_failures = 0;
  std::size_t n_samples = 0;
};

std::vector<TailRow> coupling_tail_experiment(double eps, std::size_t M,
                                              std::span<const double> radii,
                                              std::size_t n_samples, std::uint64_t seed,
                                              std::size_t workers, double grid_step = 0.1);

struct KernelGapReport {
  std::size_t pairs = 0;
  double max_gap = 0.0;        // max |K_G − K_F|
  double max_ratio = 0.0;      // max |K_G − K_F| / (2 eps max(|x|,|y|))
  std::size_t violations = 0;  // pairs with ratio > 1
};

KernelGapReport kernel_gap_check(double eps, std::size_t M, double R, std::size_t n_pairs,
                                 std::uint64_t seed);

struct AggregateReport {
  std::size_t n = 0;
  std::array<Estimate, 4> variance;  // sample variance with SE, per coefficient
  std::array<double, 4> anderson_darling;
  static constexpr double kCritical001 = 5.97;
  bool normal() const;
};

AggregateReport aggregated_coefficient_check(double eps, std::size_t M, std::size_t n,
                                             std::uint64_t seed, std::size_t workers);

// Anderson–Darling A² against the fully specified N(0, 1).
double anderson_darling_standard_normal(std::span<const double> sample);

struct TransferReport {
  double eps = 0.0;
  double u = 0.0;
  double L = 0.0;
  std::size_t M = 0;
  std::size_t n = 0;
  double threshold = 0.0;  // T = 2 eps L log L
  Estimate g_persistence;
  Estimate f_persistence;
  // u ≠ 0: F's crossing-line margin (√2/2)|A₁ − A₂| is at most T.
  // u = 0: F's constant-term margin (√2/2)(|B₂| − A₁) lies in (0, T].
  Estimate tie;
  // |A₁ − A₂| ≤ T, the amplitude form without the √2/2 factor.
  Estimate tie_unscaled;
  double tie_oracle = 0.0;  // √π·eps·L·log L
  // Conservative sup-norm event: an upper bound on sup |G − F| over B_L
  // (the smaller of the Lipschitz bound and grid sup plus gradient slack)
  // exceeds T.
  Estimate sup_exceeded;
  // u = 0 only: F's constant term dominates with margin above T.
  Estimate dominant;
  std::size_t implication_failures = 0;
  bool inequality_holds = false;
};

// u ≠ 0 requires L sin u ≥ 2π (RegimeViolation otherwise) and checks that
// every persistent G sample lies in tie ∪ sup_exceeded, and
// P(Z_g = 0) ≤ P(tie) + P(sup_exceeded) + 3 se. For u = 0 it checks that
// dominant ∧ ¬sup_exceeded implies Z_g = 0 and
// P(Z_g = 0) ≥ 1 − √2/2 − P(F margin ≤ T) − P(sup_exceeded) − 3 se.
TransferReport persistence_transfer_experiment(double eps, double u, double L,
                                               std::size_t n_samples, std::uint64_t seed,
                                               std::size_t workers, std::size_t M = 4);

}  // namespace nodal
