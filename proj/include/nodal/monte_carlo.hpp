#pragma once

// Reproducible Monte Carlo estimation of zero-count statistics. Sample i
// always uses stream_seed(seed, i) and results are reduced in index order,
// so every output is independent of the worker count.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nodal/gaussian_fields.hpp"
#include "nodal/zero_counter.hpp"

namespace nodal {

// Calls fn(i) for i in [0, n) on up to `workers` threads. If any call throws
// a nodal::Error, the one with the smallest index is rethrown with the
// index prepended.
void parallel_for_index(std::size_t n, std::size_t workers,
                        const std::function<void(std::size_t)>& fn);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct MomentEstimates {
  Estimate mean;
  Estimate second_factorial;
  Estimate variance;
  Estimate persistence;
  std::map<int, std::size_t> histogram;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t suspicious = 0;

  bool persistence_is_zero() const noexcept { return persistence.value == 0.0; }
  // 3/n upper bound reported when no persistent sample was seen.
  double rule_of_three() const noexcept { return 3.0 / static_cast<double>(n_samples); }
};

MomentEstimates summarize_counts(std::span<const int> counts, std::uint64_t seed,
                                 std::size_t suspicious = 0);

// One experiment on a fixed measure; `u` is used as given (callers reduce).
struct ExperimentConfig {
  FrequencyConvention convention = FrequencyConvention::two_pi();
  double u = 0.0;
  double L = 1.0;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  std::optional<double> grid_step;
  std::size_t workers = 1;
};

// Per-sample zero counts, index-aligned with the sample streams.
struct SampleCounts {
  std::vector<int> counts;
  std::size_t suspicious = 0;
};

SampleCounts sample_counts(const SpectralMeasure& mu, const ExperimentConfig& config,
                           std::optional<std::size_t> stop_after = std::nullopt);

MomentEstimates estimate(const SpectralMeasure& mu, const ExperimentConfig& config);

// Persistence only; stops scanning each sample at its first zero.
Estimate estimate_persistence(const SpectralMeasure& mu, const ExperimentConfig& config);

// Binomial standard error √(p(1−p)/n).
double binomial_se(double p, std::size_t n);

enum class SweepParameter { Length, Direction };

struct SweepRow {
  double parameter = 0.0;
  Estimate persistence;
  bool zero = false;
  double rule_of_three = 0.0;
};

// Rows in the order of `values`; each row reuses config.seed.
std::vector<SweepRow> persistence_sweep(const SpectralMeasure& mu, const ExperimentConfig& config,
                                        SweepParameter parameter,
                                        std::span<const double> values);

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct PointMassRow {
  std::int64_t m = 0;
  std::size_t r2 = 0;
  double L = 0.0;
  Estimate persistence;
  // L-independent lower bound from the event that the constant mode dominates
  // the sum of all other amplitudes.
  double dominance_bound = 0.0;
  double neg_log_per_r2 = 0.0;  // −log(persistence)/r₂, infinite if 0
};

// Throws NoAtom unless the lattice measure of every m has an atom at angle
// u modulo π/2. Uses the 2π convention.
std::vector<PointMassRow> point_mass_persistence_check(std::span<const std::int64_t> ms, double u,
                                                       std::span<const double> lengths,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::size_t workers);

// Lower bound on P(no zero) for the restriction of a wave with projected
// measure rho: P(√p₀|b₀| > Σ √p_j R_j). Zero if rho has no atom at 0.
double dominance_lower_bound(const ProjectedMeasure& rho);

struct GoodnessReport {
  double total_variation = 0.0;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
  bool pass = false;  // p_value ≥ 0.001
  std::map<int, double> empirical;
};

GoodnessReport compare_distribution(const std::map<int, std::size_t>& histogram,
                                    std::size_t n_samples, const CountDistribution& exact);

// Runs `config` on mu and compares the count histogram with `exact`, usually
// exact_distribution(u, L) for the Cilleruelo field.
GoodnessReport distribution_compare(const SpectralMeasure& mu, const ExperimentConfig& config,
                                    const CountDistribution& exact);

}  // namespace nodal
