#include "nodal/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/tools/minima.hpp>

#include "nodal/errors.hpp"
#include "nodal/rng.hpp"

namespace nodal {

void parallel_for_index(std::size_t n, std::size_t workers,
                        const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  constexpr std::size_t kChunk = 64;

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = n;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (i < failed_index) {
            failed_index = i;
            failure = std::current_exception();
          }
          break;
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (!failure) return;
  try {
    std::rethrow_exception(failure);
  } catch (const Error& e) {
    throw Error(e.code(), "sample " + std::to_string(failed_index) + ": " + e.detail());
  }
}

double binomial_se(double p, std::size_t n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

MomentEstimates summarize_counts(std::span<const int> counts, std::uint64_t seed,
                                 std::size_t suspicious) {
  if (counts.empty()) throw Error(ErrorCode::InvalidArgument, "no samples");
  MomentEstimates est;
  est.n_samples = counts.size();
  est.seed = seed;
  est.suspicious = suspicious;
  const double n = static_cast<double>(counts.size());

  double sum = 0.0;
  double sum_ff = 0.0;
  std::size_t zeros = 0;
  for (int k : counts) {
    sum += k;
    sum_ff += static_cast<double>(k) * (k - 1);
    if (k == 0) ++zeros;
    ++est.histogram[k];
  }
  const double mean = sum / n;
  const double ff_mean = sum_ff / n;

  double m2 = 0.0;
  double m4 = 0.0;
  double ff_sq = 0.0;
  for (int k : counts) {
    const double d = k - mean;
    m2 += d * d;
    m4 += d * d * d * d;
    const double e = static_cast<double>(k) * (k - 1) - ff_mean;
    ff_sq += e * e;
  }
  const double var_sample = counts.size() > 1 ? m2 / (n - 1.0) : 0.0;
  m2 /= n;
  m4 /= n;

  est.mean = {mean, std::sqrt(var_sample / n)};
  est.second_factorial = {ff_mean,
                          counts.size() > 1 ? std::sqrt(ff_sq / (n - 1.0) / n) : 0.0};
  est.variance = {var_sample, std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
  const double p = static_cast<double>(zeros) / n;
  est.persistence = {p, binomial_se(p, counts.size())};
  return est;
}

SampleCounts sample_counts(const SpectralMeasure& mu, const ExperimentConfig& config,
                           std::optional<std::size_t> stop_after) {
  if (config.n_samples == 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  const WaveSampler sampler(mu, config.convention);
  const DirectionU u = DirectionU::raw(config.u);
  ZeroCountOptions opts;
  opts.grid_step = config.grid_step;
  opts.stop_after = stop_after;
  // A persistence run only needs to know that some zero exists.
  opts.refine = !stop_after.has_value();

  SampleCounts out;
  out.counts.assign(config.n_samples, 0);
  std::vector<unsigned char> flagged(config.n_samples, 0);
  parallel_for_index(config.n_samples, config.workers, [&](std::size_t i) {
    Rng rng = make_stream(config.seed, i);
    const PlanarField field = sampler(rng);
    const auto res = count_zeros(LineProcess(field, u, config.L), opts);
    out.counts[i] = static_cast<int>(res.count);
    flagged[i] = res.suspicious ? 1 : 0;
  });
  out.suspicious = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
  return out;
}

MomentEstimates estimate(const SpectralMeasure& mu, const ExperimentConfig& config) {
  const auto s = sample_counts(mu, config);
  return summarize_counts(s.counts, config.seed, s.suspicious);
}

Estimate estimate_persistence(const SpectralMeasure& mu, const ExperimentConfig& config) {
  const auto s = sample_counts(mu, config, 1);
  const auto zeros = static_cast<std::size_t>(std::count(s.counts.begin(), s.counts.end(), 0));
  const double p = static_cast<double>(zeros) / static_cast<double>(config.n_samples);
  return {p, binomial_se(p, config.n_samples)};
}

std::vector<SweepRow> persistence_sweep(const SpectralMeasure& mu, const ExperimentConfig& config,
                                        SweepParameter parameter,
                                        std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "sweep list is empty");
  std::vector<SweepRow> rows;
  for (double v : values) {
    ExperimentConfig c = config;
    if (parameter == SweepParameter::Length)
      c.L = v;
    else
      c.u = v;
    SweepRow row;
    row.parameter = v;
    row.persistence = estimate_persistence(mu, c);
    row.zero = row.persistence.value == 0.0;
    row.rule_of_three = 3.0 / static_cast<double>(c.n_samples);
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "slope needs at least two paired points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error(ErrorCode::InvalidArgument, "log-log slope needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorCode::InvalidArgument, "degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

double dominance_lower_bound(const ProjectedMeasure& rho) {
  double p0 = 0.0;
  double root_sum = 0.0;
  int others = 0;
  // Atoms at ±x belong to the same amplitude; sum √(w(x) + w(−x)) over x > 0.
  const auto atoms = rho.atoms();
  for (const auto& a : atoms) {
    if (a.position == 0.0) {
      p0 += a.weight;
    } else if (a.position > 0.0) {
      double w = a.weight;
      for (const auto& b : atoms)
        if (std::fabs(b.position + a.position) <= kProjectionMergeTol) w += b.weight;
      root_sum += std::sqrt(w);
      ++others;
    }
  }
  if (p0 == 0.0) return 0.0;
  if (others == 0) return 1.0;
  // P(√p_j R_j < s√p_j/S for all j) · P(√p₀|b₀| > s), with S = Σ√p_j.
  auto neg_log_bound = [&](double s) {
    const double q = s * s / (2.0 * root_sum * root_sum);
    return -(others * std::log(-std::expm1(-q)) + std::log(std::erfc(s / std::sqrt(2.0 * p0))));
  };
  const double hi = 10.0 * (root_sum + std::sqrt(p0));
  const auto [s_best, value] = boost::math::tools::brent_find_minima(neg_log_bound, 1e-9, hi, 52);
  (void)s_best;
  return std::exp(-value);
}

std::vector<PointMassRow> point_mass_persistence_check(std::span<const std::int64_t> ms, double u,
                                                       std::span<const double> lengths,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::size_t workers) {
  std::vector<PointMassRow> rows;
  for (std::int64_t m : ms) {
    const auto circle = enumerate_lattice_points(m);
    const auto mu = spectral_measure_of(circle);
    const bool has_atom = std::any_of(mu.atoms().begin(), mu.atoms().end(), [&](const Atom& a) {
      const double r = std::fmod(angular_distance(a.angle, u), kHalfPi);
      return std::min(r, kHalfPi - r) <= 1e-9;
    });
    if (!has_atom)
      throw Error(ErrorCode::NoAtom,
                  "lattice measure of m = " + std::to_string(m) + " has no atom at direction " +
                      std::to_string(u));
    const double bound = dominance_lower_bound(project(mu, DirectionU::raw(u)));
    for (double L : lengths) {
      ExperimentConfig c;
      c.convention = FrequencyConvention::two_pi();
      c.u = u;
      c.L = L;
      c.n_samples = n_samples;
      c.seed = seed;
      c.workers = workers;
      PointMassRow row;
      row.m = m;
      row.r2 = circle.r2();
      row.L = L;
      row.persistence = estimate_persistence(mu, c);
      row.dominance_bound = bound;
      row.neg_log_per_r2 = row.persistence.value > 0.0
                               ? -std::log(row.persistence.value) / static_cast<double>(row.r2)
                               : std::numeric_limits<double>::infinity();
      rows.push_back(row);
    }
  }
  return rows;
}

GoodnessReport compare_distribution(const std::map<int, std::size_t>& histogram,
                                    std::size_t n_samples, const CountDistribution& exact) {
  if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "no samples");
  GoodnessReport rep;
  const double n = static_cast<double>(n_samples);
  std::map<int, double> exact_map;
  for (const auto& [k, p] : exact.support) exact_map[k] = p;
  for (const auto& [k, c] : histogram) rep.empirical[k] = static_cast<double>(c) / n;

  std::map<int, double> keys;
  for (const auto& [k, p] : exact_map) keys[k] = 0.0;
  for (const auto& [k, p] : rep.empirical) keys[k] = 0.0;
  double tv = 0.0;
  bool outside_support = false;
  for (const auto& [k, unused] : keys) {
    const double pe = rep.empirical.count(k) ? rep.empirical.at(k) : 0.0;
    const double px = exact_map.count(k) ? exact_map.at(k) : 0.0;
    tv += std::fabs(pe - px);
    if (px == 0.0 && pe > 0.0) outside_support = true;
  }
  rep.total_variation = 0.5 * tv;

  if (outside_support) {
    rep.chi_square = std::numeric_limits<double>::infinity();
    rep.degrees_of_freedom = static_cast<int>(exact_map.size()) - 1;
    rep.p_value = 0.0;
    rep.pass = false;
    return rep;
  }

  // Pool adjacent bins until each expects at least 5 observations.
  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double obs = 0.0;
  double expct = 0.0;
  for (const auto& [k, p] : exact_map) {
    obs += histogram.count(k) ? static_cast<double>(histogram.at(k)) : 0.0;
    expct += n * p;
    if (expct >= 5.0) {
      bins.emplace_back(obs, expct);
      obs = expct = 0.0;
    }
  }
  if (expct > 0.0 || obs > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(obs, expct);
    } else {
      bins.back().first += obs;
      bins.back().second += expct;
    }
  }
  rep.degrees_of_freedom = static_cast<int>(bins.size()) - 1;
  if (rep.degrees_of_freedom < 1) {
    rep.chi_square = 0.0;
    rep.p_value = 1.0;
    rep.pass = true;
    return rep;
  }
  double chi = 0.0;
  for (const auto& [o, e] : bins) chi += (o - e) * (o - e) / e;
  rep.chi_square = chi;
  boost::math::chi_squared_distribution<double> dist(rep.degrees_of_freedom);
  rep.p_value = boost::math::cdf(boost::math::complement(dist, chi));
  rep.pass = rep.p_value >= 0.001;
  return rep;
}

GoodnessReport distribution_compare(const SpectralMeasure& mu, const ExperimentConfig& config,
                                    const CountDistribution& exact) {
  const auto est = estimate(mu, config);
  return compare_distribution(est.histogram, est.n_samples, exact);
}

}  // namespace nodal
