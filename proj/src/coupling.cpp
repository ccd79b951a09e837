#include "nodal/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nodal/errors.hpp"
#include "nodal/rng.hpp"
#include "nodal/zero_counter.hpp"

namespace nodal {

std::array<double, 4> CoupledPair::aggregated() const {
  const auto t = f.terms();
  return {t[0].b, t[0].c, t[1].b, t[1].c};
}

CoupledPair couple(const PlanarField& g, double eps) {
  if (!(eps >= 0.0) || eps >= kQuarterPi)
    throw Error(ErrorCode::InvalidArgument, "eps must lie in [0, pi/4)");
  std::array<double, 2> b{0.0, 0.0};
  std::array<double, 2> c{0.0, 0.0};
  std::vector<int> axis;
  axis.reserve(g.terms().size());
  for (const auto& t : g.terms()) {
    const double a = canonical_angle(std::atan2(t.direction.y, t.direction.x));
    const int k = static_cast<int>(std::lround(a / kHalfPi)) % 4;
    if (angular_distance(a, k * kHalfPi) > eps + 1e-12)
      throw Error(ErrorCode::NotCillerueloType,
                  "term at angle " + std::to_string(a) + " is farther than eps from every axis");
    axis.push_back(k);
    // Directions near −e are e with the sine coefficient negated.
    const double scale = std::sqrt(2.0 * t.p);
    const double sign = k >= 2 ? -1.0 : 1.0;
    b[k % 2] += scale * t.b;
    c[k % 2] += sign * scale * t.c;
  }
  PlanarField f({{0.0, {1.0, 0.0}, 0.5, b[0], c[0]}, {kHalfPi, {0.0, 1.0}, 0.5, b[1], c[1]}},
                g.convention());
  return {g, std::move(f), eps, std::move(axis)};
}

namespace {

double amplitude_sum(const PlanarField& g) {
  double s = 0.0;
  for (const auto& t : g.terms()) s += std::sqrt(t.p) * (std::fabs(t.b) + std::fabs(t.c));
  return s;
}

}  // namespace

double lipschitz_difference_bound(const CoupledPair& pair, double R) {
  const double w = pair.g.convention().omega();
  return w * pair.eps * R * amplitude_sum(pair.g);
}

double lipschitz_gradient_bound(const CoupledPair& pair, double R) {
  const double w = pair.g.convention().omega();
  return amplitude_sum(pair.g) * w * pair.eps * (w * R + 1.0);
}

DifferenceReport difference_sup_norm(const CoupledPair& pair, double R, double grid_step) {
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  if (!(grid_step > 0.0) || grid_step > 0.1 + 1e-15)
    throw Error(ErrorCode::InvalidArgument, "grid_step must lie in (0, 0.1]");
  const double w = pair.g.convention().omega();

  // G − F as one trigonometric sum.
  struct Term {
    Vec2 d;
    double cos_amp;
    double sin_amp;
  };
  std::vector<Term> terms;
  for (const auto& t : pair.g.terms())
    terms.push_back({t.direction, std::sqrt(t.p) * t.b, std::sqrt(t.p) * t.c});
  for (const auto& t : pair.f.terms())
    terms.push_back({t.direction, -std::sqrt(t.p) * t.b, -std::sqrt(t.p) * t.c});

  const auto half = static_cast<long>(std::floor(R / grid_step));
  const std::size_t n = 2 * static_cast<std::size_t>(half) + 1;
  std::vector<double> coord(n);
  for (std::size_t i = 0; i < n; ++i) coord[i] = (static_cast<long>(i) - half) * grid_step;

  const std::size_t nt = terms.size();
  std::vector<double> cx(nt * n), sx(nt * n), cy(nt * n), sy(nt * n);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = w * terms[j].d.x * coord[i];
      const double ay = w * terms[j].d.y * coord[i];
      cx[j * n + i] = std::cos(ax);
      sx[j * n + i] = std::sin(ax);
      cy[j * n + i] = std::cos(ay);
      sy[j * n + i] = std::sin(ay);
    }
  }

  DifferenceReport rep;
  rep.R = R;
  rep.grid_step = grid_step;
  std::vector<double> alpha(nt), beta(nt);
  const double r2 = R * R;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = coord[k];
    for (std::size_t j = 0; j < nt; ++j) {
      const double c = cy[j * n + k];
      const double s = sy[j * n + k];
      // cos(a+b) and sin(a+b) expanded so the row reduces to Σ α cos a + β sin a.
      alpha[j] = terms[j].cos_amp * c + terms[j].sin_amp * s;
      beta[j] = terms[j].sin_amp * c - terms[j].cos_amp * s;
    }
    const double xmax2 = r2 - y * y;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = coord[i];
      if (x * x > xmax2) continue;
      double v = 0.0;
      for (std::size_t j = 0; j < nt; ++j) v += alpha[j] * cx[j * n + i] + beta[j] * sx[j * n + i];
      if (std::fabs(v) > rep.sup_norm) {
        rep.sup_norm = std::fabs(v);
        rep.argmax = {x, y};
      }
    }
  }
  rep.log_threshold = 2.0 * pair.eps * R * std::log(R);
  rep.square_threshold = 2.0 * pair.eps * R * R;
  rep.log_exceeded = rep.sup_norm >= rep.log_threshold;
  rep.square_exceeded = rep.sup_norm >= rep.square_threshold;
  return rep;
}

double field_covariance(const PlanarField& field, Vec2 lag) {
  const double w = field.convention().omega();
  double s = 0.0;
  for (const auto& t : field.terms()) s += t.p * std::cos(w * dot(lag, t.direction));
  return s;
}

PlanarField random_cilleruelo_type(std::size_t M, double eps, Rng& rng) {
  if (M == 0) throw Error(ErrorCode::InvalidArgument, "M must be >= 1");
  std::uniform_real_distribution<double> uniform(-eps, eps);
  std::vector<double> phis(M);
  for (auto& p : phis) p = uniform(rng);
  return cilleruelo_type_field(phis, eps, rng);
}

std::vector<TailRow> coupling_tail_experiment(double eps, std::size_t M,
                                              std::span<const double> radii,
                                              std::size_t n_samples, std::uint64_t seed,
                                              std::size_t workers, double grid_step) {
  if (n_samples == 0 || radii.empty())
    throw Error(ErrorCode::InvalidArgument, "need samples and radii");
  const std::size_t nr = radii.size();
  std::vector<double> sup(n_samples * nr);
  std::vector<unsigned char> log_hit(n_samples * nr), sq_hit(n_samples * nr),
      lip_fail(n_samples * nr);
  parallel_for_index(n_samples, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    const auto pair = couple(random_cilleruelo_type(M, eps, rng), eps);
    for (std::size_t r = 0; r < nr; ++r) {
      const auto rep = difference_sup_norm(pair, radii[r], grid_step);
      sup[i * nr + r] = rep.sup_norm;
      log_hit[i * nr + r] = rep.log_exceeded;
      sq_hit[i * nr + r] = rep.square_exceeded;
      lip_fail[i * nr + r] = rep.sup_norm > lipschitz_difference_bound(pair, radii[r]);
    }
  });
  std::vector<TailRow> rows;
  const double n = static_cast<double>(n_samples);
  for (std::size_t r = 0; r < nr; ++r) {
    TailRow row;
    row.R = radii[r];
    row.n_samples = n_samples;
    double log_count = 0.0, sq_count = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      total += sup[i * nr + r];
      log_count += log_hit[i * nr + r];
      sq_count += sq_hit[i * nr + r];
      row.lipschitz_failures += lip_fail[i * nr + r];
    }
    row.log_exceedance = {log_count / n, binomial_se(log_count / n, n_samples)};
    row.square_exceedance = {sq_count / n, binomial_se(sq_count / n, n_samples)};
    row.mean_sup = total / n;
    row.mean_sup_over_eps_r = row.mean_sup / (eps * row.R);
    row.mean_sup_over_eps_r_log_r = row.mean_sup / (eps * row.R * std::log(row.R));
    rows.push_back(row);
  }
  return rows;
}

KernelGapReport kernel_gap_check(double eps, std::size_t M, double R, std::size_t n_pairs,
                                 std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  const auto pair = couple(random_cilleruelo_type(M, eps, rng), eps);
  const double w = pair.g.convention().omega();
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  auto point = [&] {
    const double r = R * std::sqrt(radius(rng));
    return r * Vec2::polar(angle(rng));
  };
  KernelGapReport rep;
  rep.pairs = n_pairs;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const Vec2 x = point();
    const Vec2 y = point();
    const Vec2 d = x - y;
    const double gap = std::fabs(field_covariance(pair.g, d) - field_covariance(pair.f, d));
    const double bound = 2.0 * w * eps * std::max(norm(x), norm(y));
    rep.max_gap = std::max(rep.max_gap, gap);
    if (bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, gap / bound);
    if (gap > bound) ++rep.violations;
  }
  return rep;
}

double anderson_darling_standard_normal(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  // log Φ(z) and log(1 − Φ(z)) through erfc to keep the tails accurate.
  auto log_cdf = [](double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); };
  auto log_sf = [](double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); };
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = 2.0 * static_cast<double>(i + 1) - 1.0;
    s += weight * (log_cdf(x[i]) + log_sf(x[n - 1 - i]));
  }
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

bool AggregateReport::normal() const {
  return std::all_of(anderson_darling.begin(), anderson_darling.end(),
                     [](double a) { return a < kCritical001; });
}

AggregateReport aggregated_coefficient_check(double eps, std::size_t M, std::size_t n,
                                             std::uint64_t seed, std::size_t workers) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two couplings");
  std::vector<std::array<double, 4>> coeffs(n);
  parallel_for_index(n, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    coeffs[i] = couple(random_cilleruelo_type(M, eps, rng), eps).aggregated();
  });
  AggregateReport rep;
  rep.n = n;
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = coeffs[i][k];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= nn;
    double m2 = 0.0, m4 = 0.0;
    for (double v : col) {
      const double d = v - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (nn - 1.0);
    m2 /= nn;
    m4 /= nn;
    rep.variance[k] = {var, std::sqrt(std::max(0.0, m4 - m2 * m2) / nn)};
    rep.anderson_darling[k] = anderson_darling_standard_normal(col);
  }
  return rep;
}

namespace {

struct TransferSample {
  unsigned char g_zero = 0;
  unsigned char f_zero = 0;
  unsigned char tie = 0;
  unsigned char tie_unscaled = 0;
  unsigned char sup = 0;
  unsigned char dominant = 0;
  unsigned char implication_failure = 0;
};

bool has_no_zero(const LineProcess& proc) {
  ZeroCountOptions opts;
  opts.stop_after = 1;
  opts.refine = false;
  return count_zeros(proc, opts).count == 0;
}

Estimate frequency(const std::vector<TransferSample>& s, unsigned char TransferSample::*field) {
  std::size_t hits = 0;
  for (const auto& x : s) hits += x.*field;
  const double p = static_cast<double>(hits) / static_cast<double>(s.size());
  return {p, binomial_se(p, s.size())};
}

}  // namespace

TransferReport persistence_transfer_experiment(double eps, double u, double L,
                                               std::size_t n_samples, std::uint64_t seed,
                                               std::size_t workers, std::size_t M) {
  if (!(L > 1.0)) throw Error(ErrorCode::InvalidArgument, "L must exceed 1");
  if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  const bool axis = u == 0.0;
  if (!axis && L * std::sin(u) < kTwoPi)
    throw Error(ErrorCode::RegimeViolation, "L sin(u) = " + std::to_string(L * std::sin(u)) +
                                                " is below 2 pi");
  const double T = 2.0 * eps * L * std::log(L);
  const DirectionU dir = DirectionU::raw(u);
  const double h = 0.1;

  std::vector<TransferSample> samples(n_samples);
  parallel_for_index(n_samples, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    const auto pair = couple(random_cilleruelo_type(M, eps, rng), eps);
    TransferSample s;
    s.g_zero = has_no_zero(LineProcess(pair.g, dir, L));
    s.f_zero = has_no_zero(LineProcess(pair.f, dir, L));
    const auto [b1, c1, b2, c2] = pair.aggregated();
    const double a1 = std::hypot(b1, c1);
    const double a2 = std::hypot(b2, c2);
    // Upper bound on the true sup over B_L; the event is that it exceeds T.
    const double lip = lipschitz_difference_bound(pair, L);
    if (lip > T) {
      const auto rep = difference_sup_norm(pair, L, h);
      s.sup = rep.sup_norm + h * lipschitz_gradient_bound(pair, L) > T;
    }
    if (axis) {
      // Along x₂ = 0 the field F is √2/2 (b₁ cos t + c₁ sin t + b₂).
      const double margin = kSqrt2 / 2.0 * (std::fabs(b2) - a1);
      s.dominant = margin > T;
      s.tie = margin > 0.0 && margin <= T;
      s.implication_failure = s.dominant && !s.sup && !s.g_zero;
    } else {
      s.tie = kSqrt2 / 2.0 * std::fabs(a1 - a2) <= T;
      s.implication_failure = s.g_zero && !s.tie && !s.sup;
    }
    s.tie_unscaled = std::fabs(a1 - a2) <= T;
    samples[i] = s;
  });

  TransferReport rep;
  rep.eps = eps;
  rep.u = u;
  rep.L = L;
  rep.M = M;
  rep.n = n_samples;
  rep.threshold = T;
  rep.g_persistence = frequency(samples, &TransferSample::g_zero);
  rep.f_persistence = frequency(samples, &TransferSample::f_zero);
  rep.tie = frequency(samples, &TransferSample::tie);
  rep.tie_unscaled = frequency(samples, &TransferSample::tie_unscaled);
  rep.tie_oracle = std::sqrt(kPi) * eps * L * std::log(L);
  rep.sup_exceeded = frequency(samples, &TransferSample::sup);
  rep.dominant = frequency(samples, &TransferSample::dominant);
  for (const auto& s : samples) rep.implication_failures += s.implication_failure;

  const double slack = 3.0 * std::sqrt(rep.g_persistence.se * rep.g_persistence.se +
                                       rep.tie.se * rep.tie.se +
                                       rep.sup_exceeded.se * rep.sup_exceeded.se);
  if (axis) {
    const double lower = 1.0 - kSqrt2 / 2.0 - rep.tie.value - rep.sup_exceeded.value;
    rep.inequality_holds = rep.g_persistence.value >= lower - slack;
  } else {
    rep.inequality_holds =
        rep.g_persistence.value <= rep.tie.value + rep.sup_exceeded.value + slack;
  }
  return rep;
}

}  // namespace nodal
