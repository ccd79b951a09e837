#include "nodal/kac_rice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "nodal/errors.hpp"

namespace nodal {

KacRiceContext::KacRiceContext(CovarianceKernel1D kernel)
    : kernel_(std::move(kernel)), m_(kernel_.second_spectral_moment()) {
  if (!(m_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel has zero second moment");
}

double expected_zero_count(const KacRiceContext& ctx, double L) {
  if (!(L >= 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be nonnegative");
  return std::sqrt(ctx.M()) * L / kPi;
}

namespace {

double arcsine_factor(double rho) {
  return std::sqrt(std::max(0.0, 1.0 - rho * rho)) + rho * std::asin(rho);
}

void check_lag(const KacRiceContext& ctx, double t) {
  if (t == 0.0) throw Error(ErrorCode::SingularAtZero, "two-point correlation undefined at t = 0");
  const double gap = std::min(ctx.kernel().one_minus(t), ctx.kernel().one_plus(t));
  if (gap <= kDegeneracyTol)
    throw Error(ErrorCode::DegenerateCovariance,
                "|kappa(t)| = 1 at t = " + std::to_string(t));
}

}  // namespace

double k2_two_point(const KacRiceContext& ctx, double t) {
  check_lag(ctx, t);
  const auto& k = ctx.kernel();
  const double kv = k.value(t);
  const double k1 = k.d1(t);
  const double k2 = k.d2(t);
  const double den = 1.0 - kv * kv;
  const double num = ctx.M() * den - k1 * k1;
  if (!(num > 0.0))
    throw Error(ErrorCode::DegenerateCovariance, "conditional derivative variance vanishes");
  double rho = (k2 * den + kv * k1 * k1) / num;
  if (std::fabs(rho) > 1.0) {
    if (std::fabs(rho) - 1.0 > 1e-12)
      throw Error(ErrorCode::DegenerateCovariance,
                  "conditional correlation " + std::to_string(rho) + " outside [-1, 1]");
    rho = std::copysign(1.0, rho);
  }
  return num / (kPi * kPi * std::pow(den, 1.5)) * arcsine_factor(rho);
}

namespace {

// (1 − cos x)/x²
double ratio_a(double x) {
  if (x == 0.0) return 0.5;
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

// sin x / x
double ratio_s(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// (x − sin x)/x³
double ratio_b(double x) {
  if (std::fabs(x) >= 1.0) return (x - std::sin(x)) / (x * x * x);
  const double x2 = x * x;
  double term = 1.0 / 6.0;
  double sum = term;
  for (int k = 1; k < 12; ++k) {
    term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    sum += term;
  }
  return sum;
}

// (cos x − sin x / x)/x²
double ratio_q(double x) {
  if (std::fabs(x) >= 1.0) return (std::cos(x) - std::sin(x) / x) / (x * x);
  const double x2 = x * x;
  // term_k = (−1)^k x^{2k−2} / (2k+1)!, summed with weight 2k
  double term = -1.0 / 6.0;
  double sum = 2.0 * term;
  for (int k = 2; k < 13; ++k) {
    term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += 2.0 * k * term;
  }
  return sum;
}

std::vector<KernelFrequency> merged_abs_frequencies(const CovarianceKernel1D& kernel) {
  std::vector<KernelFrequency> f;
  for (const auto& k : kernel.frequencies()) f.push_back({std::fabs(k.xi), k.p});
  std::sort(f.begin(), f.end(),
            [](const KernelFrequency& a, const KernelFrequency& b) { return a.xi < b.xi; });
  std::vector<KernelFrequency> out;
  for (const auto& k : f) {
    if (!out.empty() && k.xi - out.back().xi <= 1e-12 * std::max(1.0, k.xi))
      out.back().p += k.p;
    else
      out.push_back(k);
  }
  return out;
}

using Vec = std::vector<double>;

// Lag below which 1 − κ(t) < 1e-6 holds only because t is small.
double trivial_lag(const KacRiceContext& ctx) {
  const auto& k = ctx.kernel();
  double t = std::sqrt(2e-6 / ctx.M());
  while (t > 0.0 && k.one_minus(t) > 1e-6) t *= 0.5;
  while (k.one_minus(t) < 1e-6 && t < 1e6) t *= 1.1;
  return t;
}

double inner(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void subtract_projection(Vec& v, const Vec& unit) {
  const double c = inner(v, unit);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * unit[i];
}

}  // namespace

double k2_two_point_stable(const KacRiceContext& ctx, double t) {
  if (t == 0.0) throw Error(ErrorCode::SingularAtZero, "two-point correlation undefined at t = 0");
  // Near t = 0, κ → 1 is the trivial coincidence f(t) → f(0), which the
  // rescaled vectors below resolve; degeneracy only counts away from it.
  const auto& k = ctx.kernel();
  const bool trivial = std::fabs(t) < trivial_lag(ctx);
  if (k.one_plus(t) <= kDegeneracyTol || (!trivial && k.one_minus(t) <= kDegeneracyTol))
    throw Error(ErrorCode::DegenerateCovariance, "|kappa(t)| = 1 at t = " + std::to_string(t));
  const auto freqs = merged_abs_frequencies(ctx.kernel());
  const std::size_t n = freqs.size();
  Vec r1(2 * n), r2(2 * n), r3(2 * n), r4(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sqrt(freqs[j].p);
    const double xi = freqs[j].xi;
    const double x = xi * t;
    const double a = ratio_a(x);
    const double sx = ratio_s(x);
    const double xi2 = xi * xi;
    r1[2 * j] = s;
    r1[2 * j + 1] = 0.0;
    r2[2 * j] = -s * xi2 * t * a;
    r2[2 * j + 1] = s * xi * sx;
    r3[2 * j] = s * xi2 * a;
    r3[2 * j + 1] = s * xi2 * xi * t * ratio_b(x);
    r4[2 * j] = s * xi2 * (a - sx);
    r4[2 * j + 1] = s * xi2 * xi * t * ratio_q(x);
  }

  const double n1 = std::sqrt(inner(r1, r1));
  Vec e1 = r1;
  for (auto& v : e1) v /= n1;
  subtract_projection(r2, e1);
  const double n2 = std::sqrt(inner(r2, r2));
  if (!(n2 > 0.0))
    throw Error(ErrorCode::DegenerateCovariance, "f(0) and f(t) are collinear");
  Vec e2 = r2;
  for (auto& v : e2) v /= n2;
  const double raw3 = std::sqrt(inner(r3, r3));
  const double raw4 = std::sqrt(inner(r4, r4));
  for (Vec* r : {&r3, &r4}) {
    subtract_projection(*r, e1);
    subtract_projection(*r, e2);
  }
  const double n3 = std::sqrt(inner(r3, r3));
  const double n4 = std::sqrt(inner(r4, r4));
  // A residual at rounding level means the slopes are determined by the
  // values, as for a single-frequency kernel: no conditional variance left.
  constexpr double kResidualTol = 1e-9;
  if (n3 <= kResidualTol * raw3 || n4 <= kResidualTol * raw4) return 0.0;
  const double rho = std::clamp(inner(r3, r4) / (n3 * n4), -1.0, 1.0);
  const double det_scaled = n1 * n2;  // √(1 − κ²)/|t|
  return std::fabs(t) * n3 * n4 / (kPi * kPi * det_scaled) * arcsine_factor(rho);
}

DegeneracyScan scan_degeneracy(const KacRiceContext& ctx, double L) {
  const auto& k = ctx.kernel();
  auto gap = [&](double t) { return std::min(k.one_minus(t), k.one_plus(t)); };
  DegeneracyScan out;
  double xi_max = 0.0;
  for (const auto& f : k.frequencies()) xi_max = std::max(xi_max, std::fabs(f.xi));
  if (xi_max == 0.0) return out;

  const double t_start = trivial_lag(ctx);
  if (t_start >= L) return out;

  const double period = kTwoPi / xi_max;
  const double h = std::min(L - t_start, period) / 64.0;
  const auto steps = static_cast<std::size_t>(std::ceil((L - t_start) / h));
  std::vector<double> ts(steps + 1), gs(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    ts[i] = std::min(L, t_start + i * h);
    gs[i] = gap(ts[i]);
  }
  auto consider = [&](double t, double g) {
    if (g < out.worst_gap) {
      out.worst_gap = g;
      out.worst_t = t;
    }
  };
  for (std::size_t i = 0; i <= steps; ++i) {
    consider(ts[i], gs[i]);
    const bool left_ok = i == 0 || gs[i] <= gs[i - 1];
    const bool right_ok = i == steps || gs[i] <= gs[i + 1];
    if (left_ok && right_ok) {
      const double lo = ts[i == 0 ? 0 : i - 1];
      const double hi = ts[i == steps ? steps : i + 1];
      if (hi > lo) {
        auto [tm, gm] = boost::math::tools::brent_find_minima(gap, lo, hi, 52);
        consider(tm, gm);
      }
    }
  }
  out.degenerate = out.worst_gap < kDegeneracyTol;
  return out;
}

QuadratureResult second_factorial_moment_numeric(const KacRiceContext& ctx, double L) {
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be positive");
  const auto scan = scan_degeneracy(ctx, L);
  if (scan.degenerate)
    throw Error(ErrorCode::DegenerateCovariance,
                "|kappa| reaches 1 at t = " + std::to_string(scan.worst_t) + " inside (0, L]");
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    return 2.0 * (L - t) * k2_two_point_stable(ctx, t);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, L, 30, 1e-12, &error);
  if (!std::isfinite(value) || error > std::max(1e-10, 1e-8 * std::fabs(value)))
    throw Error(ErrorCode::QuadratureFailure,
                "error estimate " + std::to_string(error) + " exceeds tolerance");
  return {value, error};
}

double second_factorial_leading_coefficient(const AsymptoticInputs& in) {
  if (!(std::fabs(in.nu4) <= 1.0 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, "nu4 must lie in [-1, 1]");
  return kSqrt2 * kPi * kPi / 24.0 * (1.0 + in.nu4 * std::cos(4.0 * in.u.radians()));
}

double second_factorial_moment_asymptotic(const AsymptoticInputs& in, double L) {
  return second_factorial_leading_coefficient(in) * L * L * L;
}

double degenerate_asymptotic(const AsymptoticInputs& in, double L) {
  const double lead = 1.0 + in.nu4 * std::cos(4.0 * in.u.radians());
  if (std::fabs(lead) > 1e-12)
    throw Error(ErrorCode::NotDegenerate,
                "1 + nu4 cos 4u = " + std::to_string(lead) + " is not zero");
  return std::pow(L, 5) * kSqrt2 * std::pow(kPi, 4) / 450.0;
}

std::vector<double> taylor_kernel(const LatticeCircle& circle, DirectionU u, int order) {
  if (order != 2 && order != 4 && order != 6)
    throw Error(ErrorCode::UnsupportedOrder, "order must be 2, 4 or 6");
  const double x = fourier_coefficient(spectral_measure_of(circle), 4) * std::cos(4.0 * u.radians());
  const double M = 2.0 * kPi * kPi;
  std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
  c[0] = 1.0;
  c[2] = -M / 2.0;
  if (order >= 4) c[4] = M * M / 48.0 * (3.0 + x);
  if (order >= 6) c[6] = -M * M * M / 1440.0 * (5.0 + 3.0 * x);
  return c;
}

double parity_even_probability(const CovarianceKernel1D& kernel, double T) {
  double k = kernel.value(T);
  if (std::fabs(k) > 1.0) {
    if (std::fabs(k) - 1.0 > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "|kappa(T)| exceeds 1");
    k = std::copysign(1.0, k);
  }
  return 0.5 + std::asin(k) / kPi;
}

}  // namespace nodal
