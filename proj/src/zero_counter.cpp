#include "nodal/zero_counter.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nodal/errors.hpp"

namespace nodal {

double default_grid_step(FrequencyConvention convention) { return convention.wavelength() / 40.0; }

namespace {

constexpr int kSubdivision = 16;
// Grid nodes between direct trigonometric evaluations; in between, each
// mode is advanced by an exact rotation, which drifts by O(1e-16) per step.
constexpr std::size_t kResync = 32;

// (value, slope) at consecutive equally spaced nodes t_i = i·h.
class GridWalker {
 public:
  GridWalker(std::span<const LineMode> modes, double h)
      : modes_(modes), step_cos_(modes.size()), step_sin_(modes.size()), cos_(modes.size()),
        sin_(modes.size()) {
    for (std::size_t k = 0; k < modes.size(); ++k) {
      step_cos_[k] = std::cos(modes[k].xi * h);
      step_sin_[k] = std::sin(modes[k].xi * h);
    }
  }

  // Must be called with i = 0, 1, 2, … in order; t is the node position.
  std::pair<double, double> next(std::size_t i, double t) {
    double v = 0.0;
    double d = 0.0;
    const bool direct = i % kResync == 0;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      const auto& m = modes_[k];
      double c, s;
      if (direct) {
        c = std::cos(m.xi * t);
        s = std::sin(m.xi * t);
      } else {
        c = cos_[k] * step_cos_[k] - sin_[k] * step_sin_[k];
        s = sin_[k] * step_cos_[k] + cos_[k] * step_sin_[k];
      }
      cos_[k] = c;
      sin_[k] = s;
      v += m.cos_amp * c + m.sin_amp * s;
      d += m.xi * (m.sin_amp * c - m.cos_amp * s);
    }
    return {v, d};
  }

 private:
  std::span<const LineMode> modes_;
  std::vector<double> step_cos_, step_sin_, cos_, sin_;
};

class Scanner {
 public:
  Scanner(const LineProcess& process, const ZeroCountOptions& options)
      : proc_(process),
        opt_(options),
        tau_(options.tangency_rel * process.amplitude_scale()),
        curvature_(curvature_bound(process)) {}

  ZeroCountResult run() {
    const double wavelength = proc_.convention().wavelength();
    const double step = opt_.grid_step.value_or(default_grid_step(proc_.convention()));
    if (!(step > 0.0) || step > wavelength / 10.0 * (1.0 + 1e-12))
      throw Error(ErrorCode::InvalidArgument,
                  "grid_step " + std::to_string(step) + " must lie in (0, wavelength/10]");
    if (!(opt_.refine_tol > 0.0))
      throw Error(ErrorCode::InvalidArgument, "refine_tol must be positive");

    const double L = proc_.length();
    const auto cells = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(L / step)));
    auto node = [&](std::size_t i) { return i == cells ? L : L * static_cast<double>(i) / cells; };

    GridWalker walk(proc_.modes(), L / static_cast<double>(cells));
    double a = 0.0;
    auto [fa, da] = walk.next(0, a);
    for (std::size_t i = 0; i < cells; ++i) {
      const double b = node(i + 1);
      const auto [fb, db] = walk.next(i + 1, b);
      if (fa == 0.0) {
        add(a);
      } else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
        add(bisect(a, b, fa));
      } else if (fb != 0.0) {
        same_sign_cell(a, fa, da, b, fb, db);
      }
      if (done()) return std::move(res_);
      a = b;
      fa = fb;
      da = db;
    }
    if (fa == 0.0) add(L);
    return std::move(res_);
  }

 private:
  bool done() const { return opt_.stop_after && res_.count >= *opt_.stop_after; }

  void add(double t) {
    if (done()) return;
    res_.locations.push_back(t);
    ++res_.count;
  }

  double bisect(double a, double b, double fa) const {
    if (!opt_.refine) return 0.5 * (a + b);
    while (b - a > opt_.refine_tol) {
      const double m = 0.5 * (a + b);
      const double fm = proc_.value(m);
      if (fm == 0.0) return m;
      if (std::signbit(fm) == std::signbit(fa)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  }

  // Locates the extremum of f in (a, b), where f′ changes sign from `da`
  // to the opposite, only as far as needed: it returns early at a point
  // where s·f ≤ 0 (the cell holds a root pair) or once a Taylor bound shows
  // s·f stays above the tangency threshold on the remaining bracket.
  struct Extremum {
    double t;
    bool settled_positive;
  };
  Extremum bisect_slope(double a, double b, double da, double s) const {
    while (b - a > opt_.refine_tol) {
      const double m = 0.5 * (a + b);
      const auto [fm, dm] = proc_.value_and_slope(m);
      if (s * fm <= 0.0) return {m, false};
      const double half = 0.5 * (b - a);
      if (s * fm - std::fabs(dm) * half - 0.5 * curvature_ * half * half > tau_)
        return {m, true};
      if (dm == 0.0) return {m, false};
      if (std::signbit(dm) == std::signbit(da)) {
        a = m;
        da = dm;
      } else {
        b = m;
      }
    }
    return {0.5 * (a + b), false};
  }

  void same_sign_cell(double a, double fa, double da, double b, double fb, double db) {
    const double s = fa > 0.0 ? 1.0 : -1.0;
    const bool turns_back = s * da < 0.0 && s * db > 0.0;
    if (turns_back) {
      // The process approaches zero and recedes within the cell; two roots
      // hide here exactly when the extremum crosses zero.
      const auto [tm, clear] = bisect_slope(a, b, da, s);
      if (clear) return;
      const double fm = proc_.value(tm);
      if (std::fabs(fm) < tau_) res_.suspicious = true;
      if (fm == 0.0) {
        res_.suspicious = true;
        add(tm);
      } else if (s * fm < 0.0) {
        add(bisect(a, tm, fa));
        add(bisect(tm, b, fm));
      }
      return;
    }
    if (std::min(std::fabs(fa), std::fabs(fb)) < tau_) {
      res_.suspicious = true;
      const double h = (b - a) / kSubdivision;
      double x0 = a;
      double f0 = fa;
      for (int k = 1; k <= kSubdivision; ++k) {
        const double x1 = k == kSubdivision ? b : a + k * h;
        const double f1 = k == kSubdivision ? fb : proc_.value(x1);
        if (f1 == 0.0 && k < kSubdivision) {
          add(x1);
        } else if (f0 != 0.0 && f1 != 0.0 && std::signbit(f0) != std::signbit(f1)) {
          add(bisect(x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
      }
    }
  }

  // Upper bound on |f″| along the whole segment.
  static double curvature_bound(const LineProcess& p) {
    double c = 0.0;
    for (const auto& m : p.modes()) c += m.xi * m.xi * std::hypot(m.cos_amp, m.sin_amp);
    return c;
  }

  const LineProcess& proc_;
  const ZeroCountOptions& opt_;
  double tau_;
  double curvature_;
  ZeroCountResult res_;
};

}  // namespace

ZeroCountResult count_zeros(const LineProcess& process, const ZeroCountOptions& options) {
  return Scanner(process, options).run();
}

double CountDistribution::probability(int k) const {
  for (const auto& [kk, p] : support)
    if (kk == k) return p;
  return 0.0;
}

double CountDistribution::mean() const {
  double s = 0.0;
  for (const auto& [k, p] : support) s += k * p;
  return s;
}

double CountDistribution::second_factorial() const {
  double s = 0.0;
  for (const auto& [k, p] : support) s += static_cast<double>(k) * (k - 1) * p;
  return s;
}

double CountDistribution::total() const {
  double s = 0.0;
  for (const auto& [k, p] : support) s += p;
  return s;
}

namespace {

CountDistribution finish(std::vector<std::pair<int, double>> raw) {
  CountDistribution d;
  for (auto [k, p] : raw) {
    if (std::fabs(p) < 1e-15) continue;
    d.support.emplace_back(k, std::max(0.0, p));
  }
  return d;
}

void require_length(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidArgument, "L must be positive");
}

// asin(cos²(L/2))
double half_angle_arcsine(double L) {
  const double c = std::cos(0.5 * L);
  return std::asin(std::min(1.0, c * c));
}

// L/(π√2) with values within 1e-12 of an integer snapped to it.
double diagonal_periods(double L) {
  const double x = L / (kPi * kSqrt2);
  const double r = std::round(x);
  return std::fabs(x - r) < 1e-12 ? r : x;
}

enum class SpecialDirection { Axis, Diagonal };

SpecialDirection classify(double u) {
  if (std::fabs(u) <= 1e-12) return SpecialDirection::Axis;
  if (std::fabs(u - kQuarterPi) <= 1e-12) return SpecialDirection::Diagonal;
  throw Error(ErrorCode::UnsupportedDirection,
              "closed forms exist only for u = 0 and u = pi/4, got " + std::to_string(u));
}

}  // namespace

CountDistribution exact_distribution_u0(double L) {
  require_length(L);
  const double g = half_angle_arcsine(L);
  if (L < kTwoPi) {
    return finish({{0, 0.25 * (3.0 - kSqrt2 * L / kPi) + g / kTwoPi},
                   {1, 0.5 - g / kPi},
                   {2, 0.25 * (kSqrt2 * L / kPi - 1.0) + g / kTwoPi}});
  }
  const double n = std::floor(L / kTwoPi);
  const int k = static_cast<int>(n);
  return finish({{0, 1.0 - kSqrt2 / 2.0},
                 {2 * k, -L / (kTwoPi * kSqrt2) + (n + 1.0) / kSqrt2 - 0.25 + g / kTwoPi},
                 {2 * k + 1, 0.5 - g / kPi},
                 {2 * k + 2, L / (kTwoPi * kSqrt2) - n / kSqrt2 - 0.25 + g / kTwoPi}});
}

CountDistribution exact_distribution_u_pi4(double L) {
  require_length(L);
  const double x = diagonal_periods(L);
  const double n = std::floor(x);
  const double frac = x - n;
  const int k = static_cast<int>(n);
  return finish({{k, 1.0 - frac}, {k + 1, frac}});
}

CountDistribution exact_distribution(double u, double L) {
  return classify(u) == SpecialDirection::Axis ? exact_distribution_u0(L)
                                               : exact_distribution_u_pi4(L);
}

double exact_persistence(double u, double L) {
  const auto dir = classify(u);
  require_length(L);
  if (dir == SpecialDirection::Axis) {
    if (L <= kTwoPi) return 0.25 * (3.0 - kSqrt2 * L / kPi) + half_angle_arcsine(L) / kTwoPi;
    return 1.0 - kSqrt2 / 2.0;
  }
  return std::max(0.0, 1.0 - diagonal_periods(L));
}

double exact_second_factorial(double u, double L) {
  const auto dir = classify(u);
  require_length(L);
  if (dir == SpecialDirection::Axis) {
    const double n = std::floor(L / kTwoPi);
    return (4.0 * n + 1.0) * L / (kPi * kSqrt2) - 2.0 * kSqrt2 * n * (n + 1.0) - 0.5 +
           half_angle_arcsine(L) / kPi;
  }
  const double x = diagonal_periods(L);
  const double n = std::floor(x);
  return n * (n - 1.0 + 2.0 * (x - n));
}

CrossingLines crossing_lines(double b1, double c1, double b2, double c2) {
  const double a1 = b1 * b1 + c1 * c1;
  const double a2 = b2 * b2 + c2 * c2;
  if (a1 == a2) throw Error(ErrorCode::Tie, "equal amplitudes admit no crossing line");
  const bool vertical = a1 > a2;
  const double b = vertical ? b1 : b2;
  const double c = vertical ? c1 : c2;
  // b cos α + c sin α attains its maximum √(b²+c²) at atan2(c, b).
  const double pos = canonical_angle(std::atan2(c, b));
  const double neg = canonical_angle(pos + kPi);
  return {vertical ? LineOrientation::Vertical : LineOrientation::Horizontal, pos, neg};
}

}  // namespace nodal
