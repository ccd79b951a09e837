#include <doctest.h>

#include <cmath>
#include <random>

#include "nodal/errors.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/zero_counter.hpp"

using namespace nodal;

namespace {

constexpr auto kAngular = FrequencyConvention::angular();
constexpr auto kTwoPiConv = FrequencyConvention::two_pi();

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a nodal::Error");
  return ErrorCode::InvalidArgument;
}

KacRiceContext lattice_context(std::int64_t m, double u) {
  return KacRiceContext(covariance_kernel(spectral_measure_of(enumerate_lattice_points(m)),
                                          DirectionU::raw(u), kTwoPiConv));
}

double nu4_of(std::int64_t m) {
  return fourier_coefficient(spectral_measure_of(enumerate_lattice_points(m)), 4);
}

}  // namespace

TEST_CASE("expected zero count") {
  const KacRiceContext cil(covariance_kernel(cilleruelo_measure(), DirectionU::raw(0.3), kAngular));
  CHECK(cil.M() == doctest::Approx(0.5));
  for (double L : {1.0, 10.0, 33.3})
    CHECK(expected_zero_count(cil, L) == doctest::Approx(L / (kPi * kSqrt2)));
  CHECK(expected_zero_count(cil, 10.0) == doctest::Approx(2.2508).epsilon(1e-4));
  for (std::int64_t m : {1, 5, 25, 2917})
    CHECK(expected_zero_count(lattice_context(m, 0.7), 1.0) == doctest::Approx(kSqrt2));
  CHECK(expected_zero_count(cil, 0.0) == 0.0);
}

TEST_CASE("two-point correlation near the origin") {
  for (std::int64_t m : {5, 25, 65}) {
    for (double u : {0.0, 0.3, 0.6}) {
      const auto ctx = lattice_context(m, u);
      const double limit = kSqrt2 * kPi * kPi / 8.0 * (1.0 + nu4_of(m) * std::cos(4 * u));
      CHECK(k2_two_point_stable(ctx, 1e-5) / 1e-5 == doctest::Approx(limit).epsilon(1e-6));
    }
  }
}

TEST_CASE("stable and literal two-point forms agree where both are well conditioned") {
  const auto ctx = lattice_context(65, 0.21);
  for (double t : {0.05, 0.1, 0.2, 0.3}) {
    const double literal = k2_two_point(ctx, t);
    CHECK(k2_two_point_stable(ctx, t) == doctest::Approx(literal).epsilon(1e-8));
  }
}

TEST_CASE("two-point correlation is continuous from tiny to moderate lags") {
  const auto ctx = lattice_context(25, 0.4);
  double prev = k2_two_point_stable(ctx, 1e-8) / 1e-8;
  for (double t = 1.2e-8; t < 1e-2; t *= 1.2) {
    const double cur = k2_two_point_stable(ctx, t) / t;
    CHECK(std::fabs(cur - prev) <= 1e-3 * std::fabs(prev));
    CHECK(cur >= 0.0);
    prev = cur;
  }
}

TEST_CASE("two-point correlation failures") {
  const KacRiceContext cil(covariance_kernel(cilleruelo_measure(), DirectionU::raw(0.0), kAngular));
  CHECK(code_of([&] { k2_two_point(cil, kTwoPi); }) == ErrorCode::DegenerateCovariance);
  CHECK(code_of([&] { k2_two_point_stable(cil, kTwoPi); }) == ErrorCode::DegenerateCovariance);
  CHECK(code_of([&] { k2_two_point_stable(cil, 0.0); }) == ErrorCode::SingularAtZero);
  CHECK(code_of([&] { k2_two_point(cil, 0.0); }) == ErrorCode::SingularAtZero);
  const auto scan = scan_degeneracy(cil, 7.0);
  CHECK(scan.degenerate);
  CHECK(scan.worst_t == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK_FALSE(scan_degeneracy(cil, 6.0).degenerate);
  CHECK(code_of([&] { second_factorial_moment_numeric(cil, 7.0); }) ==
        ErrorCode::DegenerateCovariance);
}

TEST_CASE("property: two-point correlation is even and nonnegative") {
  const auto ctx = lattice_context(85, 0.33);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> ts(1e-4, 0.6);
  for (int i = 0; i < 100; ++i) {
    const double t = ts(gen);
    const double k = k2_two_point_stable(ctx, t);
    CHECK(k >= 0.0);
    CHECK(k2_two_point_stable(ctx, -t) == doctest::Approx(k).epsilon(1e-13));
  }
}

TEST_CASE("second factorial moment by quadrature") {
  // Frozen from an independent 60-digit quadrature of the literal formula.
  struct Case {
    const char* name;
    SpectralMeasure mu;
    double u, L, value;
  };
  const Case cases[] = {
      {"m=5", spectral_measure_of(enumerate_lattice_points(5)), 0.3, 0.1, 0.000530544011540303},
      {"m=5", spectral_measure_of(enumerate_lattice_points(5)), 0.3, 0.5, 0.0992969920232011},
      {"uniform 64", uniform_measure(64), 0.3, 0.1, 0.000590562153462503},
      {"m=25", spectral_measure_of(enumerate_lattice_points(25)), 0.2, 0.3, 0.0152242116617946},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const KacRiceContext ctx(covariance_kernel(c.mu, DirectionU::raw(c.u), kTwoPiConv));
    const auto q = second_factorial_moment_numeric(ctx, c.L);
    CHECK(q.value == doctest::Approx(c.value).epsilon(1e-9));
    CHECK(q.error < 1e-10);
  }
}

TEST_CASE("quadrature reproduces the exact Cilleruelo law") {
  // m = 1 along the axis is the Cilleruelo process with time scaled by 2π.
  const auto ctx = lattice_context(1, 0.0);
  for (double L : {0.1, 0.3, 0.7, 0.95}) {
    const double exact = exact_second_factorial(0.0, kTwoPi * L);
    CHECK(second_factorial_moment_numeric(ctx, L).value ==
          doctest::Approx(exact).epsilon(1e-8));
  }
}

TEST_CASE("short-segment asymptotics") {
  const auto ctx = lattice_context(1, 0.0);
  const double L = 0.05;
  const double lead = L * L * L * kSqrt2 * kPi * kPi / 24.0 * 2.0;
  CHECK(second_factorial_moment_numeric(ctx, L).value == doctest::Approx(lead).epsilon(0.01));

  double prev = 1.0;
  const auto ctx5 = lattice_context(5, 0.3);
  for (double l : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const double v = second_factorial_moment_numeric(ctx5, l).value;
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
}

TEST_CASE("property: relative error of the L^3 law decays at order two") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ang(0.0, kQuarterPi);
  const double lengths[] = {0.2, 0.1, 0.05, 0.025};
  for (std::int64_t m : {5, 13, 25, 65, 85}) {
    const double u = ang(gen);
    const auto ctx = lattice_context(m, u);
    const AsymptoticInputs in{nu4_of(m), DirectionU::raw(u)};
    std::vector<double> xs, errs;
    for (double L : lengths) {
      const double ratio = second_factorial_moment_numeric(ctx, L).value /
                           second_factorial_moment_asymptotic(in, L);
      xs.push_back(L);
      errs.push_back(std::fabs(ratio - 1.0));
    }
    // Least-squares slope of log error against log L.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double lx = std::log(xs[i]), ly = std::log(errs[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double n = static_cast<double>(xs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CAPTURE(m);
    CAPTURE(u);
    CHECK(slope >= 1.8);
  }
}

TEST_CASE("degenerate direction of a single-frequency kernel") {
  // For m = 1 at u = π/4 every lattice point projects to ±1/√2: one sinusoid,
  // so no segment shorter than half a period holds two zeros.
  const auto ctx = lattice_context(1, kQuarterPi);
  CHECK(k2_two_point_stable(ctx, 0.01) == 0.0);
  CHECK(second_factorial_moment_numeric(ctx, 0.05).value == 0.0);
  const AsymptoticInputs in{1.0, DirectionU::raw(kQuarterPi)};
  CHECK(second_factorial_leading_coefficient(in) == doctest::Approx(0.0));
  CHECK(degenerate_asymptotic(in, 0.05) ==
        doctest::Approx(std::pow(0.05, 5) * kSqrt2 * std::pow(kPi, 4) / 450.0));
  CHECK(code_of([] { degenerate_asymptotic({0.5, DirectionU::raw(0.1)}, 0.05); }) ==
        ErrorCode::NotDegenerate);
}

TEST_CASE("leading coefficient") {
  CHECK(second_factorial_moment_asymptotic({0.0, DirectionU::raw(0.4)}, 2.0) ==
        doctest::Approx(kSqrt2 * kPi * kPi / 24.0 * 8.0));
  const double top = kSqrt2 * kPi * kPi / 12.0;
  for (double nu = -1.0; nu <= 1.0; nu += 0.125) {
    for (double u = 0.0; u <= kQuarterPi; u += kQuarterPi / 16) {
      const double c = second_factorial_leading_coefficient({nu, DirectionU::raw(u)});
      CHECK(c >= -1e-15);
      CHECK(c <= top + 1e-15);
    }
  }
  CHECK(code_of([] { second_factorial_leading_coefficient({1.5, DirectionU::raw(0)}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("Taylor coefficients of the kernel") {
  const auto c1 = taylor_kernel(enumerate_lattice_points(1), DirectionU::raw(0.0), 6);
  CHECK(c1[0] == 1.0);
  CHECK(c1[2] == doctest::Approx(-kPi * kPi));
  // Fourth derivative at 0 by central differences.
  const auto k = covariance_kernel(cilleruelo_measure(), DirectionU::raw(0.0), kTwoPiConv);
  const double h = 1e-2;
  const double d4 = (k.value(2 * h) - 4 * k.value(h) + 6 * k.value(0) - 4 * k.value(-h) +
                     k.value(-2 * h)) /
                    std::pow(h, 4);
  CHECK(c1[4] == doctest::Approx(d4 / 24.0).epsilon(1e-3));
  CHECK(k.derivative(0.0, 4) / 24.0 == doctest::Approx(c1[4]).epsilon(1e-12));

  for (std::int64_t m : {5, 65, 1105}) {
    const auto circle = enumerate_lattice_points(m);
    const double u = 0.27;
    const auto coeffs = taylor_kernel(circle, DirectionU::raw(u), 6);
    const auto kern =
        covariance_kernel(spectral_measure_of(circle), DirectionU::raw(u), kTwoPiConv);
    double fact = 1.0;
    for (int order = 0; order <= 6; ++order) {
      if (order > 0) fact *= order;
      CHECK(coeffs[order] == doctest::Approx(kern.derivative(0.0, order) / fact).epsilon(1e-9));
    }
  }
  CHECK(code_of([] { taylor_kernel(enumerate_lattice_points(5), DirectionU::raw(0), 5); }) ==
        ErrorCode::UnsupportedOrder);
}

TEST_CASE("parity of the zero count") {
  const auto k0 = covariance_kernel(cilleruelo_measure(), DirectionU::raw(0.0), kAngular);
  CHECK(parity_even_probability(k0, kPi) == doctest::Approx(0.5));
  CHECK(parity_even_probability(k0, kTwoPi) == doctest::Approx(1.0));
  // At L = π the exact law has P(Z = 1) = ½.
  CHECK(1.0 - exact_distribution_u0(kPi).probability(1) ==
        doctest::Approx(parity_even_probability(k0, kPi)));
}
