#include <doctest.h>

#include <cmath>
#include <random>

#include "nodal/coupling.hpp"
#include "nodal/errors.hpp"
#include "nodal/rng.hpp"

using namespace nodal;

namespace {

constexpr auto kAngular = FrequencyConvention::angular();

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a nodal::Error");
  return ErrorCode::InvalidArgument;
}

std::vector<Vec2> probe_points(std::uint64_t seed, std::size_t n, double R) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coord(-R, R);
  std::vector<Vec2> pts;
  while (pts.size() < n) {
    const Vec2 x{coord(gen), coord(gen)};
    if (x.x * x.x + x.y * x.y <= R * R) pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("a single unrotated pair couples to itself") {
  const std::vector<double> phis = {0.0};
  Rng rng = make_stream(1, 0);
  const auto g = cilleruelo_type_field(phis, 0.1, rng);
  const auto pair = couple(g, 0.1);
  for (const auto& x : probe_points(2, 50, 20.0))
    CHECK(std::fabs(pair.difference(x)) < 1e-13);
  const auto coeffs = pair.aggregated();
  CHECK(coeffs[0] == doctest::Approx(g.terms()[0].b));
  CHECK(coeffs[3] == doctest::Approx(g.terms()[1].c));
}

TEST_CASE("coupling a Cilleruelo field returns the same field") {
  const auto f = cilleruelo_field(0.3, -1.2, 0.8, 0.4);
  const auto pair = couple(f, 0.0);
  const auto a = pair.aggregated();
  CHECK(a[0] == doctest::Approx(0.3));
  CHECK(a[1] == doctest::Approx(-1.2));
  CHECK(a[2] == doctest::Approx(0.8));
  CHECK(a[3] == doctest::Approx(0.4));
  CHECK(pair.axis_of_term == std::vector<int>{0, 1});
}

TEST_CASE("property: coupling is linear in the coefficients") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(5, i);
    const auto g = random_cilleruelo_type(4, 0.1, rng);
    const auto base = couple(g, 0.1).aggregated();
    const auto scaled = couple(g.scaled(-2.5), 0.1).aggregated();
    for (std::size_t k = 0; k < 4; ++k)
      CHECK(scaled[k] == doctest::Approx(-2.5 * base[k]).scale(1e-14));
  }
}

TEST_CASE("both fields of a pair have unit variance") {
  Rng rng = make_stream(8, 0);
  const auto pair = couple(random_cilleruelo_type(6, 0.2, rng), 0.2);
  CHECK(field_covariance(pair.g, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(field_covariance(pair.f, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(field_covariance(pair.f, {kPi, 0.0}) == doctest::Approx(0.0).scale(1e-15));
}

TEST_CASE("terms near the negative axes join with negated sines") {
  // Direction at angle π − 0.01 is −(cos 0.01, −sin 0.01): cos is even, sin odd.
  const double a = kPi - 0.01;
  const PlanarField g({{a, {std::cos(a), std::sin(a)}, 1.0, 0.7, -0.4}}, kAngular);
  const auto pair = couple(g, 0.02);
  CHECK(pair.axis_of_term == std::vector<int>{2});
  const auto c = pair.aggregated();
  CHECK(c[0] == doctest::Approx(0.7 * kSqrt2));
  CHECK(c[1] == doctest::Approx(0.4 * kSqrt2));
  for (const auto& x : probe_points(3, 100, 5.0))
    CHECK(std::fabs(pair.difference(x)) <= lipschitz_difference_bound(pair, 5.0));
}

TEST_CASE("coupling rejects fields that are not of Cilleruelo type") {
  const PlanarField g({{0.5, {std::cos(0.5), std::sin(0.5)}, 1.0, 1.0, 0.0}}, kAngular);
  CHECK(code_of([&] { couple(g, 0.1); }) == ErrorCode::NotCillerueloType);
  CHECK(code_of([&] { couple(g, kQuarterPi); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { couple(g, -0.1); }) == ErrorCode::InvalidArgument);
  Rng rng = make_stream(0, 0);
  const std::vector<double> wide = {0.2};
  CHECK(code_of([&] { cilleruelo_type_field(wide, 0.1, rng); }) == ErrorCode::AngleOutOfBand);
  CHECK(code_of([&] { random_cilleruelo_type(0, 0.1, rng); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("zero angular spread gives a zero difference") {
  Rng rng = make_stream(4, 0);
  const auto pair = couple(random_cilleruelo_type(5, 0.0, rng), 0.0);
  const auto rep = difference_sup_norm(pair, 10.0);
  CHECK(rep.sup_norm < 1e-13);
  CHECK(rep.log_threshold == 0.0);
  CHECK(lipschitz_difference_bound(pair, 10.0) == 0.0);
}

TEST_CASE("property: the Lipschitz bound dominates the difference") {
  for (std::uint64_t i = 0; i < 30; ++i) {
    Rng rng = make_stream(12, i);
    const auto pair = couple(random_cilleruelo_type(4, 0.05, rng), 0.05);
    for (double R : {2.0, 8.0}) {
      const double bound = lipschitz_difference_bound(pair, R);
      CHECK(difference_sup_norm(pair, R).sup_norm <= bound);
      for (const auto& x : probe_points(i, 40, R)) CHECK(std::fabs(pair.difference(x)) <= bound);
    }
  }
}

TEST_CASE("grid sup norm geometry and refinement") {
  Rng rng = make_stream(21, 0);
  const auto pair = couple(random_cilleruelo_type(4, 0.05, rng), 0.05);
  const double R = 10.0;
  const auto coarse = difference_sup_norm(pair, R, 0.1);
  const auto fine = difference_sup_norm(pair, R, 0.05);
  CHECK(std::hypot(coarse.argmax.x, coarse.argmax.y) <= R + 1e-12);
  CHECK(std::fabs(pair.difference(coarse.argmax)) == doctest::Approx(coarse.sup_norm));
  CHECK(fine.sup_norm >= coarse.sup_norm * (1 - 1e-12));
  CHECK(std::fabs(fine.sup_norm - coarse.sup_norm) <= 0.01 * fine.sup_norm);
  CHECK(coarse.log_threshold == doctest::Approx(2 * 0.05 * R * std::log(R)));
  CHECK(coarse.square_threshold == doctest::Approx(2 * 0.05 * R * R));
  CHECK(code_of([&] { difference_sup_norm(pair, R, 0.2); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { difference_sup_norm(pair, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("difference tails over growing radii") {
  const std::vector<double> radii = {5.0, 10.0, 20.0};
  const auto rows = coupling_tail_experiment(0.05, 4, radii, 400, 3, 1);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CAPTURE(row.R);
    CHECK(row.n_samples == 400);
    CHECK(row.square_exceedance.value == 0.0);
    CHECK(row.lipschitz_failures == 0);
    CHECK(row.log_exceedance.value <= 1.0);
    CHECK(row.mean_sup > 0.0);
  }
  CHECK(rows[2].mean_sup > rows[0].mean_sup);
  const auto again = coupling_tail_experiment(0.05, 4, radii, 400, 3, 4);
  CHECK(again[1].mean_sup == rows[1].mean_sup);
}

TEST_CASE("covariance kernels of the pair stay close") {
  const auto rep = kernel_gap_check(0.05, 4, 20.0, 2000, 6);
  CHECK(rep.pairs == 2000);
  CHECK(rep.violations == 0);
  CHECK(rep.max_ratio <= 1.0);
  CHECK(rep.max_gap > 0.0);
}

TEST_CASE("Anderson-Darling statistic") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> good(5000), shifted(5000);
  for (auto& v : good) v = normal(gen);
  for (auto& v : shifted) v = normal(gen) + 0.2;
  CHECK(anderson_darling_standard_normal(good) < AggregateReport::kCritical001);
  CHECK(anderson_darling_standard_normal(shifted) > AggregateReport::kCritical001);
  CHECK(code_of([] { anderson_darling_standard_normal(std::vector<double>{}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("aggregated coefficients are standard normal") {
  const auto rep = aggregated_coefficient_check(0.1, 4, 20000, 9, 1);
  CHECK(rep.n == 20000);
  CHECK(rep.normal());
  for (const auto& v : rep.variance) CHECK(std::fabs(v.value - 1.0) <= 4.0 * v.se);
}

TEST_CASE("persistence transfer with zero spread reproduces the Cilleruelo law") {
  const auto rep = persistence_transfer_experiment(0.0, 0.0, 10.0, 20000, 2, 1);
  CHECK(rep.threshold == 0.0);
  CHECK(rep.g_persistence.value == rep.f_persistence.value);
  CHECK(std::fabs(rep.g_persistence.value - (1 - kSqrt2 / 2)) <= 3.0 * rep.g_persistence.se);
  CHECK(rep.sup_exceeded.value == 0.0);
  CHECK(rep.implication_failures == 0);
  CHECK(rep.inequality_holds);

  const auto diag = persistence_transfer_experiment(0.0, kQuarterPi, 10.0, 5000, 2, 1);
  CHECK(diag.g_persistence.value == 0.0);
  CHECK(diag.inequality_holds);
}

TEST_CASE("persistence transfer in the crossing regime") {
  const auto rep = persistence_transfer_experiment(0.01, 0.3, 25.0, 3000, 4, 1);
  CHECK(rep.threshold == doctest::Approx(2 * 0.01 * 25.0 * std::log(25.0)));
  CHECK(rep.tie_oracle == doctest::Approx(std::sqrt(kPi) * 0.01 * 25.0 * std::log(25.0)));
  CHECK(rep.implication_failures == 0);
  CHECK(rep.inequality_holds);
  CHECK(rep.tie_unscaled.value <= rep.tie.value);

  const auto axis = persistence_transfer_experiment(0.001, 0.0, 10.0, 4000, 4, 1);
  CHECK(axis.implication_failures == 0);
  CHECK(axis.inequality_holds);
  CHECK(axis.dominant.value > 0.2);

  CHECK(code_of([] { persistence_transfer_experiment(0.01, 0.3, 10.0, 10, 0, 1); }) ==
        ErrorCode::RegimeViolation);
  CHECK(code_of([] { persistence_transfer_experiment(0.01, 0.0, 0.5, 10, 0, 1); }) ==
        ErrorCode::InvalidArgument);
}
