#pragma once

// Kac-Rice zero intensities for stationary Gaussian processes on a line.

#include <optional>
#include <vector>

#include "nodal/gaussian_fields.hpp"
#include "nodal/lattice_spectral.hpp"

namespace nodal {

class KacRiceContext {
 public:
  explicit KacRiceContext(CovarianceKernel1D kernel);

  const CovarianceKernel1D& kernel() const noexcept { return kernel_; }
  // −κ″(0)
  double M() const noexcept { return m_; }

 private:
  CovarianceKernel1D kernel_;
  double m_;
};

// √M·L/π.
double expected_zero_count(const KacRiceContext& ctx, double L);

// Two-point correlation evaluated literally from κ, κ′, κ″. Suffers
// cancellation for small |t|; throws SingularAtZero at t = 0 and
// DegenerateCovariance when |κ(t)| ≥ 1 − 1e-12.
double k2_two_point(const KacRiceContext& ctx, double t);

// Same quantity computed from a rescaled Gram representation of
// (f(0), f(t), f′(0), f′(t)), accurate down to t → 0. Same error contract.
double k2_two_point_stable(const KacRiceContext& ctx, double t);

inline constexpr double kDegeneracyTol = 1e-12;

struct DegeneracyScan {
  bool degenerate = false;
  double worst_t = 0.0;    // argmin of 1 − |κ(t)| on the scanned range
  double worst_gap = 1.0;  // 1 − |κ(worst_t)|
};

// Searches (0, L] for lags with 1 − |κ(t)| < 1e-12, skipping the trivial
// neighbourhood of 0 where 1 − κ(t) < 1e-6.
DegeneracyScan scan_degeneracy(const KacRiceContext& ctx, double L);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// 2∫₀ᴸ (L − t) K2(t) dt by adaptive Gauss-Kronrod on the stable K2.
// Throws DegenerateCovariance if the kernel degenerates in (0, L] and
// QuadratureFailure unless error ≤ max(1e-10, 1e-8·|value|).
QuadratureResult second_factorial_moment_numeric(const KacRiceContext& ctx, double L);

struct AsymptoticInputs {
  double nu4;
  DirectionU u;
};

// L³·(√2π²/24)(1 + ν̂(4) cos 4u).
double second_factorial_moment_asymptotic(const AsymptoticInputs& in, double L);
double second_factorial_leading_coefficient(const AsymptoticInputs& in);

// L⁵·√2π⁴/450; throws NotDegenerate unless ν̂(4) cos 4u = −1 within 1e-12.
double degenerate_asymptotic(const AsymptoticInputs& in, double L);

// Coefficients c₀..c_order of κ(t) = Σ c_k t^k for an arithmetic wave in the
// 2π convention; odd entries are zero. order ∈ {2, 4, 6}.
std::vector<double> taylor_kernel(const LatticeCircle& circle, DirectionU u, int order);

// ½ + arcsin(κ(T))/π.
double parity_even_probability(const CovarianceKernel1D& kernel, double T);

}  // namespace nodal
