#pragma once

// Lattice points on circles, atomic spectral measures on S¹ and their
// projections onto a direction.

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nodal/vec2.hpp"

namespace nodal {

struct LatticePoint {
  std::int64_t lambda1 = 0;
  std::int64_t lambda2 = 0;

  double angle() const;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

// All integer points on the circle of radius √m, ordered by angle in [0, 2π).
class LatticeCircle {
 public:
  LatticeCircle(std::int64_t m, std::vector<LatticePoint> points);

  std::int64_t m() const noexcept { return m_; }
  std::span<const LatticePoint> points() const noexcept { return points_; }
  std::size_t r2() const noexcept { return points_.size(); }

 private:
  std::int64_t m_;
  std::vector<LatticePoint> points_;
};

std::int64_t integer_sqrt(std::int64_t n);

// Throws NotRepresentable when r₂(m) = 0.
LatticeCircle enumerate_lattice_points(std::int64_t m);

bool is_sum_of_two_squares(std::int64_t m);

struct Atom {
  double angle = 0.0;  // radians, canonical in [0, 2π)
  double weight = 0.0;
};

enum class SymmetryCheck { Required, Skip };

// Finite atomic probability measure on the unit circle. With
// SymmetryCheck::Required the atom multiset must be invariant under rotation
// by π/2 and under reflection angle ↦ −angle.
class SpectralMeasure {
 public:
  explicit SpectralMeasure(std::vector<Atom> atoms,
                           SymmetryCheck check = SymmetryCheck::Required);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  // Invariance under θ ↦ θ + π/2 and θ ↦ −θ, matched to `tol` radians.
  bool is_dihedral_symmetric(double tol = 1e-9) const;

  // Invariance under θ ↦ θ + π with equal weights.
  bool is_antipodal_symmetric(double tol = 1e-9) const;

 private:
  std::vector<Atom> atoms_;
};

SpectralMeasure cilleruelo_measure();
SpectralMeasure tilted_cilleruelo_measure();
// n equally spaced atoms at 2πk/n; n must be a positive multiple of 4.
SpectralMeasure uniform_measure(int n);
SpectralMeasure spectral_measure_of(const LatticeCircle& circle);

// Midpoint discretisation of the uniform measure on the four arcs
// [jπ/2 − θ, jπ/2 + θ]; n atoms per arc, 4n atoms in total.
SpectralMeasure sigma_theta(double theta, int n_atoms_per_arc);

// Σ w cos(kθ). Throws AsymmetricMeasure if Σ w sin(kθ) exceeds 1e-12.
double fourier_coefficient(const SpectralMeasure& mu, int k);

enum class MomentMode { Brute, Closed };

// (1/|Λ|) Σ ⟨λ, α⟩^k with α = (cos u, sin u). Closed mode supports k ∈ {2,4,6}.
double directional_moment(const LatticeCircle& circle, double u, int k, MomentMode mode);

struct IntegerMomentReport {
  using Int = boost::multiprecision::int128_t;

  std::int64_t m = 0;
  std::size_t r2 = 0;
  Int sum_l1_4 = 0;        // Σ λ₁⁴
  Int sum_l2_4 = 0;        // Σ λ₂⁴
  Int sum_l1sq_l2sq = 0;   // Σ λ₁²λ₂²
  Int sum_l1_6 = 0;        // Σ λ₁⁶
  Int sum_l1_4_l2_2 = 0;   // Σ λ₁⁴λ₂²
  bool fourth_identity = false;  // 2(Σλ₁⁴ + Σλ₁²λ₂²) = r₂ m²
  bool sixth_identity = false;   // 2(Σλ₁⁶ + 3Σλ₁⁴λ₂²) = r₂ m³
  bool swap_symmetry = false;    // Σλ₁⁴ = Σλ₂⁴

  bool ok() const noexcept { return fourth_identity && sixth_identity && swap_symmetry; }
};

IntegerMomentReport integer_moment_identities(const LatticeCircle& circle);

// Direction of a line segment. `reduced` folds u into [0, π/4] using the
// dihedral symmetry of admissible measures; `raw` keeps u as given, for
// measures without that symmetry.
class DirectionU {
 public:
  static DirectionU reduced(double u);
  static DirectionU raw(double u);

  double radians() const noexcept { return u_; }
  Vec2 unit() const { return Vec2::polar(u_); }

 private:
  explicit DirectionU(double u) : u_(u) {}
  double u_;
};

struct ProjectedAtom {
  double position = 0.0;  // in [−1, 1]
  double weight = 0.0;
};

class ProjectedMeasure {
 public:
  explicit ProjectedMeasure(std::vector<ProjectedAtom> atoms);

  std::span<const ProjectedAtom> atoms() const noexcept { return atoms_; }
  bool has_atom_at_origin() const;

 private:
  std::vector<ProjectedAtom> atoms_;
};

inline constexpr double kProjectionMergeTol = 1e-12;

// Pushforward of mu under θ ↦ ⟨(cos θ, sin θ), (cos u, sin u)⟩, sorted by
// position. Positions within 1e-12 are merged; |position| < 1e-12 snaps to 0.
ProjectedMeasure project(const SpectralMeasure& mu, DirectionU u);

// Smallest |position| over atoms of positive weight.
double spectral_gap(const ProjectedMeasure& rho);

// Every atom within `eps` radians of a multiple of π/2.
bool is_cilleruelo_type(const SpectralMeasure& mu, double eps);

// Largest angular distance from an atom to the nearest multiple of π/2.
double max_axis_deviation(const SpectralMeasure& mu);

}  // namespace nodal
