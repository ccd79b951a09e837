#include "nodal/lattice_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "nodal/errors.hpp"

namespace nodal {

double LatticePoint::angle() const {
  return canonical_angle(std::atan2(static_cast<double>(lambda2), static_cast<double>(lambda1)));
}

LatticeCircle::LatticeCircle(std::int64_t m, std::vector<LatticePoint> points)
    : m_(m), points_(std::move(points)) {
  if (m_ < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  if (points_.empty() || points_.size() % 4 != 0)
    throw Error(ErrorCode::InvalidArgument, "point count must be a positive multiple of 4");
  for (const auto& p : points_) {
    if (p.lambda1 * p.lambda1 + p.lambda2 * p.lambda2 != m_)
      throw Error(ErrorCode::InvalidArgument, "point not on circle");
  }
  auto contains = [&](std::int64_t a, std::int64_t b) {
    return std::find(points_.begin(), points_.end(), LatticePoint{a, b}) != points_.end();
  };
  for (const auto& p : points_) {
    if (!contains(-p.lambda1, -p.lambda2) || !contains(-p.lambda2, p.lambda1))
      throw Error(ErrorCode::InvalidArgument, "point set lacks rotational symmetry");
  }
}

std::int64_t integer_sqrt(std::int64_t n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "integer_sqrt of negative");
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

namespace {

std::vector<LatticePoint> scan_points(std::int64_t m) {
  std::vector<LatticePoint> pts;
  const std::int64_t s = integer_sqrt(m);
  for (std::int64_t a = -s; a <= s; ++a) {
    const std::int64_t rest = m - a * a;
    const std::int64_t b = integer_sqrt(rest);
    if (b * b != rest) continue;
    pts.push_back({a, b});
    if (b != 0) pts.push_back({a, -b});
  }
  return pts;
}

}  // namespace

LatticeCircle enumerate_lattice_points(std::int64_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1, got " + std::to_string(m));
  auto pts = scan_points(m);
  if (pts.empty())
    throw Error(ErrorCode::NotRepresentable, std::to_string(m) + " is not a sum of two squares");
  std::sort(pts.begin(), pts.end(),
            [](const LatticePoint& p, const LatticePoint& q) { return p.angle() < q.angle(); });
  return LatticeCircle(m, std::move(pts));
}

bool is_sum_of_two_squares(std::int64_t m) {
  if (m < 1) return false;
  const std::int64_t s = integer_sqrt(m);
  for (std::int64_t a = 0; a <= s; ++a) {
    const std::int64_t rest = m - a * a;
    const std::int64_t b = integer_sqrt(rest);
    if (b * b == rest) return true;
  }
  return false;
}

namespace {

bool has_matching_atom(const std::vector<Atom>& atoms, double angle, double weight, double tol) {
  for (const auto& a : atoms) {
    if (angular_distance(a.angle, angle) <= tol && std::fabs(a.weight - weight) <= 1e-12)
      return true;
  }
  return false;
}

}  // namespace

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms, SymmetryCheck check)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorCode::InvalidArgument, "measure has no atoms");
  double total = 0.0;
  for (auto& a : atoms_) {
    if (!std::isfinite(a.angle) || !std::isfinite(a.weight) || a.weight < 0.0)
      throw Error(ErrorCode::InvalidArgument, "atom weights must be finite and nonnegative");
    a.angle = canonical_angle(a.angle);
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "weights sum to " + std::to_string(total));
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.angle < b.angle; });
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const std::size_t j = (i + 1) % atoms_.size();
    if (i != j && angular_distance(atoms_[i].angle, atoms_[j].angle) <= 1e-12)
      throw Error(ErrorCode::InvalidArgument, "duplicate atom angles");
  }
  if (check == SymmetryCheck::Required && !is_dihedral_symmetric())
    throw Error(ErrorCode::AsymmetricMeasure,
                "measure not invariant under rotation by pi/2 and reflection");
}

bool SpectralMeasure::is_dihedral_symmetric(double tol) const {
  for (const auto& a : atoms_) {
    if (!has_matching_atom(atoms_, a.angle + kHalfPi, a.weight, tol)) return false;
    if (!has_matching_atom(atoms_, -a.angle, a.weight, tol)) return false;
  }
  return true;
}

bool SpectralMeasure::is_antipodal_symmetric(double tol) const {
  for (const auto& a : atoms_) {
    if (!has_matching_atom(atoms_, a.angle + kPi, a.weight, tol)) return false;
  }
  return true;
}

SpectralMeasure cilleruelo_measure() {
  return SpectralMeasure({{0.0, 0.25}, {kHalfPi, 0.25}, {kPi, 0.25}, {3.0 * kHalfPi, 0.25}});
}

SpectralMeasure tilted_cilleruelo_measure() {
  std::vector<Atom> atoms;
  for (int j = 0; j < 4; ++j) atoms.push_back({kQuarterPi + j * kHalfPi, 0.25});
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure uniform_measure(int n) {
  if (n < 4 || n % 4 != 0)
    throw Error(ErrorCode::InvalidArgument, "uniform measure needs a positive multiple of 4 atoms");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) atoms.push_back({kTwoPi * k / n, 1.0 / n});
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure spectral_measure_of(const LatticeCircle& circle) {
  const double w = 1.0 / static_cast<double>(circle.r2());
  std::vector<Atom> atoms;
  atoms.reserve(circle.r2());
  for (const auto& p : circle.points()) atoms.push_back({p.angle(), w});
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure sigma_theta(double theta, int n_atoms_per_arc) {
  if (!(theta > 0.0) || theta > kQuarterPi + 1e-15)
    throw Error(ErrorCode::InvalidTheta, "theta must lie in (0, pi/4], got " + std::to_string(theta));
  if (n_atoms_per_arc < 1)
    throw Error(ErrorCode::InvalidArgument, "n_atoms_per_arc must be >= 1");
  const double h = 2.0 * theta / n_atoms_per_arc;
  const double w = 1.0 / (4.0 * n_atoms_per_arc);
  std::vector<Atom> atoms;
  atoms.reserve(4 * static_cast<std::size_t>(n_atoms_per_arc));
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < n_atoms_per_arc; ++i) {
      // Offset from the arc centre, symmetric in i ↦ n−1−i.
      const double offset = (i + 0.5) * h - theta;
      atoms.push_back({j * kHalfPi + offset, w});
    }
  }
  return SpectralMeasure(std::move(atoms));
}

double fourier_coefficient(const SpectralMeasure& mu, int k) {
  double re = 0.0;
  double im = 0.0;
  for (const auto& a : mu.atoms()) {
    re += a.weight * std::cos(k * a.angle);
    im += a.weight * std::sin(k * a.angle);
  }
  if (std::fabs(im) > 1e-12)
    throw Error(ErrorCode::AsymmetricMeasure,
                "imaginary part of Fourier coefficient is " + std::to_string(im));
  return re;
}

double directional_moment(const LatticeCircle& circle, double u, int k, MomentMode mode) {
  if (k < 0 || k % 2 != 0)
    throw Error(ErrorCode::UnsupportedOrder, "moment order must be a nonnegative even integer");
  const double m = static_cast<double>(circle.m());
  if (mode == MomentMode::Brute) {
    const double cu = std::cos(u);
    const double su = std::sin(u);
    double sum = 0.0;
    for (const auto& p : circle.points()) {
      const double proj = static_cast<double>(p.lambda1) * cu + static_cast<double>(p.lambda2) * su;
      sum += std::pow(proj, k);
    }
    return sum / static_cast<double>(circle.r2());
  }
  const double nu4 = fourier_coefficient(spectral_measure_of(circle), 4);
  const double c4 = std::cos(4.0 * u);
  switch (k) {
    case 2: return m / 2.0;
    case 4: return m * m / 8.0 * (3.0 + nu4 * c4);
    case 6: return m * m * m / 16.0 * (5.0 + 3.0 * nu4 * c4);
    default:
      throw Error(ErrorCode::UnsupportedOrder,
                  "closed form available only for k in {2,4,6}, got " + std::to_string(k));
  }
}

IntegerMomentReport integer_moment_identities(const LatticeCircle& circle) {
  using Int = IntegerMomentReport::Int;
  IntegerMomentReport rep;
  rep.m = circle.m();
  rep.r2 = circle.r2();
  for (const auto& p : circle.points()) {
    const Int a2 = Int(p.lambda1) * p.lambda1;
    const Int b2 = Int(p.lambda2) * p.lambda2;
    rep.sum_l1_4 += a2 * a2;
    rep.sum_l2_4 += b2 * b2;
    rep.sum_l1sq_l2sq += a2 * b2;
    rep.sum_l1_6 += a2 * a2 * a2;
    rep.sum_l1_4_l2_2 += a2 * a2 * b2;
  }
  const Int m = rep.m;
  const Int r2 = static_cast<long long>(rep.r2);
  rep.fourth_identity = 2 * (rep.sum_l1_4 + rep.sum_l1sq_l2sq) == r2 * m * m;
  rep.sixth_identity = 2 * (rep.sum_l1_6 + 3 * rep.sum_l1_4_l2_2) == r2 * m * m * m;
  rep.swap_symmetry = rep.sum_l1_4 == rep.sum_l2_4;
  return rep;
}

DirectionU DirectionU::reduced(double u) {
  if (!std::isfinite(u)) throw Error(ErrorCode::InvalidArgument, "direction must be finite");
  double r = std::fmod(u, kHalfPi);
  if (r < 0.0) r += kHalfPi;
  if (r > kQuarterPi) r = kHalfPi - r;
  return DirectionU(r);
}

DirectionU DirectionU::raw(double u) {
  if (!std::isfinite(u)) throw Error(ErrorCode::InvalidArgument, "direction must be finite");
  return DirectionU(u);
}

ProjectedMeasure::ProjectedMeasure(std::vector<ProjectedAtom> atoms) : atoms_(std::move(atoms)) {}

bool ProjectedMeasure::has_atom_at_origin() const {
  return std::any_of(atoms_.begin(), atoms_.end(),
                     [](const ProjectedAtom& a) { return a.position == 0.0 && a.weight > 0.0; });
}

ProjectedMeasure project(const SpectralMeasure& mu, DirectionU u) {
  const Vec2 alpha = u.unit();
  std::vector<ProjectedAtom> raw;
  raw.reserve(mu.size());
  for (const auto& a : mu.atoms()) raw.push_back({dot(Vec2::polar(a.angle), alpha), a.weight});
  std::sort(raw.begin(), raw.end(),
            [](const ProjectedAtom& a, const ProjectedAtom& b) { return a.position < b.position; });

  std::vector<ProjectedAtom> merged;
  std::size_t i = 0;
  while (i < raw.size()) {
    const double anchor = raw[i].position;
    double w = 0.0;
    double wx = 0.0;
    std::size_t j = i;
    for (; j < raw.size() && raw[j].position - anchor <= kProjectionMergeTol; ++j) {
      w += raw[j].weight;
      wx += raw[j].weight * raw[j].position;
    }
    double pos = w > 0.0 ? wx / w : anchor;
    if (std::fabs(pos) < kProjectionMergeTol) pos = 0.0;
    merged.push_back({pos, w});
    i = j;
  }
  return ProjectedMeasure(std::move(merged));
}

double spectral_gap(const ProjectedMeasure& rho) {
  double gap = 1.0;
  for (const auto& a : rho.atoms()) {
    if (a.weight > 0.0) gap = std::min(gap, std::fabs(a.position));
  }
  return gap;
}

double max_axis_deviation(const SpectralMeasure& mu) {
  double worst = 0.0;
  for (const auto& a : mu.atoms()) {
    const double r = std::fmod(a.angle, kHalfPi);
    worst = std::max(worst, std::min(r, kHalfPi - r));
  }
  return worst;
}

bool is_cilleruelo_type(const SpectralMeasure& mu, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
  return max_axis_deviation(mu) <= eps + 1e-12;
}

}  // namespace nodal
