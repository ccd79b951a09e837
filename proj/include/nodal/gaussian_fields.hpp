#pragma once

// Stationary Gaussian fields on the plane realised as finite trigonometric
// sums, their restrictions to line segments and the covariance of those
// restrictions.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nodal/lattice_spectral.hpp"
#include "nodal/rng.hpp"
#include "nodal/vec2.hpp"

namespace nodal {

enum class ConventionTag { TwoPi, Angular };

// Frequency scale ω applied to ⟨direction, x⟩: 2π for lattice waves on the
// unit torus, 1 for the Cilleruelo field written in cos(x₁) form.
struct FrequencyConvention {
  ConventionTag tag = ConventionTag::TwoPi;

  static constexpr FrequencyConvention two_pi() { return {ConventionTag::TwoPi}; }
  static constexpr FrequencyConvention angular() { return {ConventionTag::Angular}; }

  double omega() const noexcept { return tag == ConventionTag::TwoPi ? kTwoPi : 1.0; }
  double wavelength() const noexcept { return kTwoPi / omega(); }
  friend bool operator==(FrequencyConvention, FrequencyConvention) = default;
};

std::string_view to_string(ConventionTag tag);
FrequencyConvention parse_convention(const std::string& name);

// One antipodal pair {y, −y} of the spectrum: contributes
// √p·(b cos(ω⟨y,x⟩) + c sin(ω⟨y,x⟩)).
struct FieldTerm {
  double angle = 0.0;
  Vec2 direction;
  double p = 0.0;
  double b = 0.0;
  double c = 0.0;
};

class LineProcess;

class PlanarField {
 public:
  PlanarField(std::vector<FieldTerm> terms, FrequencyConvention convention);

  std::span<const FieldTerm> terms() const noexcept { return terms_; }
  FrequencyConvention convention() const noexcept { return convention_; }

  double evaluate(Vec2 x) const;
  Vec2 evaluate_grad(Vec2 x) const;

  // Copy with every b and c multiplied by `factor`.
  PlanarField scaled(double factor) const;

 private:
  std::vector<FieldTerm> terms_;
  FrequencyConvention convention_;
};

// Antipodal pairs of a measure: one representative per pair (the smaller
// angle, which lies in [0, π)) with the pair's combined weight, in increasing
// angle order. Throws AsymmetricMeasure if an atom lacks an antipode of equal
// weight.
struct AntipodalPair {
  double angle;
  Vec2 direction;
  double p;
};
std::vector<AntipodalPair> antipodal_pairs(const SpectralMeasure& mu);

// Draws b then c for each pair in canonical order.
PlanarField sample_wave(const SpectralMeasure& mu, FrequencyConvention convention, Rng& rng);

// sample_wave with the antipodal pairing computed once, for repeated draws.
class WaveSampler {
 public:
  WaveSampler(const SpectralMeasure& mu, FrequencyConvention convention);
  PlanarField operator()(Rng& rng) const;
  FrequencyConvention convention() const noexcept { return convention_; }

 private:
  std::vector<AntipodalPair> pairs_;
  FrequencyConvention convention_;
};

// Field with directions (cos φ, sin φ) and (−sin φ, cos φ) for every φ,
// each of weight 1/(2M). Throws AngleOutOfBand if some |φ| > eps.
PlanarField cilleruelo_type_field(std::span<const double> phis, double eps, Rng& rng,
                                  FrequencyConvention convention = FrequencyConvention::angular());

// Deterministic Cilleruelo field √2/2·(b₁cos x₁ + c₁sin x₁ + b₂cos x₂ + c₂sin x₂).
PlanarField cilleruelo_field(double b1, double c1, double b2, double c2,
                             FrequencyConvention convention = FrequencyConvention::angular());

// t ↦ Σ cos_amp·cos(xi t) + sin_amp·sin(xi t).
struct LineMode {
  double xi = 0.0;
  double p = 0.0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

class CovarianceKernel1D;

class LineProcess {
 public:
  LineProcess(const PlanarField& field, DirectionU u, double length);

  double length() const noexcept { return length_; }
  DirectionU direction() const noexcept { return u_; }
  FrequencyConvention convention() const noexcept { return convention_; }
  std::span<const LineMode> modes() const noexcept { return modes_; }

  double value(double t) const;
  double derivative(double t, int order) const;
  // (value, first derivative) sharing one trigonometric evaluation.
  std::pair<double, double> value_and_slope(double t) const;

  // √(Σ cos_amp² + sin_amp²), an upper bound on |value|.
  double amplitude_bound() const;
  // RMS of the realised amplitudes, used as a tangency scale.
  double amplitude_scale() const;

  CovarianceKernel1D kernel() const;

 private:
  std::vector<LineMode> modes_;
  DirectionU u_;
  double length_;
  FrequencyConvention convention_;
};

LineProcess restrict(const PlanarField& field, DirectionU u, double length);

struct KernelFrequency {
  double xi = 0.0;
  double p = 0.0;
};

// κ(t) = Σ p cos(ξ t) and its derivatives.
class CovarianceKernel1D {
 public:
  explicit CovarianceKernel1D(std::vector<KernelFrequency> freqs);

  std::span<const KernelFrequency> frequencies() const noexcept { return freqs_; }

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double derivative(double t, int order) const;

  // 1 − κ(t) and 1 + κ(t) without cancellation.
  double one_minus(double t) const;
  double one_plus(double t) const;

  // Σ p ξ² = −κ″(0).
  double second_spectral_moment() const;
  double total_weight() const;

 private:
  std::vector<KernelFrequency> freqs_;
};

CovarianceKernel1D covariance_kernel(const SpectralMeasure& mu, DirectionU u,
                                     FrequencyConvention convention);

nlohmann::json field_to_json(const PlanarField& field);
PlanarField field_from_json(const nlohmann::json& doc);

struct GridSample {
  double x;
  double y;
  double value;
};

// resolution × resolution samples on [x0, x1] × [y0, y1], row-major in y then x.
std::vector<GridSample> evaluate_grid(const PlanarField& field, double x0, double x1, double y0,
                                      double y1, int resolution);

}  // namespace nodal
