#pragma once

// Zero counting for sampled line processes, and closed-form zero-count laws
// of the Cilleruelo field along the axis and diagonal directions.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "nodal/gaussian_fields.hpp"

namespace nodal {

struct ZeroCountOptions {
  std::optional<double> grid_step;  // default: wavelength / 40
  double refine_tol = 1e-10;
  double tangency_rel = 1e-6;  // relative to the RMS amplitude of the sample
  // Stop scanning once this many zeros are found (persistence only needs 1).
  std::optional<std::size_t> stop_after;
  // When false, a bracketed zero is reported at its cell midpoint without
  // bisection; counts are unchanged. Used where only counts matter.
  bool refine = true;
};

struct ZeroCountResult {
  std::size_t count = 0;
  std::vector<double> locations;
  bool suspicious = false;  // near-tangency or near-zero grid values seen
};

double default_grid_step(FrequencyConvention convention);

// Throws InvalidArgument if the grid step exceeds wavelength/10.
ZeroCountResult count_zeros(const LineProcess& process, const ZeroCountOptions& options = {});

struct CountDistribution {
  std::vector<std::pair<int, double>> support;  // increasing k

  double probability(int k) const;
  double mean() const;
  double second_factorial() const;
  double total() const;
};

CountDistribution exact_distribution_u0(double L);
CountDistribution exact_distribution_u_pi4(double L);

// u must equal 0 or π/4 within 1e-12; otherwise UnsupportedDirection.
double exact_persistence(double u, double L);
double exact_second_factorial(double u, double L);
CountDistribution exact_distribution(double u, double L);

enum class LineOrientation { Vertical, Horizontal };

// Nodal-free lines of a Cilleruelo field: along x_k = alpha_positive the
// field is strictly positive, along x_k = alpha_negative strictly negative,
// where k = 1 for Vertical and k = 2 for Horizontal. Angles in [0, 2π).
struct CrossingLines {
  LineOrientation orientation;
  double alpha_positive;
  double alpha_negative;
};

// Throws Tie if b₁² + c₁² = b₂² + c₂².
CrossingLines crossing_lines(double b1, double c1, double b2, double c2);

}  // namespace nodal
