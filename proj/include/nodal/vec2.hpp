#pragma once

#include <cmath>
#include <numbers>

namespace nodal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;
inline constexpr double kQuarterPi = 0.25 * std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  static Vec2 polar(double angle) { return {std::cos(angle), std::sin(angle)}; }

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Angle folded into [0, 2π).
inline double canonical_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

// Distance between two angles on the circle, in [0, π].
inline double angular_distance(double a, double b) {
  double d = std::fabs(canonical_angle(a) - canonical_angle(b));
  return d > kPi ? kTwoPi - d : d;
}

}  // namespace nodal
