#include "nodal/gaussian_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nodal/errors.hpp"

namespace nodal {

std::string_view to_string(ConventionTag tag) {
  return tag == ConventionTag::TwoPi ? "twopi" : "angular";
}

FrequencyConvention parse_convention(const std::string& name) {
  if (name == "twopi") return FrequencyConvention::two_pi();
  if (name == "angular") return FrequencyConvention::angular();
  throw Error(ErrorCode::ParseError, "convention must be 'twopi' or 'angular', got '" + name + "'");
}

namespace {

// (d/dt)^n of cos(xi t) and sin(xi t), without the xi^n factor.
struct TrigDerivative {
  double of_cos;
  double of_sin;
};

TrigDerivative trig_derivative(double c, double s, int order) {
  switch (order & 3) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

}  // namespace

PlanarField::PlanarField(std::vector<FieldTerm> terms, FrequencyConvention convention)
    : terms_(std::move(terms)), convention_(convention) {
  if (terms_.empty()) throw Error(ErrorCode::InvalidArgument, "field needs at least one term");
  double total = 0.0;
  for (const auto& t : terms_) {
    if (!(t.p > 0.0)) throw Error(ErrorCode::InvalidArgument, "pair weights must be positive");
    total += t.p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "pair weights sum to " + std::to_string(total));
}

double PlanarField::evaluate(Vec2 x) const {
  const double w = convention_.omega();
  double sum = 0.0;
  for (const auto& t : terms_) {
    const double phase = w * dot(t.direction, x);
    sum += std::sqrt(t.p) * (t.b * std::cos(phase) + t.c * std::sin(phase));
  }
  return sum;
}

Vec2 PlanarField::evaluate_grad(Vec2 x) const {
  const double w = convention_.omega();
  Vec2 g;
  for (const auto& t : terms_) {
    const double phase = w * dot(t.direction, x);
    const double slope = std::sqrt(t.p) * w * (-t.b * std::sin(phase) + t.c * std::cos(phase));
    g = g + slope * t.direction;
  }
  return g;
}

PlanarField PlanarField::scaled(double factor) const {
  auto terms = terms_;
  for (auto& t : terms) {
    t.b *= factor;
    t.c *= factor;
  }
  return PlanarField(std::move(terms), convention_);
}

std::vector<AntipodalPair> antipodal_pairs(const SpectralMeasure& mu) {
  const auto atoms = mu.atoms();
  std::vector<bool> used(atoms.size(), false);
  std::vector<AntipodalPair> pairs;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (used[i]) continue;
    std::size_t partner = atoms.size();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (j != i && !used[j] && angular_distance(atoms[j].angle, atoms[i].angle + kPi) <= 1e-9) {
        partner = j;
        break;
      }
    }
    if (partner == atoms.size())
      throw Error(ErrorCode::AsymmetricMeasure,
                  "atom at angle " + std::to_string(atoms[i].angle) + " has no antipode");
    if (std::fabs(atoms[i].weight - atoms[partner].weight) > 1e-12)
      throw Error(ErrorCode::AsymmetricMeasure, "antipodal atoms carry unequal weights");
    used[i] = used[partner] = true;
    const double angle = std::min(atoms[i].angle, atoms[partner].angle);
    pairs.push_back({angle, Vec2::polar(angle), atoms[i].weight + atoms[partner].weight});
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const AntipodalPair& a, const AntipodalPair& b) { return a.angle < b.angle; });
  return pairs;
}

WaveSampler::WaveSampler(const SpectralMeasure& mu, FrequencyConvention convention)
    : pairs_(antipodal_pairs(mu)), convention_(convention) {}

PlanarField WaveSampler::operator()(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FieldTerm> terms;
  terms.reserve(pairs_.size());
  for (const auto& pair : pairs_) {
    FieldTerm t{pair.angle, pair.direction, pair.p, 0.0, 0.0};
    t.b = normal(rng);
    t.c = normal(rng);
    terms.push_back(t);
  }
  return PlanarField(std::move(terms), convention_);
}

PlanarField sample_wave(const SpectralMeasure& mu, FrequencyConvention convention, Rng& rng) {
  return WaveSampler(mu, convention)(rng);
}

PlanarField cilleruelo_type_field(std::span<const double> phis, double eps, Rng& rng,
                                  FrequencyConvention convention) {
  if (phis.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one angle");
  for (double phi : phis) {
    if (!(std::fabs(phi) <= eps))
      throw Error(ErrorCode::AngleOutOfBand,
                  "angle " + std::to_string(phi) + " outside band " + std::to_string(eps));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double p = 1.0 / (2.0 * static_cast<double>(phis.size()));
  std::vector<FieldTerm> terms;
  terms.reserve(2 * phis.size());
  for (double phi : phis) {
    for (double angle : {phi, phi + kHalfPi}) {
      FieldTerm t{angle, Vec2::polar(angle), p, 0.0, 0.0};
      t.b = normal(rng);
      t.c = normal(rng);
      terms.push_back(t);
    }
  }
  return PlanarField(std::move(terms), convention);
}

PlanarField cilleruelo_field(double b1, double c1, double b2, double c2,
                             FrequencyConvention convention) {
  return PlanarField({{0.0, {1.0, 0.0}, 0.5, b1, c1}, {kHalfPi, {0.0, 1.0}, 0.5, b2, c2}},
                     convention);
}

LineProcess::LineProcess(const PlanarField& field, DirectionU u, double length)
    : u_(u), length_(length), convention_(field.convention()) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorCode::InvalidArgument, "segment length must be positive");
  const Vec2 alpha = u.unit();
  const double w = field.convention().omega();
  modes_.reserve(field.terms().size());
  for (const auto& t : field.terms()) {
    const double s = std::sqrt(t.p);
    modes_.push_back({w * dot(t.direction, alpha), t.p, s * t.b, s * t.c});
  }
}

double LineProcess::value(double t) const {
  double sum = 0.0;
  for (const auto& m : modes_) {
    const double x = m.xi * t;
    sum += m.cos_amp * std::cos(x) + m.sin_amp * std::sin(x);
  }
  return sum;
}

std::pair<double, double> LineProcess::value_and_slope(double t) const {
  double v = 0.0;
  double d = 0.0;
  for (const auto& m : modes_) {
    const double x = m.xi * t;
    const double c = std::cos(x);
    const double s = std::sin(x);
    v += m.cos_amp * c + m.sin_amp * s;
    d += m.xi * (m.sin_amp * c - m.cos_amp * s);
  }
  return {v, d};
}

double LineProcess::derivative(double t, int order) const {
  if (order < 0) throw Error(ErrorCode::UnsupportedOrder, "negative derivative order");
  double sum = 0.0;
  for (const auto& m : modes_) {
    const double x = m.xi * t;
    const auto d = trig_derivative(std::cos(x), std::sin(x), order);
    sum += std::pow(m.xi, order) * (m.cos_amp * d.of_cos + m.sin_amp * d.of_sin);
  }
  return sum;
}

double LineProcess::amplitude_bound() const {
  double sum = 0.0;
  for (const auto& m : modes_) sum += std::hypot(m.cos_amp, m.sin_amp);
  return sum;
}

double LineProcess::amplitude_scale() const {
  double sq = 0.0;
  for (const auto& m : modes_) sq += m.cos_amp * m.cos_amp + m.sin_amp * m.sin_amp;
  return std::sqrt(sq);
}

CovarianceKernel1D LineProcess::kernel() const {
  std::vector<KernelFrequency> freqs;
  freqs.reserve(modes_.size());
  for (const auto& m : modes_) freqs.push_back({m.xi, m.p});
  return CovarianceKernel1D(std::move(freqs));
}

LineProcess restrict(const PlanarField& field, DirectionU u, double length) {
  return LineProcess(field, u, length);
}

CovarianceKernel1D::CovarianceKernel1D(std::vector<KernelFrequency> freqs)
    : freqs_(std::move(freqs)) {
  if (freqs_.empty()) throw Error(ErrorCode::InvalidArgument, "kernel needs a frequency");
}

double CovarianceKernel1D::value(double t) const {
  double sum = 0.0;
  for (const auto& f : freqs_) sum += f.p * std::cos(f.xi * t);
  return sum;
}

double CovarianceKernel1D::d1(double t) const {
  double sum = 0.0;
  for (const auto& f : freqs_) sum -= f.p * f.xi * std::sin(f.xi * t);
  return sum;
}

double CovarianceKernel1D::d2(double t) const {
  double sum = 0.0;
  for (const auto& f : freqs_) sum -= f.p * f.xi * f.xi * std::cos(f.xi * t);
  return sum;
}

double CovarianceKernel1D::derivative(double t, int order) const {
  if (order < 0) throw Error(ErrorCode::UnsupportedOrder, "negative derivative order");
  double sum = 0.0;
  for (const auto& f : freqs_) {
    const double x = f.xi * t;
    sum += f.p * std::pow(f.xi, order) * trig_derivative(std::cos(x), std::sin(x), order).of_cos;
  }
  return sum;
}

double CovarianceKernel1D::one_minus(double t) const {
  double sum = 0.0;
  for (const auto& f : freqs_) {
    const double s = std::sin(0.5 * f.xi * t);
    sum += 2.0 * f.p * s * s;
  }
  return sum + (1.0 - total_weight());
}

double CovarianceKernel1D::one_plus(double t) const {
  double sum = 0.0;
  for (const auto& f : freqs_) {
    const double c = std::cos(0.5 * f.xi * t);
    sum += 2.0 * f.p * c * c;
  }
  return sum + (1.0 - total_weight());
}

double CovarianceKernel1D::second_spectral_moment() const {
  double sum = 0.0;
  for (const auto& f : freqs_) sum += f.p * f.xi * f.xi;
  return sum;
}

double CovarianceKernel1D::total_weight() const {
  double sum = 0.0;
  for (const auto& f : freqs_) sum += f.p;
  return sum;
}

CovarianceKernel1D covariance_kernel(const SpectralMeasure& mu, DirectionU u,
                                     FrequencyConvention convention) {
  const Vec2 alpha = u.unit();
  const double w = convention.omega();
  std::vector<KernelFrequency> freqs;
  for (const auto& pair : antipodal_pairs(mu)) freqs.push_back({w * dot(pair.direction, alpha), pair.p});
  return CovarianceKernel1D(std::move(freqs));
}

nlohmann::json field_to_json(const PlanarField& field) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : field.terms())
    terms.push_back({{"angle", t.angle}, {"p", t.p}, {"b", t.b}, {"c", t.c}});
  return {{"convention", std::string(to_string(field.convention().tag))}, {"terms", terms}};
}

PlanarField field_from_json(const nlohmann::json& doc) {
  try {
    const auto conv = parse_convention(doc.at("convention").get<std::string>());
    std::vector<FieldTerm> terms;
    for (const auto& item : doc.at("terms")) {
      const double angle = item.at("angle").get<double>();
      terms.push_back({angle, Vec2::polar(angle), item.at("p").get<double>(),
                       item.at("b").get<double>(), item.at("c").get<double>()});
    }
    return PlanarField(std::move(terms), conv);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field document: ") + e.what());
  }
}

std::vector<GridSample> evaluate_grid(const PlanarField& field, double x0, double x1, double y0,
                                      double y1, int resolution) {
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be >= 2");
  std::vector<GridSample> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  const double hx = (x1 - x0) / (resolution - 1);
  const double hy = (y1 - y0) / (resolution - 1);
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = y0 + iy * hy;
    for (int ix = 0; ix < resolution; ++ix) {
      const double x = x0 + ix * hx;
      out.push_back({x, y, field.evaluate({x, y})});
    }
  }
  return out;
}

}  // namespace nodal
