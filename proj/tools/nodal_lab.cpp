// nodal_lab: command-line front end for the nodal intersection toolkit.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodal/coupling.hpp"
#include "nodal/errors.hpp"
#include "nodal/gaussian_fields.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/lattice_spectral.hpp"
#include "nodal/measure_io.hpp"
#include "nodal/monte_carlo.hpp"
#include "nodal/output.hpp"
#include "nodal/rng.hpp"
#include "nodal/zero_counter.hpp"

namespace {

using nlohmann::json;
using namespace nodal;

struct Globals {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string verify;
};

// Rows whose cells are JSON scalars; rendered either as CSV or as an array
// of objects keyed by column name. Null cells become empty CSV fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;
  json extras = json::object();

  void add(std::vector<json> r) { rows.push_back(std::move(r)); }
};

std::string cell_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  return format_number(v.get<double>());
}

bool wants_json(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

void emit(const Globals& g, const RunConfig& run, const Table& table, const std::string& summary) {
  if (!g.out.empty()) {
    if (wants_json(g.out)) {
      json rows = json::array();
      for (const auto& r : table.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < r.size(); ++i) obj[table.header[i]] = r[i];
        rows.push_back(std::move(obj));
      }
      json results = table.extras;
      results["rows"] = std::move(rows);
      write_text_file(g.out, render_json(run, results));
    } else {
      CsvTable csv(table.header);
      for (const auto& r : table.rows) {
        std::vector<std::string> cells;
        for (const auto& v : r) cells.push_back(cell_text(v));
        csv.row(std::move(cells));
      }
      write_text_file(g.out, csv.render(run));
    }
  }
  std::cout << summary << '\n';
}

std::string fmt(double v) { return format_number(v); }

// Options shared by the measure-driven subcommands.
struct MeasureOptions {
  std::string measure = "cilleruelo";
  std::string convention = "auto";

  void attach(CLI::App* cmd) {
    cmd->add_option("--measure", measure,
                    "cilleruelo | tilted | uniform:<n> | sigma:<theta>:<n> | lattice:<m> | <file>")
        ->capture_default_str();
    cmd->add_option("--convention", convention,
                    "twopi | angular | auto (angular for cilleruelo, tilted and sigma; "
                    "twopi otherwise)")
        ->capture_default_str();
  }

  NamedMeasure resolve() const { return resolve_measure(measure); }

  FrequencyConvention resolve_convention(MeasureKind kind) const {
    if (convention != "auto") return parse_convention(convention);
    switch (kind) {
      case MeasureKind::Cilleruelo:
      case MeasureKind::Tilted:
      case MeasureKind::Sigma:
        return FrequencyConvention::angular();
      default:
        return FrequencyConvention::two_pi();
    }
  }
};

void require(bool ok, const std::string& flag, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, flag + ": " + what);
}

json measure_config(const MeasureOptions& m, FrequencyConvention conv) {
  return {{"measure", m.measure}, {"convention", std::string(to_string(conv.tag))}};
}

// ---------------------------------------------------------------- lattice

struct LatticeCmd {
  std::int64_t m = 0;
  std::optional<double> u;

  void attach(CLI::App* cmd) {
    cmd->add_option("--m", m, "integer m = a² + b²")->required();
    cmd->add_option("--u", u, "direction in radians for the directional moments");
  }

  void run(const Globals& g) const {
    const auto circle = enumerate_lattice_points(m);
    const auto mu = spectral_measure_of(circle);
    const double nu4 = fourier_coefficient(mu, 4);
    const auto ids = integer_moment_identities(circle);

    RunConfig run;
    run.seed = g.seed;
    run.config = {{"command", "lattice"}, {"m", m}};
    if (u) run.config["u"] = *u;

    Table t;
    t.header = {"lambda1", "lambda2", "angle"};
    for (const auto& p : circle.points()) t.add({p.lambda1, p.lambda2, p.angle()});
    t.extras["m"] = m;
    t.extras["r2"] = circle.r2();
    t.extras["nu4"] = nu4;
    t.extras["identities"] = {{"fourth", ids.fourth_identity},
                              {"sixth", ids.sixth_identity},
                              {"swap", ids.swap_symmetry}};
    std::string summary = "m=" + std::to_string(m) + " r2=" + std::to_string(circle.r2()) +
                          " nu4=" + fmt(nu4) + " identities=" + (ids.ok() ? "ok" : "FAILED");
    if (u) {
      json moments = json::array();
      for (int k : {2, 4, 6}) {
        const double brute = directional_moment(circle, *u, k, MomentMode::Brute);
        const double closed = directional_moment(circle, *u, k, MomentMode::Closed);
        moments.push_back({{"k", k}, {"brute", brute}, {"closed", closed}});
        summary += " M" + std::to_string(k) + "=" + fmt(closed);
      }
      t.extras["moments"] = moments;
    }
    emit(g, run, t, summary);
  }
};

// ---------------------------------------------------------------- sample

std::vector<double> default_window(FrequencyConvention conv) {
  const double w = 2.0 * conv.wavelength();
  return {0.0, w, 0.0, w};
}

void write_grid(const Globals& g, const RunConfig& run, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns, const json& meta,
                const std::string& summary) {
  if (!g.out.empty()) {
    CsvTable csv(header);
    const std::size_t n = columns.front().size();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> cells;
      for (const auto& c : columns) cells.push_back(format_number(c[i]));
      csv.row(std::move(cells));
    }
    write_text_file(g.out, csv.render(run));
    write_text_file(g.out + ".meta.json", render_json(run, meta));
  }
  std::cout << summary << '\n';
}

struct SampleCmd {
  MeasureOptions mo;
  double u = 0.0;
  double L = 10.0;
  std::size_t samples = 1;
  std::string field_file;
  bool grid = false;
  std::vector<double> window;
  int resolution = 256;

  void attach(CLI::App* cmd) {
    mo.attach(cmd);
    cmd->add_option("--u", u, "direction of the segment, radians")->capture_default_str();
    cmd->add_option("--L", L, "segment length")->capture_default_str();
    cmd->add_option("--samples", samples, "number of independent waves")->capture_default_str();
    cmd->add_option("--field", field_file, "replay a saved field JSON instead of sampling");
    cmd->add_flag("--grid", grid, "export the first wave on a grid as (x, y, value)");
    cmd->add_option("--window", window, "grid window x0 x1 y0 y1 (default two wavelengths)")
        ->expected(4);
    cmd->add_option("--resolution", resolution, "grid points per side (>= 32)")
        ->capture_default_str();
  }

  void run(const Globals& g) const {
    std::optional<PlanarField> replay;
    std::optional<NamedMeasure> named;
    FrequencyConvention conv;
    RunConfig run;
    run.seed = g.seed;
    if (!field_file.empty()) {
      std::ifstream in(field_file);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + field_file);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, field_file + ": " + e.what());
      }
      replay = field_from_json(doc);
      conv = replay->convention();
      run.config = {{"field", field_to_json(*replay)}};
    } else {
      named = mo.resolve();
      conv = mo.resolve_convention(named->kind);
      run.config = measure_config(mo, conv);
    }
    run.config["command"] = "sample";
    const WaveSampler* sampler = nullptr;
    std::optional<WaveSampler> sampler_storage;
    if (named) {
      sampler_storage.emplace(named->measure, conv);
      sampler = &*sampler_storage;
    }
    auto draw = [&](std::size_t i) {
      if (replay) return *replay;
      Rng rng = make_stream(g.seed, i);
      return (*sampler)(rng);
    };

    if (grid) {
      require(resolution >= 32, "--resolution", "must be at least 32");
      const auto win = window.empty() ? default_window(conv) : window;
      require(win[1] > win[0] && win[3] > win[2], "--window", "needs x0 < x1 and y0 < y1");
      run.config["grid"] = {{"window", win}, {"resolution", resolution}};
      const PlanarField field = draw(0);
      const auto pts = evaluate_grid(field, win[0], win[1], win[2], win[3], resolution);
      std::vector<std::vector<double>> cols(3);
      for (const auto& p : pts) {
        cols[0].push_back(p.x);
        cols[1].push_back(p.y);
        cols[2].push_back(p.value);
      }
      json meta = {{"measure", named ? named->spec : field_file},
                   {"seed", g.seed},
                   {"field", field_to_json(field)}};
      if (named && named->kind == MeasureKind::Cilleruelo) {
        const auto terms = field.terms();
        const auto lines = crossing_lines(terms[0].b, terms[0].c, terms[1].b, terms[1].c);
        meta["crossing_lines"] = {
            {"orientation", lines.orientation == LineOrientation::Vertical ? "vertical"
                                                                            : "horizontal"},
            {"alpha_positive", lines.alpha_positive},
            {"alpha_negative", lines.alpha_negative}};
      }
      write_grid(g, run, {"x", "y", "value"}, cols, meta,
                 "grid " + std::to_string(resolution) + "x" + std::to_string(resolution) +
                     " points=" + std::to_string(pts.size()));
      return;
    }

    require(samples >= 1, "--samples", "must be at least 1");
    require(L > 0.0, "--L", "must be positive");
    run.config["u"] = u;
    run.config["L"] = L;
    run.config["samples"] = samples;
    std::vector<ZeroCountResult> results(samples);
    std::vector<json> fields(samples);
    const bool keep_fields = wants_json(g.out);
    parallel_for_index(samples, g.workers, [&](std::size_t i) {
      const PlanarField field = draw(i);
      results[i] = count_zeros(LineProcess(field, DirectionU::raw(u), L));
      if (keep_fields) fields[i] = field_to_json(field);
    });
    Table t;
    t.header = {"sample_id", "t"};
    std::size_t total = 0;
    json per_sample = json::array();
    for (std::size_t i = 0; i < samples; ++i) {
      for (double z : results[i].locations) t.add({i, z});
      total += results[i].count;
      if (keep_fields)
        per_sample.push_back({{"sample_id", i},
                              {"count", results[i].count},
                              {"suspicious", results[i].suspicious},
                              {"field", fields[i]}});
    }
    if (keep_fields) t.extras["samples"] = per_sample;
    emit(g, run, t,
         "samples=" + std::to_string(samples) + " zeros=" + std::to_string(total) +
             " mean=" + fmt(static_cast<double>(total) / static_cast<double>(samples)));
  }
};

// ---------------------------------------------------------------- moments

bool special_direction(double u) {
  return std::fabs(u) <= 1e-12 || std::fabs(u - kQuarterPi) <= 1e-12;
}

struct MomentsCmd {
  MeasureOptions mo;
  double u = 0.0;
  double L = 10.0;
  std::size_t samples = 10000;
  std::optional<double> grid_step;

  void attach(CLI::App* cmd) {
    mo.attach(cmd);
    cmd->add_option("--u", u, "direction, radians")->capture_default_str();
    cmd->add_option("--L", L, "segment length")->capture_default_str();
    cmd->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    cmd->add_option("--grid-step", grid_step, "zero-scan step (default wavelength/40)");
  }

  void run(const Globals& g) const {
    const auto named = mo.resolve();
    const auto conv = mo.resolve_convention(named.kind);
    ExperimentConfig cfg;
    cfg.convention = conv;
    cfg.u = u;
    cfg.L = L;
    cfg.n_samples = samples;
    cfg.seed = g.seed;
    cfg.grid_step = grid_step;
    cfg.workers = g.workers;
    require(samples >= 1, "--samples", "must be at least 1");
    require(L > 0.0, "--L", "must be positive");

    RunConfig run;
    run.seed = g.seed;
    run.config = measure_config(mo, conv);
    run.config.update({{"command", "moments"}, {"u", u}, {"L", L}, {"samples", samples}});
    if (grid_step) run.config["grid_step"] = *grid_step;

    const auto est = estimate(named.measure, cfg);
    const KacRiceContext ctx(covariance_kernel(named.measure, DirectionU::raw(u), conv));
    Table t;
    t.header = {"quantity", "value", "se"};
    t.add({"mean", est.mean.value, est.mean.se});
    t.add({"second_factorial", est.second_factorial.value, est.second_factorial.se});
    t.add({"variance", est.variance.value, est.variance.se});
    t.add({"persistence", est.persistence.value, est.persistence.se});
    t.add({"kac_rice_mean", expected_zero_count(ctx, L), nullptr});
    for (const auto& [k, c] : est.histogram) {
      const double p = static_cast<double>(c) / static_cast<double>(samples);
      t.add({"P(Z=" + std::to_string(k) + ")", p, binomial_se(p, samples)});
    }
    t.add({"suspicious_samples", est.suspicious, nullptr});
    if (named.kind == MeasureKind::Cilleruelo && special_direction(u)) {
      const auto exact = exact_distribution(u, L);
      const auto gof = compare_distribution(est.histogram, samples, exact);
      t.add({"exact_mean", exact.mean(), nullptr});
      t.add({"exact_second_factorial", exact.second_factorial(), nullptr});
      t.add({"total_variation", gof.total_variation, nullptr});
      t.add({"chi_square_p_value", gof.p_value, nullptr});
    }
    emit(g, run, t,
         "mean=" + fmt(est.mean.value) + " se=" + fmt(est.mean.se) +
             " second_factorial=" + fmt(est.second_factorial.value) +
             " persistence=" + fmt(est.persistence.value));
  }
};

// ---------------------------------------------------------------- persistence

struct PersistenceCmd {
  MeasureOptions mo;
  std::vector<double> us{0.0};
  std::vector<double> lengths{10.0};
  std::size_t samples = 10000;

  void attach(CLI::App* cmd) {
    mo.attach(cmd);
    cmd->add_option("--u", us, "direction(s), radians")->delimiter(',')->capture_default_str();
    cmd->add_option("--L", lengths, "segment length(s)")->delimiter(',')->capture_default_str();
    cmd->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
  }

  void run(const Globals& g) const {
    const auto named = mo.resolve();
    const auto conv = mo.resolve_convention(named.kind);
    require(samples >= 1, "--samples", "must be at least 1");
    for (double L : lengths) require(L > 0.0, "--L", "lengths must be positive");

    RunConfig run;
    run.seed = g.seed;
    run.config = measure_config(mo, conv);
    run.config.update({{"command", "persistence"}, {"u", us}, {"L", lengths}, {"samples", samples}});

    Table t;
    t.header = {"u", "L", "persistence", "se", "zero", "rule_of_three", "exact"};
    std::string summary;
    for (double u : us) {
      std::vector<double> xs, ys;
      for (double L : lengths) {
        ExperimentConfig cfg;
        cfg.convention = conv;
        cfg.u = u;
        cfg.L = L;
        cfg.n_samples = samples;
        cfg.seed = g.seed;
        cfg.workers = g.workers;
        const auto p = estimate_persistence(named.measure, cfg);
        json exact = nullptr;
        if (named.kind == MeasureKind::Cilleruelo && special_direction(u))
          exact = exact_persistence(u, L);
        t.add({u, L, p.value, p.se, p.value == 0.0, 3.0 / static_cast<double>(samples), exact});
        if (p.value > 0.0) {
          xs.push_back(L);
          ys.push_back(-std::log(p.value));
        }
        if (!summary.empty()) summary += "; ";
        summary += "u=" + fmt(u) + " L=" + fmt(L) + " persistence=" + fmt(p.value) +
                   " se=" + fmt(p.se);
      }
      if (xs.size() >= 2) {
        const double slope = loglog_slope(xs, ys);
        t.extras["loglog_slope"][fmt(u)] = slope;
        summary += " slope=" + fmt(slope);
      }
    }
    emit(g, run, t, summary);
  }
};

// ---------------------------------------------------------------- kacrice

struct KacRiceCmd {
  MeasureOptions mo;
  double u = 0.0;
  std::vector<double> lengths{0.1};

  void attach(CLI::App* cmd) {
    mo.attach(cmd);
    cmd->add_option("--u", u, "direction, radians")->capture_default_str();
    cmd->add_option("--L", lengths, "segment length(s)")->delimiter(',')->capture_default_str();
  }

  void run(const Globals& g) const {
    const auto named = mo.resolve();
    const auto conv = mo.resolve_convention(named.kind);
    for (double L : lengths) require(L > 0.0, "--L", "lengths must be positive");
    RunConfig run;
    run.seed = g.seed;
    run.config = measure_config(mo, conv);
    run.config.update({{"command", "kacrice"}, {"u", u}, {"L", lengths}});

    const KacRiceContext ctx(covariance_kernel(named.measure, DirectionU::raw(u), conv));
    // The short-segment asymptotics are stated for integer frequencies.
    const bool lattice_scale = conv.tag == ConventionTag::TwoPi;
    const AsymptoticInputs in{fourier_coefficient(named.measure, 4), DirectionU::raw(u)};

    Table t;
    t.header = {"L",          "expected_zeros",         "second_factorial", "quadrature_error",
                "asymptotic", "degenerate_asymptotic", "ratio"};
    std::string summary;
    for (double L : lengths) {
      const auto q = second_factorial_moment_numeric(ctx, L);
      json asym = nullptr;
      json degenerate = nullptr;
      json ratio = nullptr;
      if (lattice_scale) {
        const double a = second_factorial_moment_asymptotic(in, L);
        asym = a;
        double reference = a;
        try {
          reference = degenerate_asymptotic(in, L);
          degenerate = reference;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NotDegenerate) throw;
        }
        if (reference != 0.0) ratio = q.value / reference;
      }
      t.add({L, expected_zero_count(ctx, L), q.value, q.error, asym, degenerate, ratio});
      summary = "L=" + fmt(L) + " numeric=" + fmt(q.value);
      if (!asym.is_null()) summary += " asymptotic=" + fmt(asym.get<double>());
      if (!degenerate.is_null()) summary += " degenerate=" + fmt(degenerate.get<double>());
    }
    emit(g, run, t, summary);
  }
};

// ---------------------------------------------------------------- coupling

struct CouplingCmd {
  double eps = 0.05;
  std::size_t M = 4;
  std::size_t samples = 1000;
  std::vector<double> radii{5.0, 10.0, 20.0};
  double grid_step = 0.1;
  bool transfer = false;
  bool kernel_gap = false;
  bool aggregate = false;
  bool grid = false;
  double u = 0.0;
  double L = 10.0;
  std::size_t pairs = 10000;
  std::vector<double> window;
  int resolution = 256;

  void attach(CLI::App* cmd) {
    cmd->add_option("--eps", eps, "angular band half-width")->capture_default_str();
    cmd->add_option("--M", M, "angles per axis group")->capture_default_str();
    cmd->add_option("--samples", samples, "number of couplings")->capture_default_str();
    cmd->add_option("--R", radii, "ball radii for the sup-norm tail table")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--grid-step", grid_step, "sup-norm grid step (<= 0.1)")
        ->capture_default_str();
    auto* tr = cmd->add_flag("--transfer", transfer, "persistence transfer experiment");
    auto* kg = cmd->add_flag("--kernel-gap", kernel_gap, "covariance gap check on random pairs");
    auto* ag = cmd->add_flag("--aggregate", aggregate, "aggregated coefficient normality check");
    auto* gr = cmd->add_flag("--grid", grid, "paired (x, y, G, F) grid of one coupling");
    tr->excludes(kg)->excludes(ag)->excludes(gr);
    kg->excludes(ag)->excludes(gr);
    ag->excludes(gr);
    cmd->add_option("--u", u, "direction for --transfer, radians")->capture_default_str();
    cmd->add_option("--L", L, "segment length for --transfer")->capture_default_str();
    cmd->add_option("--pairs", pairs, "pair count for --kernel-gap")->capture_default_str();
    cmd->add_option("--window", window, "grid window x0 x1 y0 y1 (default [0,4pi]^2)")
        ->expected(4);
    cmd->add_option("--resolution", resolution, "grid points per side (>= 32)")
        ->capture_default_str();
  }

  void run(const Globals& g) const {
    require(eps >= 0.0 && eps < kQuarterPi, "--eps", "must lie in [0, pi/4)");
    require(M >= 1, "--M", "must be at least 1");
    RunConfig run;
    run.seed = g.seed;
    run.config = {{"command", "coupling"}, {"eps", eps}, {"M", M}};
    Table t;

    if (grid) {
      require(resolution >= 32, "--resolution", "must be at least 32");
      const auto win = window.empty() ? default_window(FrequencyConvention::angular()) : window;
      require(win[1] > win[0] && win[3] > win[2], "--window", "needs x0 < x1 and y0 < y1");
      run.config["grid"] = {{"window", win}, {"resolution", resolution}};
      Rng rng = make_stream(g.seed, 0);
      const auto pair = couple(random_cilleruelo_type(M, eps, rng), eps);
      const auto gs = evaluate_grid(pair.g, win[0], win[1], win[2], win[3], resolution);
      const auto fs = evaluate_grid(pair.f, win[0], win[1], win[2], win[3], resolution);
      std::vector<std::vector<double>> cols(4);
      for (std::size_t i = 0; i < gs.size(); ++i) {
        cols[0].push_back(gs[i].x);
        cols[1].push_back(gs[i].y);
        cols[2].push_back(gs[i].value);
        cols[3].push_back(fs[i].value);
      }
      const json meta = {{"seed", g.seed},
                         {"g", field_to_json(pair.g)},
                         {"f", field_to_json(pair.f)}};
      write_grid(g, run, {"x", "y", "g", "f"}, cols, meta,
                 "paired grid " + std::to_string(resolution) + "x" + std::to_string(resolution));
      return;
    }
    require(samples >= 1, "--samples", "must be at least 1");

    if (transfer) {
      run.config.update({{"mode", "transfer"}, {"u", u}, {"L", L}, {"samples", samples}});
      const auto r = persistence_transfer_experiment(eps, u, L, samples, g.seed, g.workers, M);
      t.header = {"quantity", "value", "se"};
      t.add({"threshold", r.threshold, nullptr});
      t.add({"g_persistence", r.g_persistence.value, r.g_persistence.se});
      t.add({"f_persistence", r.f_persistence.value, r.f_persistence.se});
      t.add({u == 0.0 ? "near_margin" : "tie", r.tie.value, r.tie.se});
      t.add({"tie_unscaled", r.tie_unscaled.value, r.tie_unscaled.se});
      t.add({"tie_reference", r.tie_oracle, nullptr});
      t.add({"sup_exceeded", r.sup_exceeded.value, r.sup_exceeded.se});
      if (u == 0.0) t.add({"dominant", r.dominant.value, r.dominant.se});
      t.add({"implication_failures", r.implication_failures, nullptr});
      t.add({"inequality_holds", r.inequality_holds, nullptr});
      emit(g, run, t,
           "g_persistence=" + fmt(r.g_persistence.value) + " implication_failures=" +
               std::to_string(r.implication_failures) +
               " inequality=" + (r.inequality_holds ? "holds" : "FAILS"));
      return;
    }
    if (kernel_gap) {
      require(pairs >= 1, "--pairs", "must be at least 1");
      const double R = radii.back();
      run.config.update({{"mode", "kernel-gap"}, {"R", R}, {"pairs", pairs}});
      const auto r = kernel_gap_check(eps, M, R, pairs, g.seed);
      t.header = {"R", "pairs", "max_gap", "max_ratio", "violations"};
      t.add({R, r.pairs, r.max_gap, r.max_ratio, r.violations});
      emit(g, run, t,
           "max_gap=" + fmt(r.max_gap) + " max_ratio=" + fmt(r.max_ratio) +
               " violations=" + std::to_string(r.violations));
      return;
    }
    if (aggregate) {
      run.config.update({{"mode", "aggregate"}, {"samples", samples}});
      const auto r = aggregated_coefficient_check(eps, M, samples, g.seed, g.workers);
      t.header = {"coefficient", "variance", "se", "anderson_darling"};
      const char* names[] = {"B1", "C1", "B2", "C2"};
      for (std::size_t k = 0; k < 4; ++k)
        t.add({names[k], r.variance[k].value, r.variance[k].se, r.anderson_darling[k]});
      emit(g, run, t, std::string("aggregated coefficients normal=") + (r.normal() ? "yes" : "no"));
      return;
    }
    for (double R : radii) require(R > 1.0, "--R", "radii must exceed 1");
    run.config.update(
        {{"mode", "tail"}, {"R", radii}, {"samples", samples}, {"grid_step", grid_step}});
    const auto rows = coupling_tail_experiment(eps, M, radii, samples, g.seed, g.workers, grid_step);
    t.header = {"R",        "log_exceedance", "log_se",          "square_exceedance",
                "square_se", "mean_sup",      "mean_sup_over_eps_r", "mean_sup_over_eps_r_log_r",
                "lipschitz_failures"};
    std::size_t failures = 0;
    for (const auto& r : rows) {
      t.add({r.R, r.log_exceedance.value, r.log_exceedance.se, r.square_exceedance.value,
             r.square_exceedance.se, r.mean_sup, r.mean_sup_over_eps_r, r.mean_sup_over_eps_r_log_r,
             r.lipschitz_failures});
      failures += r.lipschitz_failures;
    }
    emit(g, run, t, "radii=" + std::to_string(rows.size()) +
                        " lipschitz_failures=" + std::to_string(failures));
  }
};

int verify(const std::string& path) {
  const auto r = verify_file(path);
  if (r.ok) {
    std::cout << "verified " << path << " config_hash=" << r.derived_hash << '\n';
    return 0;
  }
  std::cout << "MISMATCH " << path << " stored=" << r.stored_hash << " derived=" << r.derived_hash
            << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodal_lab: nodal intersections of arithmetic random waves"};
  app.require_subcommand(0, 1);
  Globals g;
  app.add_option("--out", g.out, "output file (.json for JSON, CSV otherwise)");
  app.add_option("--seed", g.seed, "base seed of the per-sample streams")->capture_default_str();
  app.add_option("--workers", g.workers, "worker threads; results do not depend on it")
      ->envname("NODAL_LAB_WORKERS")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
      ->capture_default_str();
  app.add_option("--verify", g.verify, "re-derive and check the config hash of an output file");

  LatticeCmd lattice;
  SampleCmd sample;
  MomentsCmd moments;
  PersistenceCmd persistence;
  KacRiceCmd kacrice;
  CouplingCmd coupling;
  auto* c_lattice = app.add_subcommand("lattice", "lattice points, r2 and nu4 of one m");
  auto* c_sample = app.add_subcommand("sample", "sample waves, export zeros or a value grid");
  auto* c_moments = app.add_subcommand("moments", "Monte Carlo zero-count moments");
  auto* c_persist = app.add_subcommand("persistence", "Monte Carlo persistence probabilities");
  auto* c_kacrice = app.add_subcommand("kacrice", "Kac-Rice moments by quadrature");
  auto* c_coupling = app.add_subcommand("coupling", "coupling of Cilleruelo-type fields");
  for (auto* c : {c_lattice, c_sample, c_moments, c_persist, c_kacrice, c_coupling})
    c->fallthrough();
  lattice.attach(c_lattice);
  sample.attach(c_sample);
  moments.attach(c_moments);
  persistence.attach(c_persist);
  kacrice.attach(c_kacrice);
  coupling.attach(c_coupling);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!g.verify.empty()) return verify(g.verify);
    if (c_lattice->parsed()) {
      lattice.run(g);
    } else if (c_sample->parsed()) {
      sample.run(g);
    } else if (c_moments->parsed()) {
      moments.run(g);
    } else if (c_persist->parsed()) {
      persistence.run(g);
    } else if (c_kacrice->parsed()) {
      kacrice.run(g);
    } else if (c_coupling->parsed()) {
      coupling.run(g);
    } else {
      std::cerr << app.help();
      return 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
