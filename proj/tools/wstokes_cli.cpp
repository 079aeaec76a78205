// Command-line runner: one subcommand per operation, JSON config files,
// seeded corpora, CSV/JSON/Field outputs and a run manifest.

#include "wstokes/corpus.hpp"
#include "wstokes/decay.hpp"
#include "wstokes/errors.hpp"
#include "wstokes/exterior.hpp"
#include "wstokes/field_io.hpp"
#include "wstokes/periodic.hpp"
#include "wstokes/semigroup.hpp"
#include "wstokes/weights.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>

#ifndef WSTOKES_VERSION
#define WSTOKES_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wstokes;

namespace {

const std::set<std::string> global_keys = {"seed", "out", "threads"};

// Reads a flat JSON object of option values. Keys naming global options go to
// the top-level app, everything else to the subcommand named on the command
// line; an object-valued key addresses the subcommand of that name directly.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (key == "subcommand") continue;
      if (value.is_object()) {
        for (const auto& [k, v] : value.items()) items.push_back(item({key}, k, v));
      } else if (global_keys.count(key) || subcommand_.empty()) {
        items.push_back(item({}, key, value));
      } else {
        items.push_back(item({subcommand_}, key, value));
      }
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config values must be strings, numbers, booleans or arrays of those");
  }
  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const json& v) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = name;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    } else {
      it.inputs.push_back(scalar(v));
    }
    return it;
  }

  std::string subcommand_;
};

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct GlobalOptions {
  std::uint64_t seed = 20240611;
  std::string out = "wstokes_out";
  int threads = 0;
};

// Everything one subcommand produces.
struct Run {
  std::uint64_t seed = 0;
  fs::path out;
  json config = json::object();
  json result = json::object();
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
};

using Action = std::function<void(Run&)>;

struct GridOptions {
  int n = 3;
  int N = 64;
  double L = 16.0;

  Grid make() const { return Grid(n, N, L); }
  json to_json() const { return {{"n", n}, {"N", N}, {"L", L}}; }
};

void add_grid(CLI::App* sub, GridOptions& g, int N, double L) {
  g.N = N;
  g.L = L;
  sub->add_option("--n", g.n, "Spatial dimension")->capture_default_str();
  sub->add_option("--N", g.N, "Samples per axis (even)")->capture_default_str();
  sub->add_option("--L", g.L, "Half-extent of the cube [-L, L]^n")->capture_default_str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

double max_abs(const Eigen::ArrayXXd& a) { return a.size() ? a.abs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------------------
// Weights

Action check_weight(CLI::App* sub) {
  struct O {
    double alpha = 0.0, q = 2.0, side_min = 1e-3, side_max = 1e3;
    std::string form = "bracket";
    int n = 3, per_decade = 3, points = 64;
    std::vector<double> centers;
  };
  auto o = std::make_shared<O>();
  sub->add_option("--alpha", o->alpha, "Weight exponent alpha")->capture_default_str();
  sub->add_option("--form", o->form, "bracket: (1+|x|^2)^(alpha/2); power: |x|^alpha")
      ->check(CLI::IsMember({"bracket", "power"}))
      ->capture_default_str();
  sub->add_option("--q", o->q, "Lebesgue index q > 1")->capture_default_str();
  sub->add_option("--n", o->n, "Dimension")->capture_default_str();
  sub->add_option("--side-min", o->side_min, "Smallest cube side")->capture_default_str();
  sub->add_option("--side-max", o->side_max, "Largest cube side")->capture_default_str();
  sub->add_option("--per-decade", o->per_decade, "Cube sides per decade")->capture_default_str();
  sub->add_option("--points", o->points, "Quadrature cells per axis")->capture_default_str();
  sub->add_option("--centers", o->centers, "Cube center offsets along e_1, besides the origin");
  return [o](Run& run) {
    run.config = {{"alpha", o->alpha},       {"form", o->form},     {"q", o->q},
                  {"n", o->n},               {"side_min", o->side_min}, {"side_max", o->side_max},
                  {"per_decade", o->per_decade}, {"points", o->points}, {"centers", o->centers}};
    const RadialWeight w = o->form == "bracket" ? RadialWeight::bracket(o->alpha) : RadialWeight::power(o->alpha);
    AqOptions opt;
    opt.points_per_axis = o->points;
    const AqReport r =
        aq_check(w, o->q, geometric_ladder(o->side_min, o->side_max, o->per_decade), o->centers, o->n, opt);
    json samples = json::array();
    for (const auto& s : r.samples)
      samples.push_back({{"center_offset", s.center_offset}, {"side", s.side}, {"product", s.product}});
    run.result = {{"q", r.q},
                  {"dim", r.dim},
                  {"weight", {{"form", to_string(r.weight.form)}, {"s", r.weight.s}}},
                  {"samples", samples},
                  {"sup", r.sup_estimate},
                  {"last_decade_increase", r.last_decade_increase},
                  {"max_decade_growth", r.max_decade_growth},
                  {"verdict", to_string(r.verdict)}};
  };
}

Action admissible(CLI::App* sub) {
  struct O {
    double q = 2.0;
    int n = 3;
    bool verify = false;
  };
  auto o = std::make_shared<O>();
  sub->add_option("--q", o->q, "Lebesgue index q > 1")->capture_default_str();
  sub->add_option("--n", o->n, "Dimension")->capture_default_str();
  sub->add_flag("--verify", o->verify, "Cross-check interior exponents with the A_q checker");
  return [o](Run& run) {
    run.config = {{"q", o->q}, {"n", o->n}, {"verify", o->verify}};
    const OpenInterval r = admissible_range(o->q, o->n);
    run.result = {{"lower", r.lower}, {"upper", r.upper}};
    if (!o->verify) return;
    json checks = json::array();
    const auto sides = geometric_ladder(1e-3, 1e3, 3);
    for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double s = r.lower + f * (r.upper - r.lower);
      const AqReport rep = aq_check(RadialWeight::bracket(s * o->q), o->q, sides, {}, o->n);
      checks.push_back({{"s", s}, {"verdict", to_string(rep.verdict)}, {"sup", rep.sup_estimate}});
    }
    run.result["checks"] = checks;
  };
}

Action feasibility_cmd(CLI::App* sub) {
  struct O {
    int n = 5;
    double q1 = 4.0, q2 = 3.0, step = 0.01;
    bool scan = false;
  };
  auto o = std::make_shared<O>();
  sub->add_option("--n", o->n, "Dimension")->capture_default_str();
  sub->add_option("--q1", o->q1, "Exponent q1 in (1, n)")->capture_default_str();
  sub->add_option("--q2", o->q2, "Exponent q2 in (n/2, n)")->capture_default_str();
  sub->add_flag("--scan", o->scan, "Scan the whole (q1, q2) box instead of one point");
  sub->add_option("--step", o->step, "Lattice step of the scan")->capture_default_str();
  return [o](Run& run) {
    run.config = {{"n", o->n}, {"q1", o->q1}, {"q2", o->q2}, {"scan", o->scan}, {"step", o->step}};
    if (o->scan) {
      const FeasibilityScan s = feasibility_scan(o->n, o->step);
      run.result = {{"n", s.n},        {"step", s.step},     {"points", s.points},
                    {"nonempty", s.nonempty}, {"widest", s.widest}, {"all_empty", s.nonempty == 0}};
      return;
    }
    const HypothesisSet h(o->n, o->q1, o->q2);
    const OpenInterval r = feasibility(h);
    run.result = {{"q12", h.q12()},  {"q2_star", h.q2_star()}, {"q22_star", h.q22_star()},
                  {"lower", r.lower}, {"upper", r.upper},      {"empty", r.empty()}};
  };
}

Action maximal(CLI::App* sub) {
  struct O {
    GridOptions grid;
    int members = 10, eps_count = 8;
    double s = 1.0, q = 2.0;
    bool save = false;
  };
  auto o = std::make_shared<O>();
  add_grid(sub, o->grid, 32, 8.0);
  sub->add_option("--members", o->members, "Size of the seeded scalar corpus")->capture_default_str();
  sub->add_option("--s", o->s, "Weight exponent of the L^q_s norms")->capture_default_str();
  sub->add_option("--q", o->q, "Lebesgue index")->capture_default_str();
  sub->add_option("--eps-count", o->eps_count, "Gaussian mollifier widths, geometric over [h, L/2]")
      ->capture_default_str();
  sub->add_flag("--save-fields", o->save, "Write every f and Mf as Field binaries");
  return [o](Run& run) {
    run.config = {{"grid", o->grid.to_json()}, {"members", o->members}, {"s", o->s},
                  {"q", o->q},                 {"eps_count", o->eps_count}};
    const Grid g = o->grid.make();
    const auto radii = shell_radii(g, g.half_extent());
    std::vector<double> eps;
    for (int k = 0; k < o->eps_count; ++k)
      eps.push_back(g.spacing() * std::pow(0.5 * g.half_extent() / g.spacing(), double(k) / std::max(1, o->eps_count - 1)));
    const RadialWeight w = RadialWeight::bracket(o->s);
    json rows = json::array();
    double worst_ratio = 0.0, worst_domination = -std::numeric_limits<double>::infinity();
    double worst_below = 0.0;
    const auto corpus = scalar_corpus(g, run.seed, o->members);
    for (int k = 0; k < o->members; ++k) {
      const Field& f = corpus[k];
      const Field mf = maximal_function(f, radii);
      const Field ms = mollifier_supremum(f, eps);
      const double ratio = weighted_lq_norm(mf, o->q, w) / weighted_lq_norm(f, o->q, w);
      // max over points of (mollifier sup - Mf)/max|f|: <= 0 when domination holds.
      const double scale = max_abs(f.values());
      const double domination = (ms.values() - mf.values()).maxCoeff() / scale;
      const double below = (f.values().abs() - mf.values()).maxCoeff() / scale;
      worst_ratio = std::max(worst_ratio, ratio);
      worst_domination = std::max(worst_domination, domination);
      worst_below = std::max(worst_below, below);
      rows.push_back({{"member", k}, {"norm_ratio", ratio}, {"domination_excess", domination}, {"below_f", below}});
      if (o->save) {
        char name[64];
        std::snprintf(name, sizeof name, "f_%02d.bin", k);
        write_field(run.file(name), f);
        std::snprintf(name, sizeof name, "Mf_%02d.bin", k);
        write_field(run.file(name), mf);
      }
    }
    run.result = {{"radii", radii.size()},
                  {"members", rows},
                  {"max_norm_ratio", worst_ratio},
                  {"max_domination_excess", worst_domination},
                  {"max_f_minus_Mf", worst_below}};
  };
}

// ---------------------------------------------------------------------------
// Semigroup

Action decay(CLI::App* sub) {
  struct O {
    GridOptions grid;
    DecayParams p;
    double tmin = 1.0, tmax = 64.0;
    int per_octave = 2, member = 0;
  };
  auto o = std::make_shared<O>();
  add_grid(sub, o->grid, 64, 16.0);
  sub->add_option("--p", o->p.p, "Data index p")->capture_default_str();
  sub->add_option("--q", o->p.q, "Solution index q >= p")->capture_default_str();
  sub->add_option("--s", o->p.s, "Data weight exponent s")->capture_default_str();
  sub->add_option("--s0", o->p.s0, "Solution weight exponent s0 <= s")->capture_default_str();
  sub->add_option("--alpha", o->p.alpha, "Derivative order |alpha| (0 or 1)")->capture_default_str();
  sub->add_option("--tmin", o->tmin, "First ladder time")->capture_default_str();
  sub->add_option("--tmax", o->tmax, "Last ladder time")->capture_default_str();
  sub->add_option("--per-octave", o->per_octave, "Ladder times per doubling")->capture_default_str();
  sub->add_option("--member", o->member, "Index into the seeded solenoidal corpus")->capture_default_str();
  return [o](Run& run) {
    run.config = {{"grid", o->grid.to_json()}, {"p", o->p.p},       {"q", o->p.q},
                  {"s", o->p.s},               {"s0", o->p.s0},     {"alpha", o->p.alpha},
                  {"tmin", o->tmin},           {"tmax", o->tmax},   {"per_octave", o->per_octave},
                  {"member", o->member}};
    require(o->member >= 0, "corpus member index must be non-negative");
    const Grid g = o->grid.make();
    const auto corpus = solenoidal_corpus(g, run.seed, o->member + 1);
    const DecayResult r = decay_harness(corpus[o->member], o->p, time_ladder(o->tmin, o->tmax, o->per_octave));
    std::ofstream csv(run.file("decay.csv"));
    write_decay_csv(csv, r);
    run.result = {{"slope", r.fit.slope},
                  {"intercept", r.fit.intercept},
                  {"r2", r.fit.r2},
                  {"predicted_exponent", r.predicted_exponent},
                  {"bound_compliance", r.bound_compliance}};
  };
}

Action frac_integral(CLI::App* sub) {
  struct O {
    GridOptions grid;
    double lambda = 2.0, q = 0.0, s0 = 0.0;
  };
  auto o = std::make_shared<O>();
  add_grid(sub, o->grid, 128, 4.0);
  sub->add_option("--lambda", o->lambda, "Order lambda in (0, n)")->capture_default_str();
  sub->add_option("--q", o->q, "If > 0, also report ||I f||_{L^q_s0} / ||f||_{L^p_s0} with 1/p = 1/q + lambda/n")
      ->capture_default_str();
  sub->add_option("--s0", o->s0, "Weight exponent of the two-weight ratio")->capture_default_str();
  return [o](Run& run) {
    run.config = {{"grid", o->grid.to_json()}, {"lambda", o->lambda}, {"q", o->q}, {"s0", o->s0}};
    const Grid g = o->grid.make();
    const int n = g.dim();
    const Field f = Field::sample_scalar(g, [n](std::span<const double> x) {
      double r2 = 0.0;
      for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
      return std::exp(-r2);
    });
    std::vector<int> mid(n, g.points_per_axis() / 2);
    const Eigen::Index origin = g.flat_index(mid);
    const double value = fractional_integral_at(f, o->lambda, origin);
    // |S^{n-1}| int_0^inf r^{lambda-1} e^{-r^2} dr = |S^{n-1}| Gamma(lambda/2) / 2
    const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
    const double exact = 0.5 * sphere * std::tgamma(0.5 * o->lambda);
    const Field If = fractional_integral(f, o->lambda);
    run.result = {{"value_at_origin", value},
                  {"exact_at_origin", exact},
                  {"relative_error", std::abs(value - exact) / exact},
                  {"min_value", If.values().minCoeff()},
                  {"kernel_domination_constant", kernel_domination_constant(n, o->lambda)}};
    if (o->q > 0.0) {
      const double p = 1.0 / (1.0 / o->q + o->lambda / n);
      const RadialWeight w = RadialWeight::bracket(o->s0);
      run.result["p"] = p;
      run.result["two_weight_ratio"] = weighted_lq_norm(If, o->q, w) / weighted_lq_norm(f, p, w);
    }
  };
}

// ---------------------------------------------------------------------------
// Exterior tools

Action bogovskii_test(CLI::App* sub) {
  struct O {
    int N = 64;
    double L = 3.0, R = 1.0, bump_radius = 0.45;
    std::vector<double> center = {1.5, 0.0, 0.0};
    int axis = 0;
    bool refine = false, save = false;
    BogovskiiOptions bog;
  };
  auto o = std::make_shared<O>();
  sub->add_option("--N", o->N, "Samples per axis")->capture_default_str();
  sub->add_option("--L", o->L, "Half-extent of the cube")->capture_default_str();
  sub->add_option("--R", o->R, "Inner radius of the annulus R < |x| < R+1")->capture_default_str();
  sub->add_option("--center", o->center, "Center of the bump phi")->expected(3);
  sub->add_option("--bump-radius", o->bump_radius, "Support radius of phi")->capture_default_str();
  sub->add_option("--axis", o->axis, "f = d phi / d x_axis")->capture_default_str();
  sub->add_option("--ball-radius", o->bog.ball_radius, "Radius of the weight balls")->capture_default_str();
  sub->add_flag("--refine", o->refine, "Repeat at 2N and report the error ratio");
  sub->add_flag("--save-fields", o->save, "Write f and B[f] as Field binaries");
  return [o](Run& run) {
    run.config = {{"N", o->N},           {"L", o->L},         {"R", o->R},
                  {"center", o->center}, {"bump_radius", o->bump_radius}, {"axis", o->axis},
                  {"ball_radius", o->bog.ball_radius}, {"refine", o->refine}};
    require(o->axis >= 0 && o->axis < 3, "axis must be 0, 1 or 2");
    const AnnulusSpec spec{o->R};
    auto one = [&](int N) {
      const Grid g(3, N, o->L);
      const double a = o->bump_radius;
      const auto& c = o->center;
      // phi = (1 - |x-c|^2/a^2)^4, f = d phi/dx_axis (mean zero automatically).
      const Field f = Field::sample_scalar(g, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int d = 0; d < 3; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
        r2 /= a * a;
        return r2 < 1.0 ? -8.0 * (x[o->axis] - c[o->axis]) / (a * a) * std::pow(1.0 - r2, 3) : 0.0;
      });
      BogovskiiOptions opt = o->bog;
      opt.mean_tolerance = 1e-6;  // the discrete mean of d phi is only zero to round-off times N^3
      const Field b = bogovskii_apply(f, spec, opt);
      double outside = 0.0;
      const auto& r2 = g.radius_squared();
      for (Eigen::Index p = 0; p < g.num_points(); ++p)
        if (!spec.contains_open(r2[p])) outside = std::max(outside, b.values().row(p).abs().maxCoeff());
      const double err = annulus_divergence_error(b, f, spec);
      json row = {{"N", N},
                  {"h", g.spacing()},
                  {"relative_error", err},
                  {"error_over_h", err / g.spacing()},
                  {"w12_ratio", w12_bound_ratio(b, f)},
                  {"max_outside_annulus", outside}};
      if (o->save) {
        write_field(run.file("f_N" + std::to_string(N) + ".bin"), f);
        write_field(run.file("B_N" + std::to_string(N) + ".bin"), b);
      }
      return row;
    };
    json rows = json::array({one(o->N)});
    if (o->refine) {
      rows.push_back(one(2 * o->N));
      run.result["refinement_ratio"] = rows[1]["relative_error"].get<double>() / rows[0]["relative_error"].get<double>();
    }
    run.result["runs"] = rows;
  };
}

Action extend(CLI::App* sub) {
  struct O {
    int N = 64, member = 0;
    double L = 3.6, R = 0.25;
    std::string source = "corpus";
    bool refine = false, save = false;
  };
  auto o = std::make_shared<O>();
  sub->add_option("--N", o->N, "Samples per axis")->capture_default_str();
  sub->add_option("--L", o->L, "Half-extent of the cube (needs R + 3 < L)")->capture_default_str();
  sub->add_option("--R", o->R, "Obstacle radius")->capture_default_str();
  sub->add_option("--source", o->source,
                  "corpus: seeded curl field; shell: curl of a potential supported in R+1 < |x| < L - 0.2")
      ->check(CLI::IsMember({"corpus", "shell"}))
      ->capture_default_str();
  sub->add_option("--member", o->member, "Index into the seeded solenoidal corpus")->capture_default_str();
  sub->add_flag("--refine", o->refine, "Repeat at 2N and report the divergence ratio");
  sub->add_flag("--save-fields", o->save, "Write u0 and v0 as Field binaries");
  return [o](Run& run) {
    run.config = {{"N", o->N},           {"L", o->L},           {"R", o->R},
                  {"source", o->source}, {"member", o->member}, {"refine", o->refine}};
    require(o->member >= 0, "corpus member index must be non-negative");
    auto one = [&](int N) {
      const Grid g(3, N, o->L);
      Field u0(g, 3);
      if (o->source == "corpus") {
        u0 = solenoidal_corpus(g, run.seed, o->member + 1)[o->member];
      } else {
        const double lo = o->R + 1.0, hi = o->L - 0.2;
        u0 = curl(Field::sample(g, 3, [&](std::span<const double> x, std::span<double> out) {
          const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
          if (r <= lo || r >= hi) return;
          const double s = std::pow((r - lo) * (hi - r) * 4.0 / ((hi - lo) * (hi - lo)), 4);
          out[0] = s * std::cos(0.7 * x[1]);
          out[1] = s * std::sin(0.5 * x[2] + 0.3);
          out[2] = s * (1.0 + 0.3 * x[0]);
        }));
      }
      const ExtensionResult ext = solenoidal_extension(u0, o->R);
      const Field grad_phi = radial_cutoff_gradient(g, o->R + 2.0, o->R + 3.0);
      const Field flux(g, Eigen::ArrayXXd((grad_phi.values() * u0.values()).rowwise().sum()));
      const double div = l2_norm(divergence(ext.v0)) / l2_norm(flux);
      double changed = 0.0;
      const double r3 = (o->R + 3.0) * (o->R + 3.0);
      for (Eigen::Index p = 0; p < g.num_points(); ++p)
        if (g.radius_squared()[p] >= r3)
          changed = std::max(changed, (ext.v0.values().row(p) - u0.values().row(p)).abs().maxCoeff());
      const RadialWeight w = RadialWeight::bracket(1.0);
      if (o->save) {
        write_field(run.file("u0_N" + std::to_string(N) + ".bin"), u0);
        write_field(run.file("v0_N" + std::to_string(N) + ".bin"), ext.v0);
      }
      return json{{"N", N},
                  {"h", g.spacing()},
                  {"relative_flux", ext.relative_flux},
                  {"removed_mean", ext.removed_mean},
                  {"relative_divergence", div},
                  {"divergence_over_h", div / g.spacing()},
                  {"max_change_outside_R_plus_3", changed},
                  {"weighted_norm_inflation", weighted_lq_norm(ext.v0, 2.0, w) / weighted_lq_norm(u0, 2.0, w)}};
    };
    json rows = json::array({one(o->N)});
    if (o->refine) {
      rows.push_back(one(2 * o->N));
      run.result["refinement_ratio"] =
          rows[1]["relative_divergence"].get<double>() / rows[0]["relative_divergence"].get<double>();
    }
    run.result["runs"] = rows;
  };
}

// ---------------------------------------------------------------------------
// Periodic solver

struct PeriodicOptions {
  GridOptions grid;
  double T = 1.0;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double target = 1e-2;
  std::string profile = "mix";
  int member = 0;
  PicardConfig cfg;
  bool save = false;

  json to_json() const {
    json j = {{"grid", grid.to_json()}, {"T", T},         {"target", target}, {"profile", profile},
              {"member", member},       {"M", cfg.M},     {"tol", cfg.tol},   {"max_iter", cfg.max_iter},
              {"tail_eps", cfg.tail_eps}, {"linear", cfg.linear}};
    j["eps"] = std::isnan(eps) ? json("calibrated") : json(eps);
    return j;
  }
};

void add_periodic(CLI::App* sub, PeriodicOptions& o) {
  add_grid(sub, o.grid, 64, 16.0);
  sub->add_option("--T", o.T, "Period")->capture_default_str();
  sub->add_option("--eps", o.eps, "Forcing amplitude; omitted: calibrated so the first iterate has L^2 norm --target");
  sub->add_option("--target", o.target, "First-iterate L^2 norm used for calibration")->capture_default_str();
  sub->add_option("--profile", o.profile, "Time profile: cos = cos(wt); mix = cos(wt) + sin(2wt)/2, w = 2pi/T")
      ->check(CLI::IsMember({"cos", "mix"}))
      ->capture_default_str();
  sub->add_option("--member", o.member, "Seeded solenoidal corpus field used as spatial shape")->capture_default_str();
  sub->add_option("--M", o.cfg.M, "Time nodes per period")->capture_default_str();
  sub->add_option("--tol", o.cfg.tol, "Relative fixed-point residual tolerance")->capture_default_str();
  sub->add_option("--max-iter", o.cfg.max_iter, "Maximum Poincare-map evaluations")->capture_default_str();
  sub->add_option("--tail-eps", o.cfg.tail_eps, "Truncation threshold of the history sum")->capture_default_str();
  sub->add_flag("--linear", o.cfg.linear, "Drop the nonlinearity");
  sub->add_flag("--save-nodes", o.save, "Write every node u(t_m) as a Field binary");
}

struct PeriodicProblem {
  PeriodicForce force;
  double eps;
};

PeriodicProblem periodic_problem(const PeriodicOptions& o, std::uint64_t seed) {
  require(o.member >= 0, "corpus member index must be non-negative");
  const Grid g = o.grid.make();
  const Field shape = solenoidal_corpus(g, seed, o.member + 1)[o.member];
  const double w = 2.0 * std::numbers::pi / o.T;
  PeriodicForce unit(g, o.T, 1.0);
  if (o.profile == "cos")
    unit.add_term([w](double t) { return std::cos(w * t); }, shape);
  else
    unit.add_term([w](double t) { return std::cos(w * t) + 0.5 * std::sin(2.0 * w * t); }, shape);
  double eps = o.eps;
  if (std::isnan(eps)) {
    require(o.target > 0.0, "calibration target must be positive");
    const NodeSeries zero(o.cfg.M, SpectralField(g, g.dim()));
    double first = 0.0;
    for (const auto& u : poincare_map(zero, unit, o.cfg)) first = std::max(first, spectral_l2_norm(u));
    require(first > 0.0, "forcing has no solenoidal part to calibrate against");
    eps = o.target / first;
  }
  return {unit.with_amplitude(eps), eps};
}

json solution_json(const PeriodicSolution& sol, double eps) {
  double norm = 0.0;
  json nodes = json::array();
  for (const auto& u : sol.nodes) {
    const double v = spectral_l2_norm(u);
    nodes.push_back(v);
    norm = std::max(norm, v);
  }
  json j = {{"eps", eps},
            {"iterations", sol.iterations},
            {"residual", sol.residual_history.empty() ? 0.0 : sol.residual_history.back()},
            {"residual_history", sol.residual_history},
            {"contraction", sol.contraction},
            {"node_l2", nodes},
            {"node_residual", sol.node_residual},
            {"max_l2", norm}};
  j["response"] = eps != 0.0 ? json(norm / eps) : json(nullptr);
  return j;
}

void save_nodes(Run& run, const PeriodicSolution& sol) {
  for (size_t m = 0; m < sol.nodes.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "node_%03zu.bin", m);
    write_field(run.file(name), from_spectral(sol.nodes[m]));
  }
}

Action solve_periodic(CLI::App* sub) {
  auto o = std::make_shared<PeriodicOptions>();
  add_periodic(sub, *o);
  return [o](Run& run) {
    run.config = o->to_json();
    const auto pb = periodic_problem(*o, run.seed);
    const PeriodicSolution sol = picard_solve(pb.force, o->cfg);
    run.result = solution_json(sol, pb.eps);
    if (o->save) save_nodes(run, sol);
  };
}

Action periodicity(CLI::App* sub) {
  auto o = std::make_shared<PeriodicOptions>();
  auto steps = std::make_shared<int>(0);
  add_periodic(sub, *o);
  sub->add_option("--steps", *steps, "Time steps of the re-simulation (0: max(256, 8M))")->capture_default_str();
  return [o, steps](Run& run) {
    run.config = o->to_json();
    run.config["steps"] = *steps;
    const auto pb = periodic_problem(*o, run.seed);
    const PeriodicSolution sol = picard_solve(pb.force, o->cfg);
    run.result = solution_json(sol, pb.eps);
    run.result["periodicity_defect"] = periodicity_check(sol, pb.force, o->cfg, *steps);
    if (o->save) save_nodes(run, sol);
  };
}

Action weighted(CLI::App* sub) {
  auto o = std::make_shared<PeriodicOptions>();
  auto q = std::make_shared<std::array<double, 3>>(std::array<double, 3>{2.0, 2.0, 1.0});
  add_periodic(sub, *o);
  sub->add_option("--q1", (*q)[0], "Index of the solution norm")->capture_default_str();
  sub->add_option("--q2", (*q)[1], "Index of the gradient norm")->capture_default_str();
  sub->add_option("--s", (*q)[2], "Weight exponent")->capture_default_str();
  return [o, q](Run& run) {
    run.config = o->to_json();
    run.config["q1"] = (*q)[0];
    run.config["q2"] = (*q)[1];
    run.config["s"] = (*q)[2];
    const auto pb = periodic_problem(*o, run.seed);
    const PeriodicSolution sol = picard_solve(pb.force, o->cfg);
    const WeightedReport r = weighted_report(sol, pb.force, (*q)[0], (*q)[1], (*q)[2]);
    run.result = solution_json(sol, pb.eps);
    run.result["report"] = {{"q1", r.q1},
                            {"q2", r.q2},
                            {"s", r.s},
                            {"q12", r.q12},
                            {"q22_star", r.q22_star},
                            {"solution_norm", r.solution_norm},
                            {"force_norm", r.force_norm}};
    run.result["report"]["ratio"] = r.ratio ? json(*r.ratio) : json("not applicable");
    if (o->save) save_nodes(run, sol);
  };
}

// ---------------------------------------------------------------------------

int fail(const std::string& kind, const std::string& message, const std::string& subcommand, const fs::path& out,
         int code) {
  const json err = {{"error", {{"kind", kind}, {"message", message}, {"subcommand", subcommand}, {"exit_code", code}}}};
  std::cerr << err.dump() << '\n';
  std::error_code ec;
  if (!out.empty() && fs::is_directory(out, ec)) {
    std::ofstream os(out / "error.json");
    if (os) os << err.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::string active;
  struct Entry {
    std::string name;
    std::string summary;
    std::function<Action(CLI::App*)> build;
  };
  const std::vector<Entry> entries = {
      {"check-weight",
       "Muckenhoupt test: sup over cubes Q of (avg_Q w)(avg_Q w^{-1/(q-1)})^{q-1} for w = <x>^alpha or "
       "|x|^alpha, on a cube ladder at the origin (and optional offsets); the running sup is classified "
       "as finite, diverging or inconclusive.",
       check_weight},
      {"admissible-range",
       "Open interval of s with <x>^{sq} in A_q(R^n): -n/q < s < n(1 - 1/q); --verify runs the A_q "
       "checker at interior exponents.",
       admissible},
      {"feasibility",
       "Weight exponents s allowed for the small-data periodic existence result: "
       "max(0, 2 - n/q2) < s < min(n(1 - 1/q1), (n/2)(1 - 1/q12), (n/2)(1 - 1/q22*)), "
       "q12 = q1 q2/(q1+q2), q2* = n q2/(n-q2), q22* = q2* q2/(q2*+q2).",
       feasibility_cmd},
      {"maximal",
       "Centered Hardy-Littlewood maximal function over every lattice radius: reports "
       "||Mf||_{L^q_s}/||f||_{L^q_s}, the pointwise domination sup_eps (rho_eps * |f|) <= Mf for a "
       "Gaussian mollifier, and Mf >= |f|, on a seeded scalar corpus.",
       maximal},
      {"decay",
       "Two-weight decay of the Stokes semigroup on the whole space: ||grad^alpha e^{t Delta} P u0||_{L^q_s0} "
       "against C t^{-(n/2)(1/p-1/q)-|alpha|/2} (1+t)^{-(s-s0)/2}; writes the t ladder as CSV with a "
       "log-log fit footer.",
       decay},
      {"frac-integral",
       "Fractional integral I_lambda f(x) = int f(x-y) |y|^{lambda-n} dy of a Gaussian, compared with "
       "|S^{n-1}| Gamma(lambda/2)/2 at the origin, plus the heat-kernel domination constant.",
       frac_integral},
      {"bogovskii-test",
       "Right inverse B of the divergence on the annulus R < |x| < R+1: div B[f] = f for f = d phi/dx_j "
       "with phi a bump inside the annulus, B[f] supported in the closed annulus.",
       bogovskii_test},
      {"extend",
       "Solenoidal extension v0 = (1 - phi_R) u0 + B[grad(phi_R).u0] of a field solenoidal outside B_R; "
       "v0 = u0 for |x| >= R+3 and div v0 = O(h).",
       extend},
      {"solve-periodic",
       "T-periodic mild solution u = H[u], H[u](t) = int_{-inf}^t e^{-(t-s)A}(B[u] + Pf)(s) ds, "
       "B[u] = -P(u.grad)u, by Picard iteration from u = 0.",
       solve_periodic},
      {"periodicity-check",
       "Solves the periodic problem, then marches u(0) over one period with an exponential integrator "
       "and reports ||u(T) - u(0)|| / ||u(0)||.",
       periodicity},
      {"weighted-report",
       "Solves the periodic problem and reports sup_m (||<x>^s u||_{q1} + ||<x>^s grad u||_{q2}) against "
       "sup_m ||<x>^{2s} f||_{L^{q12} cap L^{q22*}}.",
       weighted},
  };

  for (int i = 1; i < argc; ++i)
    for (const auto& e : entries)
      if (active.empty() && e.name == argv[i]) active = e.name;

  CLI::App app{"Weighted decay, periodic Navier-Stokes and exterior-domain tools on a periodic grid"};
  app.set_version_flag("--version", WSTOKES_VERSION);
  app.fallthrough();
  app.require_subcommand(1);
  GlobalOptions global;
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(active));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--seed", global.seed, "Seed of every randomized corpus")->capture_default_str();
  app.add_option("--out", global.out, "Output directory")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker thread cap (0: runtime default)")->capture_default_str();

  std::map<std::string, Action> actions;
  for (const auto& e : entries) actions[e.name] = e.build(app.add_subcommand(e.name, e.summary));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ConfigError& e) {
    // CLI11 reports leftover config keys in INI terms.
    std::string msg = e.what();
    const std::string tag = "INI was not able to parse ";
    if (msg.rfind(tag, 0) == 0) msg = "unknown config key: " + msg.substr(tag.size());
    return fail("config", msg, active, {}, 1);
  } catch (const CLI::ParseError& e) {
    return fail("config", e.what(), active, {}, 1);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  Run run;
  run.seed = global.seed;
  run.out = global.out;
  try {
    fs::create_directories(run.out);
  } catch (const std::exception& e) {
    return fail("io", e.what(), name, {}, 4);
  }

#ifdef _OPENMP
  if (global.threads > 0) omp_set_num_threads(global.threads);
#endif

  const auto start = std::chrono::steady_clock::now();
  try {
    actions.at(name)(run);
  } catch (const PreconditionError& e) {
    return fail("precondition", e.what(), name, run.out, 2);
  } catch (const ContractionFailure& e) {
    return fail("contraction", std::string(e.what()) + " (growth factor " + std::to_string(e.growth()) + ")", name,
                run.out, 3);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), name, run.out, 3);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_json(run.file("result.json"), run.result);
  const json hashed = {{"subcommand", name}, {"seed", run.seed}, {"config", run.config}};
  const json manifest = {
      {"tool", "wstokes"},
      {"version", WSTOKES_VERSION},
      {"subcommand", name},
      {"config", run.config},
      {"seed", run.seed},
      {"prng", corpus_prng},
      {"config_hash", "fnv1a64:" + hex64(fnv1a64(hashed.dump()))},
      {"libraries",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"fftw", std::string(fftw_version)}}},
      {"threads", global.threads},
      {"wall_time_s", wall},
      {"outputs", run.files},
  };
  write_json(run.out / "manifest.json", manifest);
  std::cout << json({{"subcommand", name}, {"result", run.result}}).dump(2) << '\n';
  return 0;
}
