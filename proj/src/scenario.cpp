#include "eisenhart/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eisenhart {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers

[[noreturn]] void config_error(const std::string& label, const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, label + ": " + path + ": " + what);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys, const std::string& label,
                    const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) {
      std::string list;
      for (auto k : keys) list += (list.empty() ? "" : ", ") + std::string(k);
      config_error(label, path.empty() ? item.key() : path + "." + item.key(), "unknown key (allowed: " + list + ")");
    }
  }
}

const json& require_object(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_object()) config_error(label, path, "expected an object");
  return j;
}

double number(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_number()) config_error(label, path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(label, path, "expected a finite number");
  return v;
}

std::string text(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_string()) config_error(label, path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_array()) config_error(label, path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], label, path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> texts(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_array()) config_error(label, path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(text(j[i], label, path + "[" + std::to_string(i) + "]"));
  return out;
}

Range range(const json& j, const std::string& label, const std::string& path) {
  const auto v = numbers(j, label, path);
  if (v.size() != 2 || !(v[0] <= v[1])) config_error(label, path, "expected [lo, hi] with lo <= hi");
  return Range{v[0], v[1]};
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Parses an expression only to report errors against its key path.
void validate_expression(const std::string& src, int n, const Parameters& params, const std::string& label,
                         const std::string& path) {
  if (src.empty()) return;
  try {
    (void)Field::parse(src, n, params);
  } catch (const Error& e) {
    std::string msg = label + ": " + path + ": " + e.what();
    if (e.offset() != Error::npos && msg.find("offset") == std::string::npos)
      msg += " at offset " + std::to_string(e.offset());
    throw Error(e.code(), msg, e.offset());
  }
}

// ---------------------------------------------------------------------------
// Check bookkeeping

struct CheckInfo {
  const char* base;
  double tol;
  const char* certifies;
  bool per_generator;
};

constexpr CheckInfo kChecks[] = {
    {"lift-reduce", 1e-6, "eq:reduction", false},
    {"null-constraint", 1e-8, "eq:null-constraint", false},
    {"u-equation", 1e-8, "eq:uddotu2", false},
    {"w-equation", 1e-7, "eq:w-redundant", false},
    {"closed-form", 1e-6, "eq:damped-eom", false},
    {"homogeneity", 1e-12, "eq:homogeneity", false},
    {"reparametrization", 1e-9, "eq:reparametrization", false},
    {"christoffel", 1e-6, "eq:christoffel", false},
    {"conformal-pair", 1e-12, "eq:conformal-equivalence", false},
    {"transform-rule", 1e-12, "eq:transform-rule", false},
    {"killing", 1e-8, "eq:conformal-killing", true},
    {"degreewise", 1e-10, "eq:degreewise", true},
    {"symmetry", 1e-10, "eq:symmetry-condition", true},
    {"charge", 1e-10, "eq:killing-charge", true},
    {"nonlocal-charge", 1e-6, "eq:nonlocal-charge", true},
};

const CheckInfo* find_check(std::string_view base) {
  for (const auto& c : kChecks)
    if (base == c.base) return &c;
  return nullptr;
}

struct ParsedCheck {
  const CheckInfo* info;
  std::string generator;
};

ParsedCheck parse_check(const std::string& name) {
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  const CheckInfo* info = find_check(base);
  if (!info) throw Error(ErrorCode::ConfigError, "unknown check '" + name + "'");
  if (info->per_generator != (colon != std::string::npos))
    throw Error(ErrorCode::ConfigError, info->per_generator ? "check '" + base + "' needs a generator, as in '" + base +
                                                                  ":<name>'"
                                                            : "check '" + base + "' takes no generator");
  return ParsedCheck{info, colon == std::string::npos ? std::string{} : name.substr(colon + 1)};
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double primes(int k) {
  static const int p[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,  47,  53,  59,  61,  67,  71,
                          73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163};
  return p[k];
}

// ---------------------------------------------------------------------------
// Shared trajectories for one scenario evaluation

class Context {
 public:
  explicit Context(const Scenario& sc) : sc_(sc), entry_(build_entry(sc)), metric_(entry_.system) {}

  const Scenario& scenario() const { return sc_; }
  const CatalogEntry& entry() const { return entry_; }
  const BrinkmannMetric& metric() const { return metric_; }
  int n() const { return entry_.system.n; }

  const ReducedTrajectory& herglotz() {
    if (!herglotz_) herglotz_ = integrate_herglotz(entry_.system, sc_.initial, sc_.span, sc_.integrator);
    return *herglotz_;
  }

  std::vector<double> grid() {
    std::vector<double> g;
    for (const auto& s : herglotz().samples) g.push_back(s.u);
    return g;
  }

  const Trajectory& geodesic() {
    if (!geodesic_) geodesic_ = geodesic_for(sc_.udot0);
    return *geodesic_;
  }

  Trajectory geodesic_for(double udot0, const IntegratorConfig* config = nullptr) {
    const GeodesicState gs0 = lift_state(entry_.system, sc_.initial, udot0);
    return integrate_geodesic_until_u(metric_, gs0, sc_.span.to, config ? *config : sc_.integrator);
  }

  // Geodesic reduced onto the Herglotz u grid.
  const ReducedTrajectory& lifted() {
    if (!lifted_) {
      const auto g = grid();
      lifted_ = reduce_trajectory(geodesic(), g);
    }
    return *lifted_;
  }

  struct CloudState {
    ReducedState rs;
    double udot = 1.0;
  };

  const std::vector<CloudState>& cloud() {
    if (cloud_.empty()) {
      const int n = this->n();
      const Bounds& b = sc_.bounds;
      auto lerp = [](const Range& r, double t) { return r.lo + (r.hi - r.lo) * t; };
      for (const auto& p : halton_cloud(2 * n + 3)) {
        CloudState s;
        s.rs.x.resize(n);
        s.rs.xp.resize(n);
        for (int i = 0; i < n; ++i) {
          s.rs.x(i) = lerp(b.x, p[static_cast<std::size_t>(i)]);
          s.rs.xp(i) = lerp(b.xp, p[static_cast<std::size_t>(n + i)]);
        }
        s.rs.u = lerp(b.u, p[static_cast<std::size_t>(2 * n)]);
        s.rs.w = lerp(b.w, p[static_cast<std::size_t>(2 * n + 1)]);
        s.udot = 0.5 + 1.5 * p[static_cast<std::size_t>(2 * n + 2)];
        cloud_.push_back(std::move(s));
      }
    }
    return cloud_;
  }

 private:
  const Scenario& sc_;
  CatalogEntry entry_;
  BrinkmannMetric metric_;
  std::optional<ReducedTrajectory> herglotz_;
  std::optional<Trajectory> geodesic_;
  std::optional<ReducedTrajectory> lifted_;
  std::vector<CloudState> cloud_;
};

double max_x_gap(const ReducedTrajectory& a, const ReducedTrajectory& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.samples.size() && k < b.samples.size(); ++k)
    gap = std::max(gap, (a.samples[k].x - b.samples[k].x).cwiseAbs().maxCoeff());
  return gap;
}

double max_state_gap(const ReducedTrajectory& a, const ReducedTrajectory& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.samples.size() && k < b.samples.size(); ++k) {
    gap = std::max(gap, (a.samples[k].x - b.samples[k].x).cwiseAbs().maxCoeff());
    gap = std::max(gap, (a.samples[k].xp - b.samples[k].xp).cwiseAbs().maxCoeff());
    gap = std::max(gap, std::abs(a.samples[k].w - b.samples[k].w));
  }
  return gap;
}

bool is_damped(const std::string& name) { return name == "damped-time" || name == "damped-action"; }

double gamma_of(const Scenario& sc) { return sc.params.at("gamma"); }

std::string potential_of(const Scenario& sc) { return sc.potential.value_or("0.5*x1^2"); }

ReportRow make_row(const std::string& name, const CheckInfo& info, double residual, double tol) {
  ReportRow r;
  r.check = name;
  r.residual = residual;
  r.tol = tol;
  r.status = residual <= tol ? "pass" : "fail";
  r.certifies = info.certifies;
  return r;
}

void run_check(Context& ctx, const std::string& name, Report& report) {
  const ParsedCheck pc = parse_check(name);
  const CheckInfo& info = *pc.info;
  const std::string base = info.base;
  const Scenario& sc = ctx.scenario();
  const HerglotzSystem& system = ctx.entry().system;
  const BrinkmannMetric& metric = ctx.metric();
  const int n = ctx.n();
  const auto started = std::chrono::steady_clock::now();
  std::vector<ReportRow> rows;

  const SymmetryGenerator* gen = pc.generator.empty() ? nullptr : &ctx.entry().generator(pc.generator);

  if (base == "lift-reduce") {
    rows.push_back(make_row(name, info, max_x_gap(ctx.lifted(), ctx.herglotz()), info.tol));
  } else if (base == "null-constraint") {
    double r = 0.0;
    for (const auto& s : ctx.geodesic().samples) r = std::max(r, std::abs(s.null_residual));
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "u-equation") {
    rows.push_back(make_row(name, info, u_equation_residual(metric, ctx.geodesic()), info.tol));
  } else if (base == "w-equation") {
    rows.push_back(make_row(name, info, w_equation_residual(metric, ctx.geodesic()), info.tol));
  } else if (base == "closed-form") {
    if (!ctx.entry().closed_form)
      throw Error(ErrorCode::ConfigError, "check 'closed-form': system '" + system.name + "' has no closed form here");
    double r = 0.0;
    const auto& h = ctx.herglotz();
    const auto& l = ctx.lifted();
    for (std::size_t k = 0; k < h.samples.size(); ++k) {
      const double ref = ctx.entry().closed_form(sc.initial, h.samples[k].u);
      r = std::max({r, std::abs(h.samples[k].x(0) - ref), std::abs(l.samples[k].x(0) - ref)});
    }
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "homogeneity") {
    double r = 0.0;
    for (const auto& s : ctx.cloud()) r = std::max(r, homogeneity_residual(system, s.rs, s.udot));
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "reparametrization") {
    // The tolerance sits below the integration error at rtol 1e-10, so these
    // runs use at most rtol 1e-12 and atol 1e-14.
    IntegratorConfig tight = sc.integrator;
    tight.rtol = std::min(tight.rtol, 1e-12);
    tight.atol = std::min(tight.atol, 1e-14);
    const auto g = ctx.grid();
    const ReducedTrajectory ref = reduce_trajectory(ctx.geodesic_for(1.0, &tight), g);
    double r = 0.0;
    for (double udot0 : {0.5, 2.0})
      r = std::max(r, max_state_gap(reduce_trajectory(ctx.geodesic_for(udot0, &tight), g), ref));
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "christoffel") {
    // Central differences of the metric against the autodiff jet and symbols.
    const int d = n + 2;
    const double step = 1e-5;
    double r = 0.0;
    for (const auto& s : ctx.cloud()) {
      const Point p{s.rs.x, s.rs.u, s.rs.w};
      const MetricJet jet = metric_jet(metric, p);
      const Eigen::MatrixXd ginv = metric_inverse(metric, p);
      std::vector<Eigen::MatrixXd> fd(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) {
        Eigen::VectorXd cp = p.coords(), cm = p.coords();
        cp(k) += step;
        cm(k) -= step;
        fd[static_cast<std::size_t>(k)] =
            (metric_eval(metric, Point::from_coords(cp)) - metric_eval(metric, Point::from_coords(cm))) / (2 * step);
        r = std::max(r, (fd[static_cast<std::size_t>(k)] - jet.dg[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
      }
      const Christoffel ad = christoffel(jet, ginv);
      const Christoffel num = christoffel(MetricJet{jet.g, fd}, ginv);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c) r = std::max(r, std::abs(ad(a, b, c) - num(a, b, c)));
    }
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "conformal-pair" || base == "transform-rule") {
    if (!is_damped(sc.system))
      throw Error(ErrorCode::ConfigError, "check '" + base + "' needs system damped-time or damped-action");
    const double gamma = gamma_of(sc);
    const CatalogEntry time_entry = damped_time_dependent(gamma, potential_of(sc), n);
    const CatalogEntry action_entry = damped_action_dependent(gamma, potential_of(sc), n);
    const BrinkmannMetric ga(time_entry.system);
    const BrinkmannMetric gb(action_entry.system);
    if (base == "transform-rule") {
      const TransformSpec t = damped_transform(gamma, n);
      double r = 0.0;
      for (const auto& s : ctx.cloud())
        r = std::max(r, transform_rule_check(time_entry.system, action_entry.system, t, s.rs));
      rows.push_back(make_row(name, info, r, info.tol));
    } else {
      const ConformalMap cm = damped_conformal_map(gamma, n);
      double pointwise = 0.0;
      for (const auto& s : ctx.cloud())
        pointwise = std::max(pointwise, conformal_pullback_check(ga, gb, cm.phi, Point{s.rs.x, s.rs.u, s.rs.w}, cm.omega));
      ReportRow row = make_row(name, info, pointwise, info.tol);
      row.extra["gamma"] = gamma;
      rows.push_back(row);

      // Start from the time-dependent description of the scenario state.
      ReducedState start = sc.initial;
      if (sc.system == "damped-action") start.w = std::exp(gamma * start.u) * sc.initial.w;
      const ConformalFlowGap flow =
          conformal_flow_gap(ga, gb, cm.phi, lift_state(time_entry.system, start, sc.udot0), sc.span.to, sc.integrator);
      rows.push_back(make_row(name + ":flow", info, std::max(flow.x, flow.w), 1e-6));

      ReducedState mapped = start;
      mapped.w = std::exp(-gamma * start.u) * start.w;
      const ReducedTrajectory rt = integrate_herglotz(time_entry.system, start, sc.span, sc.integrator);
      std::vector<double> g;
      for (const auto& s : rt.samples) g.push_back(s.u);
      const ReducedTrajectory ra =
          reduce_trajectory(integrate_geodesic_until_u(gb, lift_state(action_entry.system, mapped, 1.0), sc.span.to,
                                                       sc.integrator),
                            g);
      double wgap = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k)
        wgap = std::max(wgap, std::abs(ra.samples[k].w - std::exp(-gamma * g[k]) * rt.samples[k].w));
      rows.push_back(make_row(name + ":action", info, wgap, 1e-6));
    }
  } else if (base == "killing") {
    double r = 0.0;
    double lmin = INFINITY, lmax = -INFINITY;
    for (const auto& s : ctx.cloud()) {
      const KillingResult k = killing_residual(metric, *gen, Point{s.rs.x, s.rs.u, s.rs.w});
      r = std::max(r, k.residual);
      lmin = std::min(lmin, k.lambda);
      lmax = std::max(lmax, k.lambda);
    }
    ReportRow row = make_row(name, info, r, info.tol);
    row.extra["lambda_min"] = lmin;
    row.extra["lambda_max"] = lmax;
    rows.push_back(row);
  } else if (base == "degreewise") {
    double r = 0.0;
    for (const auto& s : ctx.cloud())
      for (double v : degreewise_identities(system, *gen, Point{s.rs.x, s.rs.u, s.rs.w})) r = std::max(r, v);
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "symmetry") {
    double r = 0.0;
    for (const auto& s : ctx.cloud()) r = std::max(r, symmetry_condition_residual(system, *gen, s.rs));
    rows.push_back(make_row(name, info, r, info.tol));
  } else if (base == "charge") {
    // affine charge against udot Q along the geodesic
    double r = 0.0;
    for (const auto& s : ctx.geodesic().samples) {
      const double udot = s.state.velocity(n);
      ReducedState rs{s.state.point.x, s.state.velocity.head(n) / udot, s.state.point.u, s.state.point.w};
      const double expected = udot * noether_charge(system, *gen, rs);
      r = std::max(r, std::abs(affine_charge(metric, *gen, s.state) - expected) / std::max(1.0, std::abs(expected)));
    }
    ReportRow row = make_row(name, info, r, info.tol);
    const auto& h = ctx.herglotz();
    const double q0 = noether_charge(system, *gen, h.samples.front().state());
    double drift = 0.0;
    for (const auto& s : h.samples) drift = std::max(drift, std::abs(noether_charge(system, *gen, s.state()) - q0));
    row.extra["q_drift"] = drift;
    rows.push_back(row);
  } else if (base == "nonlocal-charge") {
    const NonlocalCharge nl = nonlocal_charge(system, *gen, ctx.herglotz());
    const double scale = std::abs(nl.value.front()) > 1e-8 ? std::abs(nl.value.front()) : 1.0;
    const double lscale = std::abs(nl.local.front()) > 1e-8 ? std::abs(nl.local.front()) : 1.0;
    double drift = 0.0, plain = 0.0;
    for (std::size_t k = 0; k < nl.value.size(); ++k) {
      drift = std::max(drift, std::abs(nl.value[k] - nl.value.front()) / scale);
      plain = std::max(plain, std::abs(nl.local[k] - nl.local.front()) / lscale);
    }
    ReportRow row = make_row(name, info, drift, info.tol);
    row.extra["plain_drift"] = plain;
    rows.push_back(row);
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  for (auto& row : rows) {
    row.seconds = seconds / static_cast<double>(rows.size());
    report.rows.push_back(std::move(row));
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario parse_scenario(std::string_view json_text, const std::string& label) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, label + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  require_object(doc, label, "(document)");
  reject_unknown(doc,
                 {"system", "params", "potential", "custom", "initial", "udot0", "span", "integrator", "checks",
                  "out_dir", "bounds"},
                 label, "");

  Scenario sc;
  if (!doc.contains("system")) config_error(label, "system", "missing");
  sc.system = text(doc["system"], label, "system");
  bool known = false;
  for (const auto& k : catalog_names()) known = known || k == sc.system;
  if (!known) {
    std::string list;
    for (const auto& k : catalog_names()) list += (list.empty() ? "" : ", ") + k;
    config_error(label, "system", "unknown system '" + sc.system + "' (known: " + list + ")");
  }

  if (doc.contains("params")) {
    require_object(doc["params"], label, "params");
    for (const auto& item : doc["params"].items()) {
      if (expr::is_reserved_name(item.key()))
        config_error(label, "params." + item.key(), "name is reserved for a coordinate, function or constant");
      sc.params[item.key()] = number(item.value(), label, "params." + item.key());
    }
  }
  if (doc.contains("potential")) {
    if (!is_damped(sc.system)) config_error(label, "potential", "only the damped systems take a potential");
    sc.potential = text(doc["potential"], label, "potential");
  }

  if (!doc.contains("span")) config_error(label, "span", "missing");
  {
    const json& s = require_object(doc["span"], label, "span");
    reject_unknown(s, {"from", "to"}, label, "span");
    if (!s.contains("from") || !s.contains("to")) config_error(label, "span", "needs both from and to");
    sc.span.from = number(s["from"], label, "span.from");
    sc.span.to = number(s["to"], label, "span.to");
    if (!(sc.span.to > sc.span.from)) config_error(label, "span", "to must exceed from");
  }

  if (!doc.contains("initial")) config_error(label, "initial", "missing");
  {
    const json& s = require_object(doc["initial"], label, "initial");
    reject_unknown(s, {"x", "xp", "u", "w"}, label, "initial");
    if (!s.contains("x")) config_error(label, "initial.x", "missing");
    const auto x = numbers(s["x"], label, "initial.x");
    if (x.empty()) config_error(label, "initial.x", "needs at least one coordinate");
    const auto xp = s.contains("xp") ? numbers(s["xp"], label, "initial.xp") : std::vector<double>(x.size(), 0.0);
    if (xp.size() != x.size())
      config_error(label, "initial.xp", "has " + std::to_string(xp.size()) + " entries, x has " +
                                            std::to_string(x.size()));
    sc.initial.x = to_vector(x);
    sc.initial.xp = to_vector(xp);
    sc.initial.u = s.contains("u") ? number(s["u"], label, "initial.u") : sc.span.from;
    if (sc.initial.u != sc.span.from) config_error(label, "initial.u", "must equal span.from");
    sc.initial.w = s.contains("w") ? number(s["w"], label, "initial.w") : 0.0;
  }
  const int n = static_cast<int>(sc.initial.x.size());
  if (n + 2 > static_cast<int>(Dual::kMaxDim))
    config_error(label, "initial.x", "at most " + std::to_string(Dual::kMaxDim - 2) + " coordinates");

  if (doc.contains("udot0")) {
    sc.udot0 = number(doc["udot0"], label, "udot0");
    if (!(sc.udot0 > 0.0)) config_error(label, "udot0", "must be positive");
  }

  if (doc.contains("integrator")) {
    const json& s = require_object(doc["integrator"], label, "integrator");
    reject_unknown(s, {"rtol", "atol", "max_steps", "max_step"}, label, "integrator");
    if (s.contains("rtol")) sc.integrator.rtol = number(s["rtol"], label, "integrator.rtol");
    if (s.contains("atol")) sc.integrator.atol = number(s["atol"], label, "integrator.atol");
    if (s.contains("max_step")) sc.integrator.max_step = number(s["max_step"], label, "integrator.max_step");
    if (s.contains("max_steps")) {
      const double m = number(s["max_steps"], label, "integrator.max_steps");
      if (!(m >= 1.0) || m != std::floor(m)) config_error(label, "integrator.max_steps", "expected a positive integer");
      sc.integrator.max_steps = static_cast<long>(m);
    }
    if (!(sc.integrator.rtol > 0.0) || !(sc.integrator.atol > 0.0) || !(sc.integrator.max_step > 0.0))
      config_error(label, "integrator", "needs rtol > 0, atol > 0 and max_step > 0");
  }

  if (doc.contains("checks")) {
    sc.checks = texts(doc["checks"], label, "checks");
    for (std::size_t i = 0; i < sc.checks.size(); ++i) {
      try {
        (void)parse_check(sc.checks[i]);
      } catch (const Error& e) {
        config_error(label, "checks[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  if (doc.contains("out_dir")) sc.out_dir = text(doc["out_dir"], label, "out_dir");

  if (doc.contains("bounds")) {
    const json& s = require_object(doc["bounds"], label, "bounds");
    reject_unknown(s, {"x", "xp", "u", "w"}, label, "bounds");
    if (s.contains("x")) sc.bounds.x = range(s["x"], label, "bounds.x");
    if (s.contains("xp")) sc.bounds.xp = range(s["xp"], label, "bounds.xp");
    if (s.contains("u")) sc.bounds.u = range(s["u"], label, "bounds.u");
    if (s.contains("w")) sc.bounds.w = range(s["w"], label, "bounds.w");
  }

  if (sc.system == "custom") {
    if (!doc.contains("custom")) config_error(label, "custom", "missing (required for system custom)");
    const json& s = require_object(doc["custom"], label, "custom");
    reject_unknown(s, {"n", "h", "A", "V", "generators"}, label, "custom");
    CustomSystemConfig cfg;
    cfg.n = n;
    if (s.contains("n")) {
      const double cn = number(s["n"], label, "custom.n");
      if (cn != static_cast<double>(n))
        config_error(label, "custom.n", "does not match the " + std::to_string(n) + " entries of initial.x");
    }
    cfg.parameters = sc.params;
    if (s.contains("h")) cfg.h = texts(s["h"], label, "custom.h");
    if (s.contains("A")) cfg.A = texts(s["A"], label, "custom.A");
    if (s.contains("V")) cfg.V = text(s["V"], label, "custom.V");
    if (!cfg.h.empty() && cfg.h.size() != 1 && cfg.h.size() != static_cast<std::size_t>(n * n))
      config_error(label, "custom.h", "needs 1 or n*n = " + std::to_string(n * n) + " entries");
    if (!cfg.A.empty() && cfg.A.size() != static_cast<std::size_t>(n))
      config_error(label, "custom.A", "needs n = " + std::to_string(n) + " entries");
    for (std::size_t i = 0; i < cfg.h.size(); ++i)
      validate_expression(cfg.h[i], n, sc.params, label, "custom.h[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < cfg.A.size(); ++i)
      validate_expression(cfg.A[i], n, sc.params, label, "custom.A[" + std::to_string(i) + "]");
    validate_expression(cfg.V, n, sc.params, label, "custom.V");
    if (s.contains("generators")) {
      const json& gens = s["generators"];
      if (!gens.is_array()) config_error(label, "custom.generators", "expected an array");
      for (std::size_t g = 0; g < gens.size(); ++g) {
        const std::string path = "custom.generators[" + std::to_string(g) + "]";
        const json& gj = require_object(gens[g], label, path);
        reject_unknown(gj, {"name", "dx", "du", "dw"}, label, path);
        GeneratorSpec spec;
        if (!gj.contains("name")) config_error(label, path + ".name", "missing");
        spec.name = text(gj["name"], label, path + ".name");
        if (gj.contains("dx")) spec.dx = texts(gj["dx"], label, path + ".dx");
        if (!spec.dx.empty() && spec.dx.size() != static_cast<std::size_t>(n))
          config_error(label, path + ".dx", "needs n = " + std::to_string(n) + " entries");
        if (gj.contains("du")) spec.du = text(gj["du"], label, path + ".du");
        if (gj.contains("dw")) spec.dw = text(gj["dw"], label, path + ".dw");
        for (std::size_t i = 0; i < spec.dx.size(); ++i)
          validate_expression(spec.dx[i], n, sc.params, label, path + ".dx[" + std::to_string(i) + "]");
        validate_expression(spec.du, n, sc.params, label, path + ".du");
        validate_expression(spec.dw, n, sc.params, label, path + ".dw");
        cfg.generators.push_back(std::move(spec));
      }
    }
    sc.custom = std::move(cfg);
  } else if (doc.contains("custom")) {
    config_error(label, "custom", "only allowed with system custom");
  }

  if (sc.potential) validate_expression(*sc.potential, n, sc.params, label, "potential");

  // Build once so that missing parameters and unknown generators surface now.
  CatalogEntry entry;
  try {
    entry = build_entry(sc);
  } catch (const Error& e) {
    if (e.is_config_error()) throw Error(e.code(), label + ": " + e.what(), e.offset());
    throw;
  }
  for (std::size_t i = 0; i < sc.checks.size(); ++i) {
    const ParsedCheck pc = parse_check(sc.checks[i]);
    if (!pc.generator.empty()) {
      try {
        (void)entry.generator(pc.generator);
      } catch (const Error& e) {
        config_error(label, "checks[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str(), path.string());
  sc.base_dir = path.parent_path();
  return sc;
}

CatalogEntry build_entry(const Scenario& sc) {
  const int n = static_cast<int>(sc.initial.x.size());
  if (sc.system == "custom") {
    if (!sc.custom) throw Error(ErrorCode::ConfigError, "custom: missing");
    return custom_system(*sc.custom);
  }
  return catalog_entry(sc.system, sc.params, n, sc.potential);
}

std::string ReportRow::to_json() const {
  json j = json::object();
  j["check"] = check;
  j["status"] = status;
  j["residual"] = residual;
  j["tol"] = tol;
  j["seconds"] = seconds;
  j["certifies"] = certifies;
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump();
}

bool Report::all_passed() const {
  for (const auto& r : rows)
    if (r.status == "fail") return false;
  return true;
}

std::string Report::to_jsonl() const {
  std::string out;
  for (const auto& r : rows) out += r.to_json() + "\n";
  return out;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : kChecks) v.push_back(c.per_generator ? std::string(c.base) + ":<gen>" : c.base);
    return v;
  }();
  return names;
}

std::vector<std::vector<double>> halton_cloud(int dim, int count) {
  EISENHART_ASSERT(dim >= 1 && dim <= 38, "halton dimension out of range");
  std::vector<std::vector<double>> out;
  for (int i = 1; i <= count; ++i) {
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      const double base = primes(k);
      double f = 1.0, r = 0.0;
      for (int m = i; m > 0; m /= static_cast<int>(base)) {
        f /= base;
        r += f * (m % static_cast<int>(base));
      }
      p[static_cast<std::size_t>(k)] = r;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string trajectory_csv(const HerglotzSystem& system, const ReducedTrajectory& traj,
                           const std::vector<const SymmetryGenerator*>& charges,
                           const std::vector<const SymmetryGenerator*>& nonlocal_charges) {
  const int n = traj.n;
  std::string out = "u,sigma";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",xp" + std::to_string(i);
  out += ",w,null_residual";
  for (const auto* g : charges) out += ",Q_" + g->name;
  for (const auto* g : nonlocal_charges) out += ",Qnl_" + g->name;
  out += "\n";

  std::vector<NonlocalCharge> nl;
  for (const auto* g : nonlocal_charges) nl.push_back(nonlocal_charge(system, *g, traj));

  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const ReducedSample& s = traj.samples[k];
    out += fmt17(s.u) + "," + fmt17(s.sigma);
    for (int i = 0; i < n; ++i) out += "," + fmt17(s.x(i));
    for (int i = 0; i < n; ++i) out += "," + fmt17(s.xp(i));
    out += "," + fmt17(s.w) + "," + fmt17(s.null_residual);
    for (const auto* g : charges) out += "," + fmt17(noether_charge(system, *g, s.state()));
    for (const auto& c : nl) out += "," + fmt17(c.value[k]);
    out += "\n";
  }
  return out;
}

Report run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  Context ctx(sc);
  Report report;
  run_check(ctx, "lift-reduce", report);
  for (const auto& c : sc.checks)
    if (c != "lift-reduce") run_check(ctx, c, report);

  std::vector<const SymmetryGenerator*> charges, nonlocal;
  for (const auto& c : sc.checks) {
    const ParsedCheck pc = parse_check(c);
    if (std::string_view(pc.info->base) == "charge") charges.push_back(&ctx.entry().generator(pc.generator));
    if (std::string_view(pc.info->base) == "nonlocal-charge") nonlocal.push_back(&ctx.entry().generator(pc.generator));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  const HerglotzSystem& system = ctx.entry().system;
  write_file(out_dir / "geodesic.csv", trajectory_csv(system, ctx.lifted(), charges, nonlocal));
  write_file(out_dir / "herglotz.csv", trajectory_csv(system, ctx.herglotz(), charges, nonlocal));
  write_file(out_dir / "report.jsonl", report.to_jsonl());
  return report;
}

Report check_scenario(const Scenario& sc, const std::vector<std::string>& checks) {
  const auto& names = checks.empty() ? sc.checks : checks;
  if (names.empty()) throw Error(ErrorCode::ConfigError, "no checks requested");
  Context ctx(sc);
  for (const auto& c : names) {
    const ParsedCheck pc = parse_check(c);
    if (!pc.generator.empty()) (void)ctx.entry().generator(pc.generator);
  }
  Report report;
  for (const auto& c : names) run_check(ctx, c, report);
  return report;
}

}  // namespace eisenhart
