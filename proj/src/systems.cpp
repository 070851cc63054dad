#include "eisenhart/systems.hpp"

#include <cmath>
#include <sstream>

namespace eisenhart {

namespace {

std::string x_name(int i) { return "x" + std::to_string(i + 1); }

std::vector<std::string> identity_h(int n) {
  std::vector<std::string> h(static_cast<std::size_t>(n * n), "0");
  for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i * n + i)] = "1";
  return h;
}

void require_gamma(double gamma) {
  if (!std::isfinite(gamma)) throw Error(ErrorCode::ConfigError, "gamma must be finite");
}

void require_n(int n) {
  if (n < 1 || n + 2 > static_cast<int>(Dual::kMaxDim))
    throw Error(ErrorCode::DimensionMismatch, "n must lie in [1, " + std::to_string(Dual::kMaxDim - 2) + "]");
}

}  // namespace

const SymmetryGenerator& CatalogEntry::generator(std::string_view name) const {
  for (const auto& g : generators)
    if (g.name == name) return g;
  std::string known;
  for (const auto& g : generators) known += (known.empty() ? "" : ", ") + g.name;
  throw Error(ErrorCode::ConfigError, "system '" + system.name + "' has no generator '" + std::string(name) +
                                          "' (known: " + (known.empty() ? "none" : known) + ")");
}

CatalogEntry free_particle(int n) {
  require_n(n);
  CatalogEntry e;
  e.system = HerglotzSystem::from_expressions("free", n, identity_h(n), {}, "0");
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> dx(static_cast<std::size_t>(n), "0");
    dx[static_cast<std::size_t>(i)] = "1";
    e.generators.push_back(SymmetryGenerator::from_expressions("d" + x_name(i), n, dx, "", ""));
  }
  e.generators.push_back(SymmetryGenerator::from_expressions("du", n, {}, "1", ""));
  e.generators.push_back(SymmetryGenerator::from_expressions("dw", n, {}, "", "1"));
  if (n >= 2) {
    std::vector<std::string> dx(static_cast<std::size_t>(n), "0");
    dx[0] = "-x2";
    dx[1] = "x1";
    e.generators.push_back(SymmetryGenerator::from_expressions("rot12", n, dx, "", ""));
  }
  e.closed_form = [](const ReducedState& s, double u) { return s.x(0) + s.xp(0) * (u - s.u); };
  e.notes = "h = identity, A = 0, V = 0";
  return e;
}

CatalogEntry harmonic_oscillator(double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw Error(ErrorCode::ConfigError, "omega must be finite and >= 0");
  CatalogEntry e;
  const Parameters p{{"omega", omega}};
  e.system = HerglotzSystem::from_expressions("harmonic", 1, {"1"}, {}, "0.5*omega^2*x1^2", p);
  e.generators.push_back(SymmetryGenerator::from_expressions("du", 1, {}, "1", ""));
  e.generators.push_back(SymmetryGenerator::from_expressions("dw", 1, {}, "", "1"));
  e.closed_form = [omega](const ReducedState& s, double u) {
    const double t = u - s.u;
    if (omega == 0.0) return s.x(0) + s.xp(0) * t;
    return s.x(0) * std::cos(omega * t) + s.xp(0) / omega * std::sin(omega * t);
  };
  e.notes = "V = omega^2 x1^2 / 2; du carries the charge -E";
  return e;
}

CatalogEntry damped_time_dependent(double gamma, const std::string& potential, int n) {
  require_gamma(gamma);
  require_n(n);
  CatalogEntry e;
  const Parameters p{{"gamma", gamma}};
  std::vector<std::string> h = identity_h(n);
  for (auto& s : h)
    if (s == "1") s = "exp(gamma*u)";
  e.system = HerglotzSystem::from_expressions("damped-time", n, h, {}, "exp(gamma*u)*(" + potential + ")", p);
  e.generators.push_back(SymmetryGenerator::from_expressions("dw", n, {}, "", "1"));
  e.generators.push_back(SymmetryGenerator::from_expressions("du", n, {}, "1", "gamma*w", p));
  if (n == 1 && potential == "0.5*x1^2" && std::abs(gamma) < 2.0)
    e.closed_form = [gamma](const ReducedState& s, double u) {
      return closed_form_damped(s.x(0), s.xp(0), gamma, u - s.u);
    };
  e.notes = "h = e^{gamma u}, V = e^{gamma u} V0; du carries dw = gamma w";
  return e;
}

CatalogEntry damped_action_dependent(double gamma, const std::string& potential, int n) {
  require_gamma(gamma);
  require_n(n);
  CatalogEntry e;
  const Parameters p{{"gamma", gamma}};
  e.system = HerglotzSystem::from_expressions("damped-action", n, identity_h(n), {}, "(" + potential + ")+gamma*w", p);
  e.generators.push_back(SymmetryGenerator::from_expressions("du", n, {}, "1", ""));
  e.generators.push_back(SymmetryGenerator::from_expressions("dw", n, {}, "", "exp(-gamma*u)", p));
  if (n == 1 && potential == "0.5*x1^2" && std::abs(gamma) < 2.0)
    e.closed_form = [gamma](const ReducedState& s, double u) {
      return closed_form_damped(s.x(0), s.xp(0), gamma, u - s.u);
    };
  e.notes = "h = identity, V = V0 + gamma w; du has a nonlocal charge";
  return e;
}

ConformalMap damped_conformal_map(double gamma, int n) {
  require_gamma(gamma);
  require_n(n);
  const Parameters p{{"gamma", gamma}};
  ConformalMap m;
  for (int i = 0; i < n; ++i) m.phi.components.push_back(Field::parse(x_name(i), n));
  m.phi.components.push_back(Field::parse("u", n));
  m.phi.components.push_back(Field::parse("exp(-gamma*u)*w", n, p));
  m.omega = Field::parse("exp(-gamma*u)", n, p);
  return m;
}

TransformSpec damped_transform(double gamma, int n) {
  require_gamma(gamma);
  require_n(n);
  std::vector<std::string> q;
  for (int i = 0; i < n; ++i) q.push_back(x_name(i));
  return TransformSpec::from_expressions(n, "u", q, "exp(-gamma*u)*w", Parameters{{"gamma", gamma}});
}

CatalogEntry custom_system(const CustomSystemConfig& config) {
  require_n(config.n);
  CatalogEntry e;
  const std::vector<std::string> h = config.h.empty() ? std::vector<std::string>{"1"} : config.h;
  e.system = HerglotzSystem::from_expressions(config.name, config.n, h, config.A, config.V, config.parameters);
  for (const auto& g : config.generators)
    e.generators.push_back(SymmetryGenerator::from_expressions(g.name, config.n, g.dx, g.du, g.dw, config.parameters));
  e.notes = "user supplied";
  return e;
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"free", "harmonic", "damped-time", "damped-action", "custom"};
  return names;
}

std::vector<CatalogListing> catalog_listing() {
  return {
      {"free", "free particle, h = identity, A = 0, V = 0", {}, {"dx1..dxn", "du", "dw", "rot12 (n >= 2)"}},
      {"harmonic", "harmonic oscillator, V = omega^2 x1^2 / 2", {"omega"}, {"du", "dw"}},
      {"damped-time", "damped oscillator, L = e^{gamma u}(x'^2/2 - V)", {"gamma"}, {"dw", "du"}},
      {"damped-action", "damped oscillator, L = x'^2/2 - V - gamma w", {"gamma"}, {"du", "dw"}},
      {"custom", "h, A, V from expressions", {"any"}, {"user defined"}},
  };
}

CatalogEntry catalog_entry(const std::string& name, const Parameters& parameters, int n,
                           const std::optional<std::string>& potential) {
  auto need = [&](const char* key) {
    auto it = parameters.find(key);
    if (it == parameters.end())
      throw Error(ErrorCode::ConfigError, "system '" + name + "' requires parameter \"" + key + "\" in params");
    return it->second;
  };
  auto only_n1 = [&]() {
    if (n != 1) throw Error(ErrorCode::DimensionMismatch, "system '" + name + "' has n = 1, initial state has n = " +
                                                              std::to_string(n));
  };
  const std::string V0 = potential.value_or("0.5*x1^2");
  if (name == "free") return free_particle(n);
  if (name == "harmonic") {
    only_n1();
    return harmonic_oscillator(need("omega"));
  }
  if (name == "damped-time") return damped_time_dependent(need("gamma"), V0, n);
  if (name == "damped-action") return damped_action_dependent(need("gamma"), V0, n);
  std::ostringstream os;
  os << "unknown system '" << name << "' (known:";
  for (const auto& k : catalog_names()) os << ' ' << k;
  os << ')';
  throw Error(ErrorCode::ConfigError, os.str());
}

}  // namespace eisenhart
