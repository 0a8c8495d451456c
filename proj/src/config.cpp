#include "bdk/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bdk/format.hpp"

namespace bdk {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::string origin_, std::size_t line_,
                         const std::string& msg)
    : std::runtime_error(origin_ + (line_ ? ":" + std::to_string(line_) : "") +
                         ": " + msg),
      origin(std::move(origin_)),
      line(line_) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  std::size_t line;
  bool used = false;
};

class Reader {
 public:
  Reader(std::string origin, std::map<std::string, Entry> entries)
      : origin_(std::move(origin)), e_(std::move(entries)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = e_.find(key);
    throw ConfigError(origin_, it == e_.end() ? 0 : it->second.line,
                      key + ": " + msg);
  }

  bool has(const std::string& key) const { return e_.count(key) != 0; }
  std::size_t line(const std::string& key) const {
    auto it = e_.find(key);
    return it == e_.end() ? 0 : it->second.line;
  }

  const std::string* raw(const std::string& key) {
    auto it = e_.find(key);
    if (it == e_.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }

  void str(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  double to_double(const std::string& key, const std::string& tok) const {
    double v = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v))
      fail(key, "expected a finite number, got '" + tok + "'");
    return v;
  }

  std::size_t to_size(const std::string& key, const std::string& tok) const {
    unsigned long long v = 0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e)
      fail(key, "expected a nonnegative integer, got '" + tok + "'");
    return static_cast<std::size_t>(v);
  }

  void num(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(key, *v);
  }
  void size(const std::string& key, std::size_t& out) {
    if (auto v = raw(key)) out = to_size(key, *v);
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  std::vector<std::string> tokens(const std::string& key) {
    std::vector<std::string> out;
    auto v = raw(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) fail(key, "empty list element");
      out.push_back(tok);
    }
    return out;
  }

  void num_list(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& t : tokens(key)) out.push_back(to_double(key, t));
  }
  void size_list(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& t : tokens(key)) out.push_back(to_size(key, t));
  }

  void reject_unused() const {
    for (const auto& [k, e] : e_)
      if (!e.used) throw ConfigError(origin_, e.line, "unknown key '" + k + "'");
  }

 private:
  std::string origin_;
  std::map<std::string, Entry> e_;
};

const char* kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::Monomer: return "monomer";
    case InitialKind::Equilibrium: return "equilibrium";
    case InitialKind::File: return "file";
    case InitialKind::EquilibriumPlusMonomer: return "equilibrium_plus_monomer";
  }
  return "?";
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += fmt_double(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin, lineno, "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(origin, lineno, "empty key");
    if (value.empty())
      throw ConfigError(origin, lineno, "key '" + key + "' has no value");
    if (entries.count(key))
      throw ConfigError(origin, lineno,
                        "duplicate key '" + key + "' (first set on line " +
                            std::to_string(entries[key].line) + ")");
    entries.emplace(key, Entry{value, lineno});
  }

  Reader r(origin, std::move(entries));
  RunConfig c;
  r.str("scenario", c.scenario);

  auto& m = c.model;
  r.str("model.family", m.family);
  if (m.family != "power_law" && m.family != "custom")
    r.fail("model.family", "expected power_law or custom, got '" + m.family + "'");
  r.size("model.N", m.N);
  if (m.N < 2) r.fail("model.N", "the interaction cutoff must satisfy N >= 2");
  r.num("model.C1", m.C1);
  r.num("model.alpha", m.alpha);
  r.num("model.C2", m.C2);
  r.num("model.delta", m.delta);
  r.str("model.table", m.table);
  if (m.family == "power_law") {
    if (m.C1 < 0.0) r.fail("model.C1", "must be >= 0");
    if (m.C2 < 0.0) r.fail("model.C2", "must be >= 0");
    if (m.alpha < 0.0 || m.alpha >= 1.0) r.fail("model.alpha", "must lie in [0, 1)");
    if (m.delta < 0.0 || m.delta >= 1.0) r.fail("model.delta", "must lie in [0, 1)");
  } else if (m.table.empty()) {
    r.fail("model.family", "custom family needs model.table");
  }

  r.size("L", c.L);
  r.size_list("sweep.L", c.sweep_L);
  if (c.sweep_L.empty() && !r.has("L")) r.fail("L", "missing (or give sweep.L)");
  const std::size_t min_L = 2 * m.N + 1;
  if (r.has("L") && c.L < min_L)
    r.fail("L", "must be >= 2N + 1 = " + std::to_string(min_L));
  for (std::size_t v : c.sweep_L)
    if (v < min_L) r.fail("sweep.L", "every size must be >= 2N + 1 = " +
                                         std::to_string(min_L));

  auto& ic = c.initial;
  std::string type;
  r.str("initial.type", type);
  if (type.empty()) r.fail("initial.type", "missing");
  if (type == "monomer") ic.kind = InitialKind::Monomer;
  else if (type == "equilibrium") ic.kind = InitialKind::Equilibrium;
  else if (type == "file") ic.kind = InitialKind::File;
  else if (type == "equilibrium_plus_monomer")
    ic.kind = InitialKind::EquilibriumPlusMonomer;
  else
    r.fail("initial.type", "expected monomer, equilibrium, file or "
                           "equilibrium_plus_monomer, got '" + type + "'");
  r.num("initial.rho0", ic.rho0);
  r.num("initial.rho", ic.rho);
  r.str("initial.path", ic.path);
  r.num("initial.rho_eq", ic.rho_eq);
  r.num("initial.rho_extra", ic.rho_extra);
  r.size("initial.n", ic.n);
  for (const char* k : {"initial.rho0", "initial.rho", "initial.rho_eq",
                        "initial.rho_extra"}) {
    double v = 0.0;
    if (r.has(k)) {
      r.num(k, v);
      if (v < 0.0) r.fail(k, "densities must be >= 0");
    }
  }
  auto need = [&](const char* k) {
    if (!r.has(k)) r.fail("initial.type", std::string("'") + type + "' needs " + k);
  };
  switch (ic.kind) {
    case InitialKind::Monomer: need("initial.rho0"); break;
    case InitialKind::Equilibrium: need("initial.rho"); break;
    case InitialKind::File: need("initial.path"); break;
    case InitialKind::EquilibriumPlusMonomer:
      need("initial.rho_eq");
      need("initial.rho_extra");
      break;
  }

  auto& ig = c.integrator;
  r.num("integrator.rel_tol", ig.rel_tol);
  r.num("integrator.abs_tol", ig.abs_tol);
  r.num("integrator.h_init", ig.h_init);
  r.num("integrator.h_max", ig.h_max);
  if (!r.has("integrator.T")) r.fail("integrator.T", "missing");
  r.num("integrator.T", ig.T);
  r.num_list("integrator.snapshot_times", ig.snapshot_times);
  r.num("integrator.snapshot_every", c.snapshot_every);
  r.size("integrator.max_steps", ig.max_steps);
  if (c.snapshot_every < 0.0)
    r.fail("integrator.snapshot_every", "must be >= 0");
  try {
    ig.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin, 0, std::string("integrator: ") + e.what());
  }

  auto& d = c.diagnostics;
  r.size_list("diagnostics.G_indices", d.G_indices);
  for (std::size_t i : d.G_indices)
    if (i < 1) r.fail("diagnostics.G_indices", "indices start at 1");
  r.num_list("diagnostics.moments", d.moments);
  r.size("diagnostics.head", d.head);
  if (r.has("diagnostics.reference_rho")) {
    double v = 0.0;
    r.num("diagnostics.reference_rho", v);
    if (v < 0.0) r.fail("diagnostics.reference_rho", "must be >= 0");
    d.reference_rho = v;
  }

  auto& b = c.bound;
  r.flag("bound.enabled", b.enabled);
  r.num("bound.t0", b.t0);
  r.num("bound.lambda", b.lambda);
  r.size("bound.k0", b.k0);
  r.size("bound.M", b.M);
  r.num("bound.C", b.C);
  if (b.enabled) {
    if (!(b.lambda > 1.0)) r.fail("bound.lambda", "must be > 1");
    if (b.k0 < 1) r.fail("bound.k0", "must be >= 1");
    if (!(b.C > 0.0)) r.fail("bound.C", "must be > 0");
  }

  r.size("validate.j_max", c.validate_j_max);
  r.num("validate.tol", c.validate_tol);
  if (c.validate_j_max < 2 * m.N)
    r.fail("validate.j_max", "must be >= 2N");
  if (!(c.validate_tol > 0.0)) r.fail("validate.tol", "must be > 0");

  r.size("output.head", c.output_head);
  r.flag("output.state_binaries", c.state_binaries);

  r.reject_unused();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str(), path);
  const fs::path parent = fs::path(path).parent_path();
  c.base_dir = parent.empty() ? "." : parent.string();
  c.validate(path);
  return c;
}

std::string RunConfig::resolve(const std::string& p) const {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).string();
}

void RunConfig::validate(const std::string& origin) const {
  auto bad = [&](const std::string& msg) { throw ConfigError(origin, 0, msg); };
  if (model.N < 2) bad("model.N: the interaction cutoff must satisfy N >= 2");
  const std::size_t min_L = 2 * model.N + 1;
  if (sweep_L.empty() && L < min_L)
    bad("L: must be >= 2N + 1 = " + std::to_string(min_L));
  for (std::size_t v : sweep_L)
    if (v < min_L) bad("sweep.L: every size must be >= 2N + 1");
  if (initial.rho0 < 0.0 || initial.rho < 0.0 || initial.rho_eq < 0.0 ||
      initial.rho_extra < 0.0)
    bad("initial: densities must be >= 0");
  if (model.family == "custom" && !fs::exists(resolve(model.table)))
    bad("model.table: no such file '" + resolve(model.table) + "'");
  if (initial.kind == InitialKind::File && !fs::exists(resolve(initial.path)))
    bad("initial.path: no such file '" + resolve(initial.path) + "'");
  try {
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("integrator: ") + e.what());
  }
}

CoefficientModel RunConfig::build_model() const {
  if (model.family == "custom")
    return load_custom_table(resolve(model.table), model.N);
  return CoefficientModel::power_law(model.N, model.C1, model.alpha, model.C2,
                                     model.delta);
}

IntegratorConfig RunConfig::integrator_for_run() const {
  IntegratorConfig ig = integrator;
  if (ig.snapshot_times.empty() && snapshot_every > 0.0) {
    // t = 0 plus multiples of the spacing, with T appended by the integrator
    ig.snapshot_times.push_back(0.0);
    for (std::size_t i = 1;; ++i) {
      const double t = static_cast<double>(i) * snapshot_every;
      if (t >= ig.T * (1.0 - 1e-12)) break;
      ig.snapshot_times.push_back(t);
    }
  }
  return ig;
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) {
    os << k << " = " << v << "\n";
  };
  kv("scenario", c.scenario);
  os << "\n";
  kv("model.family", c.model.family);
  kv("model.N", std::to_string(c.model.N));
  if (c.model.family == "custom") {
    kv("model.table", c.model.table);
  } else {
    kv("model.C1", fmt_double(c.model.C1));
    kv("model.alpha", fmt_double(c.model.alpha));
    kv("model.C2", fmt_double(c.model.C2));
    kv("model.delta", fmt_double(c.model.delta));
  }
  os << "\n";
  if (c.sweep_L.empty()) kv("L", std::to_string(c.L));
  else kv("sweep.L", join(c.sweep_L));
  os << "\n";
  const auto& ic = c.initial;
  kv("initial.type", kind_name(ic.kind));
  switch (ic.kind) {
    case InitialKind::Monomer: kv("initial.rho0", fmt_double(ic.rho0)); break;
    case InitialKind::Equilibrium: kv("initial.rho", fmt_double(ic.rho)); break;
    case InitialKind::File: kv("initial.path", ic.path); break;
    case InitialKind::EquilibriumPlusMonomer:
      kv("initial.rho_eq", fmt_double(ic.rho_eq));
      kv("initial.rho_extra", fmt_double(ic.rho_extra));
      break;
  }
  if (ic.n) kv("initial.n", std::to_string(ic.n));
  os << "\n";
  const auto& ig = c.integrator;
  kv("integrator.rel_tol", fmt_double(ig.rel_tol));
  kv("integrator.abs_tol", fmt_double(ig.abs_tol));
  kv("integrator.h_init", fmt_double(ig.h_init));
  kv("integrator.h_max", fmt_double(ig.h_max));
  kv("integrator.T", fmt_double(ig.T));
  if (!ig.snapshot_times.empty())
    kv("integrator.snapshot_times", join(ig.snapshot_times));
  if (c.snapshot_every > 0.0)
    kv("integrator.snapshot_every", fmt_double(c.snapshot_every));
  kv("integrator.max_steps", std::to_string(ig.max_steps));
  os << "\n";
  const auto& d = c.diagnostics;
  if (!d.G_indices.empty()) kv("diagnostics.G_indices", join(d.G_indices));
  if (!d.moments.empty()) kv("diagnostics.moments", join(d.moments));
  kv("diagnostics.head", std::to_string(d.head));
  if (d.reference_rho) kv("diagnostics.reference_rho", fmt_double(*d.reference_rho));
  if (c.bound.enabled) {
    os << "\n";
    kv("bound.enabled", "true");
    kv("bound.t0", fmt_double(c.bound.t0));
    kv("bound.lambda", fmt_double(c.bound.lambda));
    kv("bound.k0", std::to_string(c.bound.k0));
    if (c.bound.M) kv("bound.M", std::to_string(c.bound.M));
    kv("bound.C", fmt_double(c.bound.C));
  }
  os << "\n";
  kv("validate.j_max", std::to_string(c.validate_j_max));
  kv("validate.tol", fmt_double(c.validate_tol));
  kv("output.head", std::to_string(c.output_head));
  kv("output.state_binaries", c.state_binaries ? "true" : "false");
  return os.str();
}

std::vector<std::string> preset_names() {
  return {"subcritical", "critical", "supercritical", "refinement"};
}

namespace {

RunConfig reference_base() {
  RunConfig c;
  c.model = ModelSpec{};  // C1 = 1, alpha = 0.5, C2 = 1, delta = 0.5, N = 2
  c.L = 2000;
  c.integrator.rel_tol = 1e-10;
  c.integrator.abs_tol = 1e-20;
  c.integrator.h_init = 1e-4;
  c.integrator.h_max = 1.0;
  c.diagnostics.G_indices = {2, 5, 10, 20, 50, 100};
  c.diagnostics.moments = {2.0};
  c.diagnostics.head = 10;
  c.output_head = 10;
  return c;
}

}  // namespace

RunConfig preset(const std::string& name) {
  RunConfig c = reference_base();
  c.scenario = name;
  c.initial.kind = InitialKind::Monomer;
  if (name == "subcritical") {
    c.initial.rho0 = 2.0;
    c.integrator.T = 1000.0;
    c.snapshot_every = 5.0;
  } else if (name == "critical") {
    c.initial.rho0 = kReferenceCriticalDensity;
    c.integrator.T = 20000.0;
    c.snapshot_every = 100.0;
  } else if (name == "supercritical") {
    c.initial.rho0 = 20.0;
    c.integrator.T = kSupercriticalHorizon;
    c.snapshot_every = kSupercriticalHorizon / 200.0;
    c.diagnostics.G_indices.push_back(c.L / 2);
  } else if (name == "refinement") {
    c.initial.rho0 = 20.0;
    c.sweep_L = {250, 500, 1000, 2000};
    c.integrator.T = kSupercriticalHorizon;
    c.snapshot_every = kSupercriticalHorizon / 200.0;
    c.diagnostics.G_indices = {2, 5, 10, 20, 50, 100, 125, 250, 500, 1000};
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (known: " + list + ")");
  }
  return c;
}

}  // namespace bdk
