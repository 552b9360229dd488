#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "fixcalc/error.hpp"
#include "toml_lite.hpp"

namespace fixcalc::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::Config, "field '" + field + "': " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json* find(const json& table, const char* key) {
  auto it = table.find(key);
  return it == table.end() ? nullptr : &*it;
}

void check_keys(const json& table, const std::string& path, const std::set<std::string>& allowed) {
  if (!table.is_object()) bad(path, "expected a table");
  for (const auto& [k, v] : table.items()) {
    if (!allowed.contains(k)) bad(join(path, k), "unknown key");
  }
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(field, "expected a finite number");
  return d;
}

std::uint64_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(field, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) bad(field, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) bad(field, "expected true or false");
  return v.get<bool>();
}

std::vector<double> as_numbers(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) bad(field, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Point as_point(const json& v, const std::string& field) { return Point(as_numbers(v, field)); }

const json& required(const json& table, const std::string& path, const char* key) {
  const json* v = find(table, key);
  if (!v) bad(join(path, key), "missing");
  return *v;
}

PrimitiveSet parse_set(const json& t, const std::string& path) {
  const std::string kind = as_string(required(t, path, "kind"), join(path, "kind"));
  try {
    if (kind == "hyperplane" || kind == "halfspace") {
      check_keys(t, path, {"kind", "normal", "offset"});
      Point n = as_point(required(t, path, "normal"), join(path, "normal"));
      const double b = as_number(required(t, path, "offset"), join(path, "offset"));
      return kind == "hyperplane" ? PrimitiveSet::hyperplane(std::move(n), b) : PrimitiveSet::halfspace(std::move(n), b);
    }
    if (kind == "ball") {
      check_keys(t, path, {"kind", "center", "radius"});
      return PrimitiveSet::ball(as_point(required(t, path, "center"), join(path, "center")),
                                as_number(required(t, path, "radius"), join(path, "radius")));
    }
    if (kind == "box") {
      check_keys(t, path, {"kind", "lower", "upper"});
      return PrimitiveSet::box(as_point(required(t, path, "lower"), join(path, "lower")),
                               as_point(required(t, path, "upper"), join(path, "upper")));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    bad(path, e.what());
  }
  bad(join(path, "kind"), "unknown set kind '" + kind + "' (hyperplane, halfspace, ball, box)");
}

LinearMap parse_linear_map(const json& t, std::uint64_t seed) {
  const std::string path = "linear_map";
  check_keys(t, path, {"rows", "norm"});
  const json& rows = required(t, path, "rows");
  if (!rows.is_array() || rows.empty()) bad("linear_map.rows", "expected an array of rows");
  std::vector<std::vector<double>> data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.push_back(as_numbers(rows[i], "linear_map.rows[" + std::to_string(i) + "]"));
  }
  try {
    LinearMap a = LinearMap::from_rows(data);
    if (const json* n = find(t, "norm")) {
      a.set_norm(as_number(*n, "linear_map.norm"));
    } else if (!a.is_zero()) {
      a.estimate_norm(0, seed);
    }
    return a;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    bad(path, e.what());
  }
}

const PrimitiveSet& lookup_set(const ExperimentConfig& c, const std::string& name, const std::string& field) {
  auto it = c.sets.find(name);
  if (it == c.sets.end()) bad(field, "no set named '" + name + "' in [sets]");
  return it->second;
}

OperatorHandle build_node(const ExperimentConfig& c, const json& node, const std::string& path) {
  if (!node.is_object()) bad(path, "expected a table");
  const std::string op = as_string(required(node, path, "op"), join(path, "op"));
  auto child = [&](const char* key) { return build_node(c, required(node, path, key), join(path, key)); };
  try {
    if (op == "projection") {
      check_keys(node, path, {"op", "set"});
      const std::string name = as_string(required(node, path, "set"), join(path, "set"));
      return projection(lookup_set(c, name, join(path, "set")));
    }
    if (op == "identity") {
      check_keys(node, path, {"op", "dim"});
      return identity(as_count(required(node, path, "dim"), join(path, "dim")));
    }
    if (op == "relax") {
      check_keys(node, path, {"op", "lambda", "arg"});
      return relax(child("arg"), as_number(required(node, path, "lambda"), join(path, "lambda")));
    }
    if (op == "compose") {
      check_keys(node, path, {"op", "outer", "inner"});
      return compose(child("outer"), child("inner"));
    }
    if (op == "combination") {
      const std::vector<double> w = as_numbers(required(node, path, "weights"), join(path, "weights"));
      std::set<std::string> allowed{"op", "weights"};
      std::vector<OperatorHandle> terms;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string key = "term" + std::to_string(i);
        allowed.insert(key);
        terms.push_back(build_node(c, required(node, path, key.c_str()), join(path, key)));
      }
      check_keys(node, path, allowed);
      return convex_combination(terms, w);
    }
    if (op == "landweber") {
      check_keys(node, path, {"op", "arg"});
      if (!c.linear_map) bad(path, "landweber needs a [linear_map] table");
      return landweber(child("arg"), *c.linear_map);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    bad(path, e.what());
  }
  bad(join(path, "op"), "unknown operator '" + op + "' (projection, identity, relax, compose, combination, landweber)");
}

PropertyClaim parse_claim(const json& t) {
  const std::string name = as_string(required(t, "verify", "claim"), "verify.claim");
  auto param = [&] { return as_number(required(t, "verify", "parameter"), "verify.parameter"); };
  if (name == "NE") return {PropertyKind::NE, 0.0, {}};
  if (name == "FNE") return {PropertyKind::FNE, 0.0, {}};
  if (name == "Cutter") return {PropertyKind::Cutter, 0.0, {}};
  if (name == "RFNE") return {PropertyKind::RFNE, param(), {}};
  if (name == "SPC") return {PropertyKind::SPC, param(), {}};
  if (name == "RelaxedCutter") return {PropertyKind::RelaxedCutter, param(), {}};
  if (name == "Demicontraction") return {PropertyKind::Demicontraction, param(), {}};
  bad("verify.claim", "unknown claim '" + name + "' (NE, FNE, Cutter, RFNE, SPC, RelaxedCutter, Demicontraction)");
}

}  // namespace

MethodKind parse_method(const std::string& name) {
  if (name == "DR") return MethodKind::DR;
  if (name == "RASPC") return MethodKind::RASPC;
  if (name == "EADC") return MethodKind::EADC;
  if (name == "Moudafi") return MethodKind::Moudafi;
  if (name == "Custom") return MethodKind::Custom;
  throw Error(ErrorKind::Config, "unknown method '" + name + "' (DR, RASPC, EADC, Moudafi, Custom)");
}

std::string_view to_string(MethodKind kind) noexcept {
  switch (kind) {
    case MethodKind::DR: return "DR";
    case MethodKind::RASPC: return "RASPC";
    case MethodKind::EADC: return "EADC";
    case MethodKind::Moudafi: return "Moudafi";
    case MethodKind::Custom: return "Custom";
  }
  return "?";
}

ExperimentConfig load_config(const json& doc) {
  check_keys(doc, "",
             {"name", "seed", "methods", "sets", "problem", "linear_map", "split", "operator", "params", "stopping",
              "start", "output", "verify"});
  ExperimentConfig c;
  c.raw = doc;
  if (const json* v = find(doc, "name")) c.name = as_string(*v, "name");
  if (const json* v = find(doc, "seed")) c.seed = as_count(*v, "seed");

  if (const json* sets = find(doc, "sets")) {
    if (!sets->is_object()) bad("sets", "expected a table");
    for (const auto& [name, t] : sets->items()) c.sets.emplace(name, parse_set(t, "sets." + name));
  }
  if (const json* p = find(doc, "problem")) {
    check_keys(*p, "problem", {"A", "B"});
    if (const json* v = find(*p, "A")) c.set_a = as_string(*v, "problem.A");
    if (const json* v = find(*p, "B")) c.set_b = as_string(*v, "problem.B");
    if (c.set_a) lookup_set(c, *c.set_a, "problem.A");
    if (c.set_b) lookup_set(c, *c.set_b, "problem.B");
  }
  if (const json* m = find(doc, "linear_map")) c.linear_map = parse_linear_map(*m, c.seed);
  if (const json* s = find(doc, "split")) {
    check_keys(*s, "split", {"S", "U"});
    c.split_s = as_string(required(*s, "split", "S"), "split.S");
    c.split_u = as_string(required(*s, "split", "U"), "split.U");
    lookup_set(c, *c.split_s, "split.S");
    lookup_set(c, *c.split_u, "split.U");
  }
  if (const json* o = find(doc, "operator")) {
    if (!o->is_object()) bad("operator", "expected a table");
    c.operator_tree = *o;
  }

  const json& methods = required(doc, "", "methods");
  if (!methods.is_array() || methods.empty()) bad("methods", "expected a nonempty array of method names");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string field = "methods[" + std::to_string(i) + "]";
    const std::string name = as_string(methods[i], field);
    try {
      c.methods.push_back(parse_method(name));
    } catch (const Error&) {
      bad(field, "unknown method '" + name + "' (DR, RASPC, EADC, Moudafi, Custom)");
    }
  }

  if (const json* p = find(doc, "params")) {
    check_keys(*p, "params", {"lambda", "mu", "epsilon", "schedule", "sigma"});
    if (const json* v = find(*p, "lambda")) c.lambda = as_number(*v, "params.lambda");
    if (const json* v = find(*p, "mu")) c.mu = as_number(*v, "params.mu");
    if (const json* v = find(*p, "epsilon")) c.epsilon = as_number(*v, "params.epsilon");
    if (const json* v = find(*p, "schedule")) {
      c.schedule = v->is_array() ? as_numbers(*v, "params.schedule")
                                 : std::vector<double>{as_number(*v, "params.schedule")};
    }
    if (const json* v = find(*p, "sigma")) c.sigma = as_number(*v, "params.sigma");
    if (!(c.lambda > 0.0)) bad("params.lambda", "must be positive");
    if (!(c.mu > 0.0)) bad("params.mu", "must be positive");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) bad("params.epsilon", "must lie in (0, 1)");
    for (double l : c.schedule) {
      if (!(l >= c.epsilon && l <= 2.0 - c.epsilon)) bad("params.schedule", "values must lie in [epsilon, 2 - epsilon]");
    }
    if (c.sigma && !(*c.sigma > 0.0)) bad("params.sigma", "must be positive");
  }

  if (const json* s = find(doc, "stopping")) {
    check_keys(*s, "stopping", {"residual_tol", "max_iters", "allow_max_iters", "stall_window", "stall_min_decrease"});
    if (const json* v = find(*s, "residual_tol")) c.stopping.residual_tol = as_number(*v, "stopping.residual_tol");
    if (const json* v = find(*s, "max_iters")) c.stopping.max_iters = as_count(*v, "stopping.max_iters");
    if (const json* v = find(*s, "allow_max_iters")) c.allow_max_iters = as_bool(*v, "stopping.allow_max_iters");
    if (const json* v = find(*s, "stall_window")) {
      c.stopping.stall = StallDetection{as_count(*v, "stopping.stall_window"), 0.0};
      if (const json* d = find(*s, "stall_min_decrease")) {
        c.stopping.stall->min_decrease = as_number(*d, "stopping.stall_min_decrease");
      }
    }
    if (!(c.stopping.residual_tol > 0.0)) bad("stopping.residual_tol", "must be positive");
    if (c.stopping.max_iters < 1) bad("stopping.max_iters", "must be >= 1");
    if (c.stopping.stall && c.stopping.stall->window < 1) bad("stopping.stall_window", "must be >= 1");
  }

  if (const json* s = find(doc, "start")) {
    check_keys(*s, "start", {"x0", "reference"});
    if (const json* v = find(*s, "x0")) c.x0 = as_point(*v, "start.x0");
    if (const json* v = find(*s, "reference")) c.reference = as_point(*v, "start.reference");
  }

  if (const json* o = find(doc, "output")) {
    check_keys(*o, "output", {"csv", "json"});
    if (const json* v = find(*o, "csv")) c.csv_path = as_string(*v, "output.csv");
    if (const json* v = find(*o, "json")) c.json_path = as_string(*v, "output.json");
    if (c.methods.size() > 1) {
      for (const auto* p : {&c.csv_path, &c.json_path}) {
        if (!p->empty() && p->find("{method}") == std::string::npos) {
          bad(p == &c.csv_path ? "output.csv" : "output.json", "must contain {method} when several methods run");
        }
      }
    }
  }

  if (const json* v = find(doc, "verify")) {
    check_keys(*v, "verify", {"claim", "parameter", "samples", "fix_points", "radii"});
    VerifySpec spec{parse_claim(*v), 10000, {}, {0.1, 1.0, 10.0}};
    if (const json* s = find(*v, "samples")) spec.samples = as_count(*s, "verify.samples");
    if (spec.samples < 1) bad("verify.samples", "must be >= 1");
    if (const json* f = find(*v, "fix_points")) {
      if (!f->is_array()) bad("verify.fix_points", "expected an array of points");
      for (std::size_t i = 0; i < f->size(); ++i) {
        spec.fix_points.push_back(as_point((*f)[i], "verify.fix_points[" + std::to_string(i) + "]"));
      }
    }
    if (const json* r = find(*v, "radii")) spec.radii = as_numbers(*r, "verify.radii");
    c.verify = std::move(spec);
  }

  // Method/parameter compatibility.
  for (MethodKind m : c.methods) {
    switch (m) {
      case MethodKind::DR:
      case MethodKind::RASPC:
      case MethodKind::EADC:
        if (!c.set_a || !c.set_b) bad("problem", std::string(to_string(m)) + " needs problem.A and problem.B");
        if (m != MethodKind::DR && !(c.lambda * c.mu < 4.0)) {
          bad("params", std::string(to_string(m)) + " needs lambda*mu < 4");
        }
        break;
      case MethodKind::Moudafi:
        if (!c.linear_map) bad("linear_map", "Moudafi needs a [linear_map] table");
        if (!c.split_s || !c.split_u) bad("split", "Moudafi needs split.S and split.U");
        break;
      case MethodKind::Custom:
        if (!c.operator_tree) bad("operator", "Custom needs an [operator] table");
        break;
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) { return load_config(parse_toml_file(path)); }

void apply_seed_override(ExperimentConfig& config) {
  const char* env = std::getenv("FP_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(ErrorKind::Config, "FP_SEED must be a nonnegative integer, got '" + std::string(env) + "'");
  config.seed = v;
  config.raw["seed"] = v;
}

OperatorHandle build_operator(const ExperimentConfig& config) {
  if (!config.operator_tree) throw Error(ErrorKind::Config, "field 'operator': missing");
  return build_node(config, *config.operator_tree, "operator");
}

Method build_method(const ExperimentConfig& c, MethodKind kind) {
  const auto cycle = c.schedule;
  Schedule schedule = [cycle](std::size_t k) { return cycle[k % cycle.size()]; };
  switch (kind) {
    case MethodKind::DR:
      return preset_dr(c.sets.at(*c.set_a), c.sets.at(*c.set_b));
    case MethodKind::RASPC:
      return preset_raspc(c.sets.at(*c.set_a), c.sets.at(*c.set_b), c.lambda, c.mu, schedule, c.epsilon);
    case MethodKind::EADC:
      return preset_eadc(c.sets.at(*c.set_a), c.sets.at(*c.set_b), c.lambda, c.mu, schedule, c.epsilon);
    case MethodKind::Moudafi:
      return preset_moudafi(projection(c.sets.at(*c.split_s)), projection(c.sets.at(*c.split_u)), *c.linear_map,
                            c.lambda, c.mu, schedule, c.epsilon);
    case MethodKind::Custom: {
      StepRule rule{schedule, std::nullopt, c.epsilon, false};
      if (c.sigma) {
        const double s = *c.sigma;
        rule.sigma = [s](const Point&) { return s; };
      }
      return Method{"Custom", build_operator(c), rule};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown method");
}

Point start_point(const ExperimentConfig& config, std::size_t dim) {
  if (config.x0) {
    if (config.x0->dim() != dim) {
      throw Error(ErrorKind::Config, "field 'start.x0': expected " + std::to_string(dim) + " coordinates, got " +
                                         std::to_string(config.x0->dim()));
    }
    return *config.x0;
  }
  std::mt19937_64 rng(config.seed);
  return random_normal(dim, rng);
}

}  // namespace fixcalc::cli
