#include "commands.hpp"

#include <cstdio>
#include <future>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "fixcalc/error.hpp"
#include "fixcalc/parameter_algebra.hpp"
#include "fixcalc/solver.hpp"
#include "fixcalc/verify.hpp"
#include "trace_io.hpp"

namespace fixcalc::cli {

namespace {

using nlohmann::json;

struct RunOutcome {
  std::string summary;
  bool ok;
};

RunOutcome run_method(const ExperimentConfig& config, MethodKind kind) {
  const Method method = build_method(config, kind);
  const Point x0 = start_point(config, method.v_base.dim());
  if (config.reference && config.reference->dim() != x0.dim()) {
    throw Error(ErrorKind::Config, "field 'start.reference': expected " + std::to_string(x0.dim()) + " coordinates");
  }
  const IterationTrace trace = iterate(method.v_base, method.rule, config.stopping, x0, config.reference);
  const std::string name = method.name;
  if (!config.csv_path.empty()) atomic_write(expand_path(config.csv_path, name), trace_csv(trace));
  if (!config.json_path.empty()) {
    atomic_write(expand_path(config.json_path, name), trace_json(trace, name, config.raw).dump(2) + "\n");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", trace.last().residual);
  std::string summary = name + ": status=" + std::string(to_string(trace.status)) +
                        " iterations=" + std::to_string(trace.iterations()) + " residual=" + buf;
  if (trace.fejer_monitored) {
    std::snprintf(buf, sizeof buf, "%.3e", trace.worst_fejer_violation);
    summary += std::string(" fejer_violation=") + buf;
  }
  const bool ok = trace.status == RunStatus::Converged ||
                  (config.allow_max_iters && trace.status == RunStatus::MaxIters);
  return {summary, ok};
}

int cmd_run(const std::string& path, bool parallel, std::ostream& out) {
  ExperimentConfig config = load_config_file(path);
  apply_seed_override(config);
  std::vector<RunOutcome> outcomes;
  if (parallel) {
    std::vector<std::future<RunOutcome>> jobs;
    for (MethodKind m : config.methods) {
      jobs.push_back(std::async(std::launch::async, [&config, m] { return run_method(config, m); }));
    }
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (MethodKind m : config.methods) outcomes.push_back(run_method(config, m));
  }
  bool ok = true;
  for (const auto& o : outcomes) {
    out << o.summary << '\n';
    ok = ok && o.ok;
  }
  return ok ? 0 : 1;
}

int cmd_verify(const std::string& path, std::size_t threads, std::ostream& out) {
  ExperimentConfig config = load_config_file(path);
  apply_seed_override(config);
  if (!config.verify) throw Error(ErrorKind::Config, "field 'verify': missing");
  const OperatorHandle op = build_operator(config);
  std::vector<PrimitiveSet> sets;
  for (const auto& [name, s] : config.sets) {
    if (s.dim() == op.dim()) sets.push_back(s);
  }
  const Sampler sampler = sets.empty() ? Sampler(op.dim(), {}, config.verify->radii)
                                       : Sampler::around(sets, config.verify->radii);
  const CheckReport report = check_property(op, config.verify->claim, sampler, config.verify->fix_points,
                                            config.verify->samples, config.seed, threads);
  json j = report_json(report);
  j["operator"] = op.label();
  if (op.certificate()) j["certificate"] = op.certificate()->to_string();
  out << j.dump(2) << '\n';
  return report.verdict == Verdict::PassedSampling ? 0 : 1;
}

std::string fmt(double v, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

json point_json(const Point& p) {
  json arr = json::array();
  for (double v : p.coords()) arr.push_back(v);
  return arr;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relaxation-parameter calculus and fixed-point iterations for relaxed operators", "fixcalc"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run the methods of an experiment config and write traces");
  std::string run_config;
  bool parallel = false;
  run->add_option("config", run_config, "Experiment config file")->required();
  run->add_flag("--parallel", parallel, "Run the methods concurrently");

  // verify
  auto* verify = app.add_subcommand("verify", "Sample the claimed class inequality of the configured operator");
  std::string verify_config;
  std::size_t threads = 0;
  verify->add_option("config", verify_config, "Config with [operator] and [verify] tables")->required();
  verify->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // params
  auto* params = app.add_subcommand("params", "Parameter formulas");
  params->require_subcommand(1);
  int digits = 4;
  params->add_option("--digits", digits, "Significant digits of printed values")->check(CLI::Range(1, 17));
  std::vector<double> values;
  auto numeric = [&](const char* name, const char* help, std::size_t count) {
    auto* sub = params->add_subcommand(name, help);
    auto* opt = sub->add_option("values", values, "Arguments")->required();
    if (count > 0) opt->expected(static_cast<int>(count));
    return sub;
  };
  auto* p_nu = numeric("nu", "nu*(lambda, mu) for composing lambda- and mu-RFNE operators", 2);
  auto* p_gamma = numeric("gamma", "gamma*(alpha, beta) for composing SPC operators", 2);
  auto* p_chain = numeric("chain", "gamma_m for a chain of demicontractions", 0);
  auto* p_r2s = numeric("rfne-to-spc", "alpha of a lambda-RFNE operator", 1);
  auto* p_s2r = numeric("spc-to-rfne", "lambda of an alpha-SPC operator", 1);
  auto* p_d2c = numeric("dc-to-rc", "relaxed-cutter lambda of an alpha-demicontraction", 1);
  auto* p_c2d = numeric("rc-to-dc", "demicontraction alpha of a lambda-relaxed cutter", 1);
  auto* p_rdc = numeric("relax-dc", "demicontraction constant of the mu-relaxation of an alpha-demicontraction", 2);
  std::vector<double> weights;
  std::vector<double> members;
  auto* p_ccl = params->add_subcommand("cc-lambda", "Relaxation of a convex combination of RFNE operators");
  p_ccl->add_option("--weights", weights)->required()->delimiter(',');
  p_ccl->add_option("--values", members)->required()->delimiter(',');
  auto* p_cca = params->add_subcommand("cc-alpha", "SPC constant of a convex combination of SPC operators");
  p_cca->add_option("--weights", weights)->required()->delimiter(',');
  p_cca->add_option("--values", members)->required()->delimiter(',');
  double grid_min = 0.1, grid_max = 3.9, grid_step = 0.1;
  auto* p_grid = params->add_subcommand("nu-grid", "CSV grid of nu*(lambda, mu)");
  p_grid->add_option("--min", grid_min)->required();
  p_grid->add_option("--max", grid_max)->required();
  p_grid->add_option("--step", grid_step)->required();

  // counterexample
  auto* cex = app.add_subcommand("counterexample", "Reconstruct sharpness and failure constructions");
  cex->require_subcommand(1);
  double lambda = 3.0, mu = 1.0, rho = 3.9, gap = 1.0;
  auto* c_sharp = cex->add_subcommand("sharpness", "Witness that nu* cannot be lowered");
  c_sharp->add_option("--lambda", lambda);
  c_sharp->add_option("--mu", mu);
  c_sharp->add_option("--rho", rho);
  auto* c_collapse = cex->add_subcommand("fix-collapse", "UT = Id while Fix T and Fix U are a hyperplane");
  c_collapse->add_option("--lambda", lambda)->required();
  c_collapse->add_option("--mu", mu)->required();
  auto* c_nrc = cex->add_subcommand("not-relaxed-cutter", "UT is not a relaxed cutter when lambda*mu > 4");
  c_nrc->add_option("--lambda", lambda)->required();
  c_nrc->add_option("--mu", mu)->required();
  auto* c_fixv = cex->add_subcommand("fixv", "Fixed points of (P_B)_mu (P_A)_lambda for A = {x2 = 0}, B = {x2 = gap}");
  c_fixv->add_option("--lambda", lambda)->required();
  c_fixv->add_option("--mu", mu)->required();
  c_fixv->add_option("--gap", gap, "Distance between the hyperplanes (0 makes them equal)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_config, parallel, out);
    if (*verify) return cmd_verify(verify_config, threads, out);

    if (*params) {
      auto print = [&](double v) { out << fmt(v, digits) << '\n'; };
      if (*p_nu) {
        const CompositionVerdict v = nu_star(values[0], values[1]);
        if (!v.nu_star) {
          out << "no solution: lambda*mu = 4\n";
          return 1;
        }
        out << fmt(*v.nu_star, digits);
        if (!v.certified) out << " (uncertified: lambda*mu > 4)";
        out << '\n';
        return 0;
      }
      if (*p_gamma) {
        print(gamma_star(values[0], values[1]));
        return 0;
      }
      if (*p_chain) {
        const ChainResult r = chain_gamma(values);
        if (!r.gamma) {
          out << "no solution: " << r.reason << '\n';
          return 1;
        }
        print(*r.gamma);
        return 0;
      }
      if (*p_r2s) return print(rfne_to_spc(values[0])), 0;
      if (*p_s2r) return print(spc_to_rfne(values[0])), 0;
      if (*p_d2c) return print(demicontraction_to_relaxed_cutter(values[0])), 0;
      if (*p_c2d) return print(relaxed_cutter_to_demicontraction(values[0])), 0;
      if (*p_rdc) return print(relax_demicontraction(values[0], values[1])), 0;
      if (*p_ccl) return print(combined_relaxation(weights, members)), 0;
      if (*p_cca) return print(combined_spc(weights, members)), 0;
      if (*p_grid) {
        if (!(grid_step > 0.0) || !(grid_max >= grid_min) || !(grid_min > 0.0)) {
          throw Error(ErrorKind::InvalidArgument, "nu-grid needs 0 < min <= max and step > 0");
        }
        const auto count = static_cast<std::size_t>((grid_max - grid_min) / grid_step + 1e-9) + 1;
        out << "lambda,mu,nu_star\n";
        char buf[96];
        for (std::size_t i = 0; i < count; ++i) {
          const double l = grid_min + static_cast<double>(i) * grid_step;
          for (std::size_t j = 0; j < count; ++j) {
            const double m = grid_min + static_cast<double>(j) * grid_step;
            const CompositionVerdict v = nu_star(l, m);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,", l, m);
            out << buf;
            if (v.certified) {
              std::snprintf(buf, sizeof buf, "%.17g", *v.nu_star);
              out << buf;
            }
            out << '\n';
          }
        }
        return 0;
      }
    }

    if (*cex) {
      json j;
      if (*c_sharp) {
        const SharpnessWitness w = sharpness_witness(lambda, mu, rho);
        j = {{"construction", "sharpness"}, {"lambda", lambda}, {"mu", mu}, {"rho", rho},
             {"nu_star", *nu_star(lambda, mu).nu_star}, {"k", w.k}, {"x", point_json(w.x)},
             {"slack", w.slack}, {"h", w.h}};
      } else if (*c_collapse) {
        const FixCollapseWitness w = fix_collapse_witness(lambda, mu);
        j = {{"construction", "fix-collapse"}, {"lambda", lambda}, {"mu", mu}, {"sigma", w.sigma},
             {"sigma_mu", w.sigma * mu}, {"max_residual", w.max_residual}, {"identity_holds", w.identity_holds},
             {"x", point_json(w.x)}, {"T(x)", point_json(w.t(w.x))}};
      } else if (*c_nrc) {
        const NotRelaxedCutterWitness w = not_relaxed_cutter_witness(lambda, mu);
        j = {{"construction", "not-relaxed-cutter"}, {"lambda", lambda}, {"mu", mu},
             {"regime", std::string(1, w.regime)}, {"x", point_json(w.x)}, {"z", point_json(w.z)},
             {"inner", w.inner}};
        if (w.k) j["k"] = *w.k;
      } else if (*c_fixv) {
        const PrimitiveSet a = PrimitiveSet::hyperplane(Point{0.0, 1.0}, 0.0);
        const PrimitiveSet b = PrimitiveSet::hyperplane(Point{0.0, 1.0}, gap);
        const FixVReport r = fixv_characterization(a, b, lambda, mu);
        j = {{"construction", "fixv"}, {"lambda", lambda}, {"mu", mu}, {"gap", gap},
             {"sum_equals_product", r.sum_equals_product}, {"sets_intersect", r.sets_intersect},
             {"fixed_point_found", r.fixed_point_found}, {"residual", r.residual}, {"consistent", r.consistent}};
        if (r.fixed_point) j["fixed_point"] = point_json(*r.fixed_point);
        if (!r.residuals.empty()) j["residuals"] = r.residuals;
      }
      out << j.dump(2) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace fixcalc::cli
