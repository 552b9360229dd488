#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixcalc/hilbert.hpp"
#include "fixcalc/operators.hpp"
#include "fixcalc/solver.hpp"
#include "fixcalc/verify.hpp"

namespace fixcalc::cli {

enum class MethodKind { DR, RASPC, EADC, Moudafi, Custom };

MethodKind parse_method(const std::string& name);
std::string_view to_string(MethodKind kind) noexcept;

struct VerifySpec {
  PropertyClaim claim;
  std::size_t samples = 10000;
  std::vector<Point> fix_points;
  std::vector<double> radii{0.1, 1.0, 10.0};
};

/// One experiment: a problem shared by a list of methods.
struct ExperimentConfig {
  std::string name = "experiment";
  std::map<std::string, PrimitiveSet> sets;
  std::optional<std::string> set_a;  ///< problem.A
  std::optional<std::string> set_b;  ///< problem.B
  std::optional<LinearMap> linear_map;
  std::optional<std::string> split_s;  ///< moudafi.S: set on the range of A
  std::optional<std::string> split_u;  ///< moudafi.U: set on the domain of A
  std::optional<nlohmann::json> operator_tree;

  std::vector<MethodKind> methods;
  double lambda = 1.0;
  double mu = 1.0;
  double epsilon = 0.05;
  std::vector<double> schedule{1.0};  ///< lambda_k, cycled
  std::optional<double> sigma;        ///< constant sigma for Custom

  StoppingRule stopping;
  bool allow_max_iters = false;

  std::optional<Point> x0;
  std::optional<Point> reference;

  std::string csv_path;   ///< may contain {method}
  std::string json_path;  ///< may contain {method}
  std::uint64_t seed = 0;

  std::optional<VerifySpec> verify;

  nlohmann::json raw;  ///< parsed config, echoed into JSON traces
};

/// Validates the parsed document. Errors are Error(Config) naming the field.
ExperimentConfig load_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

/// Applies FP_SEED from the environment, if set.
void apply_seed_override(ExperimentConfig& config);

/// Builds the operator described by the [operator] table.
OperatorHandle build_operator(const ExperimentConfig& config);

/// Builds a named method with its step rule.
Method build_method(const ExperimentConfig& config, MethodKind kind);

/// The starting point: x0 if given, otherwise a standard normal draw from seed.
Point start_point(const ExperimentConfig& config, std::size_t dim);

}  // namespace fixcalc::cli
