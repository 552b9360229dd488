#include "fixcalc/parameter_algebra.hpp"

#include <cmath>
#include <string>

#include "fixcalc/error.hpp"

namespace fixcalc {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive and finite, got " +
                                                std::to_string(v));
  }
}

void require_below_one(double v, const char* name) {
  if (!(v < 1.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be finite and < 1, got " +
                                                std::to_string(v));
  }
}

}  // namespace

double rfne_to_spc(double lambda) {
  require_positive(lambda, "lambda");
  return (lambda - 2.0) / lambda;
}

double spc_to_rfne(double alpha) {
  require_below_one(alpha, "alpha");
  return 2.0 / (1.0 - alpha);
}

double demicontraction_to_relaxed_cutter(double alpha) { return spc_to_rfne(alpha); }

double relaxed_cutter_to_demicontraction(double lambda) { return rfne_to_spc(lambda); }

double relax_demicontraction(double alpha, double mu) {
  require_below_one(alpha, "alpha");
  require_positive(mu, "mu");
  return (mu + alpha - 1.0) / mu;
}

std::string_view to_string(CompositionNote note) noexcept {
  switch (note) {
    case CompositionNote::None: return "certified";
    case CompositionNote::ProductEqualsFour: return "lambda*mu = 4: equation has no unique solution";
    case CompositionNote::ProductAboveFour: return "lambda*mu > 4: composition is not certified";
  }
  return "";
}

CompositionVerdict nu_star(double lambda, double mu) {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  CompositionVerdict v;
  const double prod = lambda * mu;
  v.fix_intersection_ok = prod < lambda + mu;
  if (prod == 4.0) {
    v.note = CompositionNote::ProductEqualsFour;
    return v;
  }
  v.nu_star = 4.0 * (lambda + mu - prod) / (4.0 - prod);
  v.certified = prod < 4.0;
  v.note = v.certified ? CompositionNote::None : CompositionNote::ProductAboveFour;
  return v;
}

double gamma_star(double alpha, double beta) {
  require_below_one(alpha, "alpha");
  require_below_one(beta, "beta");
  const double sum = alpha + beta;
  const double prod = alpha * beta;
  if (!(sum < prod)) {
    throw Error(ErrorKind::CompositionUncertified,
                "alpha + beta = " + std::to_string(sum) + " is not < alpha * beta = " + std::to_string(prod));
  }
  return prod / sum;
}

ChainResult chain_gamma(std::span<const double> alphas) {
  if (alphas.empty()) throw Error(ErrorKind::InvalidArgument, "chain needs at least one parameter");
  int positives = 0;
  double sum = 0.0;
  for (double a : alphas) {
    require_below_one(a, "alpha_i");
    if (a == 0.0) throw Error(ErrorKind::InvalidArgument, "alpha_i = 0 is excluded from the chain rule");
    if (a > 0.0) ++positives;
    sum += 1.0 / a;
  }
  if (positives > 1) {
    throw Error(ErrorKind::InvalidArgument, "at most one alpha_i may be positive, got " + std::to_string(positives));
  }
  if (sum == 0.0) return {std::nullopt, "sum of reciprocals vanishes"};
  const double gamma = 1.0 / sum;
  if (!(gamma < 1.0)) return {std::nullopt, "gamma_m >= 1"};
  return {gamma, {}};
}

namespace {

void require_weights(std::span<const double> weights, std::size_t count) {
  if (weights.size() != count || weights.empty()) {
    throw Error(ErrorKind::InvalidArgument, "weights and parameters must be nonempty and of equal length");
  }
  double total = 0.0;
  for (double w : weights) {
    require_positive(w, "weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "weights must sum to 1, got " + std::to_string(total));
  }
}

}  // namespace

double combined_relaxation(std::span<const double> weights, std::span<const double> lambdas) {
  require_weights(weights, lambdas.size());
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require_positive(lambdas[i], "lambda_i");
    s += weights[i] * lambdas[i];
  }
  return s;
}

double combined_spc(std::span<const double> weights, std::span<const double> alphas) {
  require_weights(weights, alphas.size());
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require_below_one(alphas[i], "alpha_i");
    s += weights[i] / (1.0 - alphas[i]);
  }
  return 1.0 - 1.0 / s;
}

bool lemma_A_holds(double lambda, double mu) {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  const double prod = lambda * mu;
  return !(prod < 4.0) || (lambda + mu > prod);
}

bool lemma_B_holds(double alpha, double beta) {
  require_below_one(alpha, "alpha");
  require_below_one(beta, "beta");
  const double sum = alpha + beta;
  const double prod = alpha * beta;
  bool part_i = true;
  if (sum < prod) part_i = sum < 0.0 && prod / sum < 1.0;
  bool part_ii = true;
  const bool at_most_one_nonneg = !(alpha >= 0.0 && beta >= 0.0);
  // gamma* < 1 needs a nonzero denominator to be meaningful.
  if (sum != 0.0 && prod / sum < 1.0 && at_most_one_nonneg) part_ii = sum < prod;
  return part_i && part_ii;
}

}  // namespace fixcalc
