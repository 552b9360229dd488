#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace fixcalc {

// Closed-form parameter calculus for relaxed firmly nonexpansive operators,
// strict pseudocontractions, relaxed cutters and demicontractions.
//
// Strict inequalities are evaluated on the inputs as given, with no slack:
// every certificate derived from these functions fails closed.

/// alpha = (lambda - 2) / lambda. Throws InvalidArgument for lambda <= 0.
double rfne_to_spc(double lambda);
/// lambda = 2 / (1 - alpha). Throws InvalidArgument for alpha >= 1.
double spc_to_rfne(double alpha);

/// lambda = 2 / (1 - alpha); the relaxed-cutter twin of spc_to_rfne.
double demicontraction_to_relaxed_cutter(double alpha);
/// alpha = (lambda - 2) / lambda; the inverse of the above.
double relaxed_cutter_to_demicontraction(double lambda);

/// Parameter of the mu-relaxation of an alpha-demicontraction:
/// beta = (mu + alpha - 1) / mu.
double relax_demicontraction(double alpha, double mu);

enum class CompositionNote {
  None,
  ProductEqualsFour,  ///< lambda * mu == 4: no unique solution
  ProductAboveFour,   ///< lambda * mu > 4: value exists but certifies nothing
};

std::string_view to_string(CompositionNote note) noexcept;

struct CompositionVerdict {
  std::optional<double> nu_star;  ///< 4(l + m - l m) / (4 - l m) when l m != 4
  bool certified = false;         ///< l m < 4
  bool fix_intersection_ok = false;  ///< l m < l + m
  CompositionNote note = CompositionNote::None;
};

/// Sharp relaxation constant of the composition of a lambda-RFNE and a mu-RFNE
/// operator. Throws InvalidArgument for nonpositive input.
CompositionVerdict nu_star(double lambda, double mu);

/// gamma* = alpha beta / (alpha + beta), defined when alpha + beta < alpha beta.
/// Throws CompositionUncertified when that strict inequality fails and
/// InvalidArgument when either parameter is >= 1.
double gamma_star(double alpha, double beta);

/// Composition constant for an m-fold chain of demicontractions.
struct ChainResult {
  std::optional<double> gamma;
  std::string_view reason;  ///< empty when gamma is present
};

/// gamma_m = (sum 1/alpha_i)^-1. Throws InvalidArgument when a parameter is
/// 0 or >= 1, when more than one is positive, or for an empty list. Returns
/// an absent gamma (with a reason) when the sum vanishes or gamma_m >= 1.
ChainResult chain_gamma(std::span<const double> alphas);

/// Relaxation of a weighted convex combination of lambda_i-RFNE operators.
double combined_relaxation(std::span<const double> weights, std::span<const double> lambdas);
/// alpha = 1 - (sum w_i / (1 - alpha_i))^-1 for a weighted combination of SPCs.
double combined_spc(std::span<const double> weights, std::span<const double> alphas);

/// (lambda mu < 4) implies (lambda + mu > lambda mu).
bool lemma_A_holds(double lambda, double mu);

/// (i)  alpha + beta < alpha beta  implies  alpha + beta < 0 and gamma* < 1;
/// (ii) gamma* < 1 with at most one of alpha, beta >= 0  implies
///      alpha + beta < alpha beta.
bool lemma_B_holds(double alpha, double beta);

}  // namespace fixcalc
