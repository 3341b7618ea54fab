#ifndef PENCIL_ASYMPTOTICS_HPP
#define PENCIL_ASYMPTOTICS_HPP

#include <vector>

#include "pencil/forward.hpp"
#include "pencil/model.hpp"

namespace pencil {

// Affine phase maps of the leading-order solution. xi pins the left weight
// piece to a1, k/s continue from xi(a2) with slope +-beta.
struct PhaseMaps {
  double alpha, beta, a1, a2;

  static PhaseMaps of(const ProblemSpec& spec);

  double xi_plus(double x) const { return alpha * (x - a1) + a1; }
  double xi_minus(double x) const { return -alpha * (x - a1) + a1; }
  double k_plus(double x) const { return xi_plus(a2) + beta * (x - a2); }
  double k_minus(double x) const { return xi_plus(a2) - beta * (x - a2); }
  double s_plus(double x) const { return xi_minus(a2) + beta * (x - a2); }
  double s_minus(double x) const { return xi_minus(a2) - beta * (x - a2); }
};

// beta1-/beta1+ = (alpha1 -+ beta1/alpha)/2, beta2-/beta2+ = (alpha2 -+ alpha*beta2/beta)/2,
// plus the gamma/(2*weight) shifts entering the cosine amplitudes.
struct AsymptoticCoefficients {
  double beta1_plus, beta1_minus;
  double beta2_plus, beta2_minus;
  double gamma1_shift, gamma2_shift;

  static AsymptoticCoefficients of(const ProblemSpec& spec);
};

// Accumulated p-integrals appearing in the phase arguments.
struct PhaseIntegrals {
  const ProblemSpec* spec;

  static PhaseIntegrals of(const ProblemSpec& s) { return PhaseIntegrals{&s}; }

  double v(double x) const;        // int_{a1}^{x} p
  double t(double x) const;        // int_{a2}^{x} p
  double beta_of(double x) const;  // int_0^x p
  double omega(double x) const;    // int_{a2}^x p + int_0^{a1} p
  double w_pi() const;             // int_{a2}^{pi} p (the quantity inside Delta0)
};

// Leading-order solution, evaluated exactly as printed: the two-term cosine
// combination left of pi/2, the four-term combination (with its pi-evaluated
// phase arguments) right of pi/2. DomainError at the formula switch point.
Complex phi0(const ProblemSpec& spec, Complex lambda, double x);

// Delta0(lambda) = phi0(pi, lambda).
Complex char_fn0(const ProblemSpec& spec, Complex lambda);

enum class EstimateSource {
  delta0,   // scan Delta0, fall back to Delta if Delta0 degenerates
  char_fn,  // oracle mode: scan Delta itself
};

struct EstimateList {
  std::vector<double> values;
  bool used_char_fn = false;  // set when the degeneracy fallback (or oracle mode) ran
};

// First n_max nonnegative real zeros, ascending, by dense scan + bisection.
EstimateList eigenvalue_estimates(const ProblemSpec& spec, int n_max,
                                  EstimateSource source = EstimateSource::delta0,
                                  const IntegratorSettings& cfg = {});

// Mean zero spacing of Delta0 on the real axis, pi / k+(pi).
double estimate_spacing(const ProblemSpec& spec);

struct RemainderRow {
  double lambda;
  double abs_diff;     // |Delta - Delta0|
  double scaled_diff;  // |lambda| * |Delta - Delta0|
};

// Diagnostic table; no pass/fail judgement.
std::vector<RemainderRow> remainder_report(const ProblemSpec& spec,
                                           std::span<const double> lambdas,
                                           const IntegratorSettings& cfg = {});

}  // namespace pencil

#endif
