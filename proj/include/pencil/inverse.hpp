#ifndef PENCIL_INVERSE_HPP
#define PENCIL_INVERSE_HPP

#include <string>
#include <vector>

#include "pencil/forward.hpp"
#include "pencil/model.hpp"
#include "pencil/spectrum.hpp"

namespace pencil {

struct ReconstructionConfig {
  int basis_dim = 6;           // cos(2kx) coefficients per potential on [0, pi/2]
  int n_eigen = 12;            // target eigenvalues used; must be >= 2 * basis_dim
  double regularization = 1e-8;
  int max_iter = 100;
  double grad_tol = 1e-10;
  double step_tol = 1e-12;
  int multistart = 1;
  unsigned int seed = 42;
  double fd_step = 1e-6;       // relative forward-difference column step
  // weight of the optional continuity penalty tying the candidate to the
  // known right half at pi/2; off by default (the model admits mismatches
  // there)
  double continuity_penalty = 0.0;
  IntegratorSettings forward{};
};

struct ReconstructionReport {
  std::vector<double> p_coeffs, q_coeffs;  // recovered left-half cos(2kx) coefficients
  std::vector<double> objective_history;   // accepted objective values, non-increasing
  double final_residual = 0.0;             // ||Delta_candidate(lambda_n)||_2 at the optimum
  double jacobian_condition = 0.0;
  std::vector<std::vector<double>> multistart_distances;
  bool converged = false;
  bool ill_conditioned = false;
  bool hit_max_iterations = false;
  int iterations = 0;
  unsigned int seed = 0;

  // Candidate potentials assembled with the known right half.
  Potentials compose(const Potentials& known_right) const;
};

// Candidate characteristic function evaluated at the target eigenvalues;
// component n is Delta_candidate(lambda_n).
std::vector<Complex> residual_vector(const std::vector<double>& left_p,
                                     const std::vector<double>& left_q,
                                     const Potentials& known_right,
                                     const ProblemSpec& spec_template, const Spectrum& target,
                                     const IntegratorSettings& cfg = {});

// Levenberg-Marquardt fit of the left-half coefficients to the target
// spectrum, Tikhonov-regularized; starts from zero coefficients.
ReconstructionReport reconstruct(const Potentials& known_right, const ProblemSpec& spec_template,
                                 const Spectrum& target, const ReconstructionConfig& cfg);

// Multistart version: coefficients drawn uniform in [-0.5, 0.5] from the
// seeded generator; reports pairwise L2 distances among converged runs and
// returns the best run's fields. AllDiverged when no start converges.
ReconstructionReport uniqueness_probe(const Potentials& known_right,
                                      const ProblemSpec& spec_template, const Spectrum& target,
                                      const ReconstructionConfig& cfg);

// L2([0, pi/2]) distance between two coefficient pairs in the cos(2kx) family.
double left_l2_distance(const std::vector<double>& pa, const std::vector<double>& qa,
                        const std::vector<double>& pb, const std::vector<double>& qb);

struct AxisScan {
  std::string axis;
  std::vector<double> offsets;    // value - truth
  std::vector<double> objective;  // sum |Delta(lambda_n)|^2
  bool min_at_truth = false;
  bool degenerate = false;             // single-point grid
  bool symmetric_about_zero = false;   // response even in the offset (gamma = 0 axes)
};

// Objective landscape along each constant (alpha, beta, alpha1, alpha2,
// gamma1, gamma2), others held at truth.
std::vector<AxisScan> constants_probe(const ProblemSpec& spec, const Spectrum& target,
                                      int points = 41, double rel_span = 0.2,
                                      const IntegratorSettings& cfg = {});

}  // namespace pencil

#endif
