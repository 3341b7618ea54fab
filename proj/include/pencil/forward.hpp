#ifndef PENCIL_FORWARD_HPP
#define PENCIL_FORWARD_HPP

#include <span>
#include <vector>

#include "pencil/model.hpp"

namespace pencil {

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) settings. The weight
// breakpoints {a1, pi/2, a2} are always mesh nodes; steps never cross them.
struct IntegratorSettings {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = kPi / 8.0;

  // Effective step cap for oscillation frequency |lambda| * wmax.
  double step_cap(double lambda_abs, double wmax) const;
};

// Integrate the pencil system y' = z, z' = (2*lambda*p + q - lambda^2*delta) y
// over [x0, x1]. Pre: no jump location strictly inside (pi/2 as a weight
// breakpoint is handled internally).
State evolve(const ProblemSpec& spec, Complex lambda, double x0, double x1, State s,
             const IntegratorSettings& cfg);

// Discrete transmission map: y+ = a*y-, y'+ = (1/a)*y'- + i*lambda*g*y-.
State apply_jump(const State& s, const JumpCondition& j, Complex lambda);

// Propagate an arbitrary state forward to x1, applying every jump with
// location in (s.x, x1].
State propagate(const ProblemSpec& spec, Complex lambda, State s, double x1,
                const IntegratorSettings& cfg);

// phi(x, lambda): solution normalized to y(0)=1, y'(0)=0 with all jump maps at
// locations <= x applied.
State phi(const ProblemSpec& spec, Complex lambda, double x, const IntegratorSettings& cfg);

// phi at an ascending list of positions in one integration pass.
std::vector<State> phi_grid(const ProblemSpec& spec, Complex lambda, std::span<const double> xs,
                            const IntegratorSettings& cfg);

// Characteristic function Delta(lambda) = phi(pi, lambda).y and its
// lambda-derivative from the variational system.
Complex char_fn(const ProblemSpec& spec, Complex lambda, const IntegratorSettings& cfg);
Complex char_fn_derivative(const ProblemSpec& spec, Complex lambda, const IntegratorSettings& cfg);

struct CharFnPair {
  Complex value;
  Complex derivative;
};

// Both Delta and dDelta/dlambda from a single augmented integration.
CharFnPair char_fn_with_derivative(const ProblemSpec& spec, Complex lambda,
                                   const IntegratorSettings& cfg);

}  // namespace pencil

#endif
