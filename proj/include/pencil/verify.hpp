#ifndef PENCIL_VERIFY_HPP
#define PENCIL_VERIFY_HPP

#include <functional>
#include <span>
#include <vector>

#include "pencil/forward.hpp"
#include "pencil/model.hpp"

namespace pencil {

// U(lambda) = int_0^{pi/2} [2*lambda*P + Q] phi_A phi_B dx with P = pA - pB,
// Q = qA - qB. Composite 20-node Gauss-Legendre, panels aligned to a1 and
// subdivided to keep at least 6 nodes per oscillation wavelength; quad_n is
// the minimum total node count. SpecMismatch unless weight and jump constants
// agree.
Complex u_functional(const ProblemSpec& specA, const ProblemSpec& specB, Complex lambda,
                     int quad_n, const IntegratorSettings& cfg = {});

// (U1, U2) = (int P phi_A phi_B, int Q phi_A phi_B) on the same nodes, so
// 2*lambda*U1 + U2 recombines to U(lambda) at rounding precision.
std::pair<Complex, Complex> split_u(const ProblemSpec& specA, const ProblemSpec& specB,
                                    Complex lambda, int quad_n,
                                    const IntegratorSettings& cfg = {});

// |U(lambda) + phiB'(pi)phiA(pi) - phiA'(pi)phiB(pi)|; vanishes identically
// when the specs share the right-half potentials and all constants.
double green_identity_residual(const ProblemSpec& specA, const ProblemSpec& specB,
                               Complex lambda, int quad_n = 400,
                               const IntegratorSettings& cfg = {});

// Homogeneous Volterra system S(t) + int_t^{t_hi} K(x,t) S(x) dx = 0.
struct VolterraProblem {
  int dimension = 3;
  // writes the row-major dimension x dimension kernel matrix at (x, t)
  std::function<void(double x, double t, std::span<double> out)> kernel;
  double t_lo = 0.0;
  double t_hi = kHalfPi;
  int grid_n = 801;
};

struct VolterraResult {
  double final_norm = 0.0;
  std::vector<double> norm_history;  // sup-norms of S_0, S_1, ..., S_iters
};

// Picard iteration S_{k+1}(t) = -int_t^{t_hi} K(x,t) S_k(x) dx on the grid.
// Composite Simpson (3/8 patch on odd panel counts); for a kernel bound M the
// norms decay like (M L)^k / k!. UnboundedKernel past the overflow guard.
VolterraResult volterra_trivial_check(const VolterraProblem& vp,
                                      const std::function<std::vector<double>(double)>& s0,
                                      int iters);

}  // namespace pencil

#endif
