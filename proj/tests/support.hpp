#ifndef PENCIL_TESTS_SUPPORT_HPP
#define PENCIL_TESTS_SUPPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "pencil/model.hpp"

namespace fixtures {

using pencil::Complex;
using pencil::kHalfPi;
using pencil::kPi;
using pencil::JumpCondition;
using pencil::PiecewiseWeight;
using pencil::Potentials;
using pencil::ProblemSpec;
using pencil::ValidationMode;

// Constant weight, trivial jumps at the interval edges, p = q = 0:
// Delta(lambda) = cos(lambda pi).
inline ProblemSpec trivial_spec() {
  return ProblemSpec::validated(PiecewiseWeight{1.0, 1.0}, Potentials::cosine({}, {}),
                                {JumpCondition{0.0, 1.0, 0.0}, JumpCondition{kPi, 1.0, 0.0}},
                                ValidationMode::relaxed);
}

// Two-piece weight 0.6/0.8, trivial jumps at the interval edges, p = q = 0:
// Delta(lambda) = cos(.3 pi l) cos(.4 pi l) - .75 sin(.3 pi l) sin(.4 pi l).
inline ProblemSpec two_piece_spec() {
  return ProblemSpec::validated(PiecewiseWeight{0.6, 0.8}, Potentials::cosine({}, {}),
                                {JumpCondition{0.0, 1.0, 0.0}, JumpCondition{kHalfPi, 1.0, 0.0}},
                                ValidationMode::relaxed);
}

// Two-piece weight with interior jump placements, where the leading-order
// zero estimates drift away from the true eigenvalues.
inline ProblemSpec two_piece_interior_spec() {
  return ProblemSpec::validated(
      PiecewiseWeight{0.6, 0.8}, Potentials::cosine({}, {}),
      {JumpCondition{kPi / 4.0, 1.0, 0.0}, JumpCondition{3.0 * kPi / 4.0, 1.0, 0.0}},
      ValidationMode::relaxed);
}

inline std::array<JumpCondition, 2> generic_jumps() {
  return {JumpCondition{1.0, 1.5, 0.2}, JumpCondition{2.2, 0.8, -0.1}};
}

// Spectral-parameter jumps, no potentials.
inline ProblemSpec generic_jump_spec() {
  return ProblemSpec::validated(PiecewiseWeight{0.6, 0.8}, Potentials::cosine({}, {}),
                                generic_jumps(), ValidationMode::strict);
}

// cos(2kx) projection of 0.1 sin x on [0, pi/2]: a0 = 0.2/pi,
// a_k = -(0.4/pi)/(4k^2-1).
inline std::vector<double> synth_sin_left_coeffs() {
  return {0.06366197723675814, -0.042441318157838755, -0.00848826363156775,
          -0.0036378272706718935, -0.0020210151503732743, -0.0012861005502375381};
}

// Same function as a global cosine representation (even harmonics only).
inline std::vector<double> synth_sin_global_coeffs() {
  const auto a = synth_sin_left_coeffs();
  std::vector<double> c(11, 0.0);
  for (size_t k = 0; k < a.size(); ++k) c[2 * k] = a[k];
  return c;
}

// Round-trip truth: synthesized p (in-basis stand-in for 0.1 sin x), q = cos 2x,
// generic spectral jumps.
inline ProblemSpec truth_spec() {
  return ProblemSpec::validated(PiecewiseWeight{0.6, 0.8},
                                Potentials::cosine(synth_sin_global_coeffs(), {0.0, 0.0, 1.0}),
                                generic_jumps(), ValidationMode::strict);
}

// Independent oracle for p = q = 0 specs: exact 2x2 transfer matrices through
// the piecewise-constant weight and the jump maps. Shares no code with the
// Runge-Kutta path.
inline std::pair<Complex, Complex> tm_state(const ProblemSpec& spec, Complex lambda, double x) {
  Complex y = 1.0, dy = 0.0;
  double cur = 0.0;
  std::vector<double> events;
  for (const auto& j : spec.jumps())
    if (j.location <= x) events.push_back(j.location);
  if (kHalfPi < x) events.push_back(kHalfPi);
  events.push_back(x);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  for (double e : events) {
    if (e > cur) {
      const double w = spec.weight().root(0.5 * (cur + e));
      const Complex th = lambda * w * (e - cur);
      const Complex c = std::cos(th), s = std::sin(th);
      Complex y1, dy1;
      if (std::abs(lambda) * w < 1e-14) {
        y1 = y + dy * (e - cur);
        dy1 = dy;
      } else {
        y1 = c * y + s / (lambda * w) * dy;
        dy1 = -lambda * w * s * y + c * dy;
      }
      y = y1;
      dy = dy1;
      cur = e;
    }
    for (const auto& j : spec.jumps()) {
      if (j.location == e) {
        const Complex y0 = y;
        y = j.alpha * y0;
        dy = dy / j.alpha + Complex(0.0, 1.0) * lambda * j.gamma * y0;
      }
    }
  }
  return {y, dy};
}

inline Complex tm_char_fn(const ProblemSpec& spec, Complex lambda) {
  return tm_state(spec, lambda, kPi).first;
}

// Closed-form two-piece characteristic function for weight 0.6/0.8.
inline double twopiece_delta(double l) {
  return std::cos(0.3 * kPi * l) * std::cos(0.4 * kPi * l) -
         0.75 * std::sin(0.3 * kPi * l) * std::sin(0.4 * kPi * l);
}

// First n nonnegative roots by dense scan + bisection.
inline std::vector<double> twopiece_roots(int n) {
  std::vector<double> roots;
  double xp = 0.0, fp = twopiece_delta(0.0);
  for (long k = 1; static_cast<int>(roots.size()) < n; ++k) {
    const double x = 1e-3 * static_cast<double>(k);
    const double fx = twopiece_delta(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if ((fp < 0.0) != (fx < 0.0)) {
      double lo = xp, hi = x, flo = fp;
      while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        const double fm = twopiece_delta(mid);
        if ((flo < 0.0) != (fm < 0.0))
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xp = x;
    fp = fx;
  }
  return roots;
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double left = (m - a) / 6.0 * (fa + 4.0 * f(lm) + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * f(rm) + fb);
  if (depth > 28 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

}  // namespace fixtures

#endif
