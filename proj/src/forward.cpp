#include "pencil/forward.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pencil {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <size_t N>
using Vec = std::array<Complex, N>;

// Coefficient bundle for one smooth segment: weight value is frozen from the
// segment interior so RK stages at the endpoints never read the wrong side of
// the pi/2 breakpoint.
struct SegmentCoeffs {
  const Potentials* pots;
  Complex lambda;
  double delta;  // weight value on this segment
};

// Base system (y, y').
struct BaseSystem {
  static constexpr size_t dim = 2;
  static void rhs(const SegmentCoeffs& c, double x, const Vec<2>& y, Vec<2>& f) {
    const Complex coef =
        2.0 * c.lambda * c.pots->p(x) + c.pots->q(x) - c.lambda * c.lambda * c.delta;
    f[0] = y[1];
    f[1] = coef * y[0];
  }
};

// Augmented with the lambda-derivative pair (w, w').
struct AugSystem {
  static constexpr size_t dim = 4;
  static void rhs(const SegmentCoeffs& c, double x, const Vec<4>& y, Vec<4>& f) {
    const double p = c.pots->p(x);
    const Complex coef = 2.0 * c.lambda * p + c.pots->q(x) - c.lambda * c.lambda * c.delta;
    const Complex dcoef = 2.0 * p - 2.0 * c.lambda * c.delta;
    f[0] = y[1];
    f[1] = coef * y[0];
    f[2] = y[3];
    f[3] = coef * y[2] + dcoef * y[0];
  }
};

template <size_t N>
bool all_finite(const Vec<N>& y) {
  for (const Complex& z : y)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// Adaptive march over one smooth segment [x0, x1].
template <class System>
void integrate_segment(const SegmentCoeffs& coeffs, double x0, double x1,
                       Vec<System::dim>& y, const IntegratorSettings& cfg) {
  constexpr size_t N = System::dim;
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw ValidationError("integrator tolerances must be positive");
  const double span = x1 - x0;
  if (span <= 0.0) return;

  const double wmax = std::sqrt(coeffs.delta);
  const double hcap = cfg.step_cap(std::abs(coeffs.lambda), wmax);
  double x = x0;
  double h = std::min(hcap, span);
  Vec<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
  System::rhs(coeffs, x, y, k1);
  bool have_k1 = true;

  while (x < x1) {
    h = std::min(h, x1 - x);
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
    if (h < hmin) throw StepFailure("step size underflow at x=" + std::to_string(x));
    if (!have_k1) {
      System::rhs(coeffs, x, y, k1);
      have_k1 = true;
    }
    for (size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    System::rhs(coeffs, x + c2 * h, ytmp, k2);
    for (size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    System::rhs(coeffs, x + c3 * h, ytmp, k3);
    for (size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    System::rhs(coeffs, x + c4 * h, ytmp, k4);
    for (size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    System::rhs(coeffs, x + c5 * h, ytmp, k5);
    for (size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    System::rhs(coeffs, x + h, ytmp, k6);
    for (size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    System::rhs(coeffs, x + h, ynew, k7);
    for (size_t i = 0; i < N; ++i)
      yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    double err = 0.0;
    for (size_t i = 0; i < N; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double e = std::abs(yerr[i]) / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(N));
    if (!std::isfinite(err))
      throw NonFinite("solution overflowed at x=" + std::to_string(x) +
                      "; restrict |Im lambda|");

    if (err <= 1.0 || h <= hmin * 2.0) {
      x += h;
      y = ynew;
      k1 = k7;  // FSAL
      if (!all_finite(y))
        throw NonFinite("solution overflowed at x=" + std::to_string(x) +
                        "; restrict |Im lambda|");
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = std::min({h * std::clamp(fac, 0.2, 5.0), hcap});
    } else {
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      h *= fac;
      // k1 is still valid at (x, y)
    }
  }
}

template <class System>
void integrate_smooth(const ProblemSpec& spec, Complex lambda, double x0, double x1,
                      Vec<System::dim>& y, const IntegratorSettings& cfg) {
  // split at the weight breakpoint if it lies inside
  SegmentCoeffs coeffs{&spec.potentials(), lambda, 0.0};
  auto run = [&](double a, double b) {
    if (b <= a) return;
    coeffs.delta = spec.delta(0.5 * (a + b));
    integrate_segment<System>(coeffs, a, b, y, cfg);
  };
  if (x0 < kHalfPi && kHalfPi < x1) {
    run(x0, kHalfPi);
    run(kHalfPi, x1);
  } else {
    run(x0, x1);
  }
}

template <size_t N>
Vec<N> jump_map(const Vec<N>& y, const JumpCondition& j, Complex lambda);

template <>
Vec<2> jump_map<2>(const Vec<2>& y, const JumpCondition& j, Complex lambda) {
  const Complex i_lg = Complex(0.0, 1.0) * lambda * j.gamma;
  return {j.alpha * y[0], j.beta() * y[1] + i_lg * y[0]};
}

template <>
Vec<4> jump_map<4>(const Vec<4>& y, const JumpCondition& j, Complex lambda) {
  const Complex i_lg = Complex(0.0, 1.0) * lambda * j.gamma;
  const Complex i_g = Complex(0.0, 1.0) * j.gamma;
  return {j.alpha * y[0], j.beta() * y[1] + i_lg * y[0],
          j.alpha * y[2], j.beta() * y[3] + i_lg * y[2] + i_g * y[0]};
}

// Events: jump locations and requested output stops, processed in order. At a
// tie the jump map is applied before the stop is recorded (phi includes every
// jump at locations <= x).
template <class System>
void march(const ProblemSpec& spec, Complex lambda, Vec<System::dim>& y, double x_from,
           std::span<const double> stops, const IntegratorSettings& cfg,
           std::vector<Vec<System::dim>>* out) {
  size_t next_stop = 0;
  auto record_until = [&](double x) {
    while (out && next_stop < stops.size() && stops[next_stop] <= x) {
      out->push_back(y);
      ++next_stop;
    }
  };

  const double x_to = stops.empty() ? x_from : stops.back();
  // jumps at the starting position (a1 = 0 edge case)
  for (const auto& j : spec.jumps())
    if (j.location == x_from) y = jump_map<System::dim>(y, j, lambda);

  std::vector<double> events;
  for (const auto& j : spec.jumps())
    if (j.location > x_from && j.location <= x_to) events.push_back(j.location);
  for (double s : stops)
    if (s > x_from) events.push_back(s);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  record_until(x_from);
  double x = x_from;
  for (double e : events) {
    integrate_smooth<System>(spec, lambda, x, e, y, cfg);
    x = e;
    for (const auto& j : spec.jumps())
      if (j.location == e) y = jump_map<System::dim>(y, j, lambda);
    record_until(e);
  }
}

}  // namespace

double IntegratorSettings::step_cap(double lambda_abs, double wmax) const {
  return std::min(max_step, 0.1 / (lambda_abs * wmax + 1.0));
}

State evolve(const ProblemSpec& spec, Complex lambda, double x0, double x1, State s,
             const IntegratorSettings& cfg) {
  if (!(x0 >= 0.0 && x1 <= kPi && x0 <= x1))
    throw DomainError("evolve interval must satisfy 0 <= x0 <= x1 <= pi");
  for (const auto& j : spec.jumps())
    if (j.location > x0 && j.location < x1)
      throw DomainError("evolve interval contains jump location in its interior");
  if (!s.finite()) throw NonFinite("evolve called with non-finite state");
  Vec<2> y{s.y, s.dy};
  integrate_smooth<BaseSystem>(spec, lambda, x0, x1, y, cfg);
  return State{y[0], y[1], x1};
}

State apply_jump(const State& s, const JumpCondition& j, Complex lambda) {
  const auto y = jump_map<2>(Vec<2>{s.y, s.dy}, j, lambda);
  return State{y[0], y[1], s.x};
}

State propagate(const ProblemSpec& spec, Complex lambda, State s, double x1,
                const IntegratorSettings& cfg) {
  if (!(s.x >= 0.0 && x1 <= kPi && s.x <= x1))
    throw DomainError("propagate interval must satisfy 0 <= x0 <= x1 <= pi");
  Vec<2> y{s.y, s.dy};
  // jumps at the starting position are assumed already applied
  std::vector<double> events;
  for (const auto& j : spec.jumps())
    if (j.location > s.x && j.location <= x1) events.push_back(j.location);
  events.push_back(x1);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  double x = s.x;
  for (double e : events) {
    integrate_smooth<BaseSystem>(spec, lambda, x, e, y, cfg);
    x = e;
    for (const auto& j : spec.jumps())
      if (j.location == e) y = jump_map<2>(y, j, lambda);
  }
  return State{y[0], y[1], x1};
}

State phi(const ProblemSpec& spec, Complex lambda, double x, const IntegratorSettings& cfg) {
  const double xs[1] = {x};
  return phi_grid(spec, lambda, xs, cfg).front();
}

std::vector<State> phi_grid(const ProblemSpec& spec, Complex lambda, std::span<const double> xs,
                            const IntegratorSettings& cfg) {
  if (xs.empty()) return {};
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0.0 && xs[i] <= kPi)) throw DomainError("phi position outside [0, pi]");
    if (i > 0 && xs[i] < xs[i - 1]) throw DomainError("phi positions must be ascending");
  }
  Vec<2> y{Complex(1.0), Complex(0.0)};
  std::vector<Vec<2>> rec;
  rec.reserve(xs.size());
  march<BaseSystem>(spec, lambda, y, 0.0, xs, cfg, &rec);
  std::vector<State> out;
  out.reserve(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out.push_back(State{rec[i][0], rec[i][1], xs[i]});
  return out;
}

Complex char_fn(const ProblemSpec& spec, Complex lambda, const IntegratorSettings& cfg) {
  return phi(spec, lambda, kPi, cfg).y;
}

CharFnPair char_fn_with_derivative(const ProblemSpec& spec, Complex lambda,
                                   const IntegratorSettings& cfg) {
  Vec<4> y{Complex(1.0), Complex(0.0), Complex(0.0), Complex(0.0)};
  const double stops[1] = {kPi};
  std::vector<Vec<4>> rec;
  march<AugSystem>(spec, lambda, y, 0.0, stops, cfg, &rec);
  return CharFnPair{rec[0][0], rec[0][2]};
}

Complex char_fn_derivative(const ProblemSpec& spec, Complex lambda,
                           const IntegratorSettings& cfg) {
  return char_fn_with_derivative(spec, lambda, cfg).derivative;
}

}  // namespace pencil
