#include "pencil/asymptotics.hpp"

#include <cmath>
#include <functional>

namespace pencil {

PhaseMaps PhaseMaps::of(const ProblemSpec& spec) {
  return PhaseMaps{spec.weight().alpha, spec.weight().beta, spec.jump(0).location,
                   spec.jump(1).location};
}

AsymptoticCoefficients AsymptoticCoefficients::of(const ProblemSpec& spec) {
  const double al = spec.weight().alpha, be = spec.weight().beta;
  const auto& j1 = spec.jump(0);
  const auto& j2 = spec.jump(1);
  AsymptoticCoefficients c{};
  c.beta1_plus = 0.5 * (j1.alpha + j1.beta() / al);
  c.beta1_minus = 0.5 * (j1.alpha - j1.beta() / al);
  c.beta2_plus = 0.5 * (j2.alpha + al * j2.beta() / be);
  c.beta2_minus = 0.5 * (j2.alpha - al * j2.beta() / be);
  c.gamma1_shift = j1.gamma / (2.0 * al);
  c.gamma2_shift = j2.gamma / (2.0 * be);
  return c;
}

double PhaseIntegrals::v(double x) const { return integrate_p(*spec, spec->jump(0).location, x); }
double PhaseIntegrals::t(double x) const { return integrate_p(*spec, spec->jump(1).location, x); }
double PhaseIntegrals::beta_of(double x) const { return integrate_p(*spec, 0.0, x); }
double PhaseIntegrals::omega(double x) const {
  return t(x) + integrate_p(*spec, 0.0, spec->jump(0).location);
}
double PhaseIntegrals::w_pi() const { return t(kPi); }

Complex phi0(const ProblemSpec& spec, Complex lambda, double x) {
  if (!(x > 0.0 && x <= kPi)) throw DomainError("phi0 requires x in (0, pi]");
  if (x == kHalfPi) throw DomainError("phi0 undefined at the formula switch point pi/2");
  const auto maps = PhaseMaps::of(spec);
  const auto co = AsymptoticCoefficients::of(spec);
  const auto ints = PhaseIntegrals::of(spec);
  if (x < kHalfPi) {
    const double ph = ints.v(x) / spec.weight().alpha;
    return (co.beta1_plus + co.gamma1_shift) * std::cos(lambda * maps.xi_plus(x) - ph) +
           (co.beta1_minus - co.gamma1_shift) * std::cos(lambda * maps.xi_minus(x) + ph);
  }
  // right of pi/2 the printed combination carries its pi-evaluated arguments
  const double ph = ints.w_pi() / spec.weight().beta;
  return (co.beta2_plus + co.gamma2_shift) * std::cos(lambda * maps.k_plus(kPi) - ph) +
         (co.beta2_minus + co.gamma2_shift) * std::cos(lambda * maps.k_minus(kPi) - ph) +
         (co.beta2_minus - co.gamma2_shift) * std::cos(lambda * maps.s_plus(kPi) + ph) +
         (co.beta2_plus - co.gamma2_shift) * std::cos(lambda * maps.s_minus(kPi) + ph);
}

Complex char_fn0(const ProblemSpec& spec, Complex lambda) { return phi0(spec, lambda, kPi); }

double estimate_spacing(const ProblemSpec& spec) {
  const double kp = PhaseMaps::of(spec).k_plus(kPi);
  return kPi / std::abs(kp);
}

namespace {

// Dense scan + bisection for the first n_max nonnegative zeros of f.
std::vector<double> scan_zeros(const std::function<double(double)>& f, int n_max, double step,
                               long max_steps, double* abs_max_seen) {
  std::vector<double> zeros;
  double x_prev = 0.0;
  double f_prev = f(0.0);
  if (abs_max_seen) *abs_max_seen = std::abs(f_prev);
  for (long k = 1; static_cast<int>(zeros.size()) < n_max; ++k) {
    if (k > max_steps) throw ScanExhausted("zero scan exhausted its step budget");
    const double x = static_cast<double>(k) * step;
    const double fx = f(x);
    if (abs_max_seen) *abs_max_seen = std::max(*abs_max_seen, std::abs(fx));
    if (fx == 0.0) {
      zeros.push_back(x);
    } else if (f_prev == 0.0) {
      // zero already recorded at the previous node
    } else if ((f_prev < 0.0) != (fx < 0.0)) {
      double lo = x_prev, hi = x;
      double flo = f_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((flo < 0.0) != (fm < 0.0))
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
      }
      zeros.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    f_prev = fx;
  }
  return zeros;
}

}  // namespace

EstimateList eigenvalue_estimates(const ProblemSpec& spec, int n_max, EstimateSource source,
                                  const IntegratorSettings& cfg) {
  EstimateList out;
  if (n_max <= 0) return out;
  const double spacing = estimate_spacing(spec);
  const double step = std::min(0.01, spacing / 20.0);
  const long max_steps = 10000L * n_max;

  auto delta0 = [&](double l) { return char_fn0(spec, Complex(l, 0.0)).real(); };
  // Re(Delta) matches Delta on the real axis when gamma1 = gamma2 = 0; with
  // spectral jump terms it is a heuristic scan target, which is all the
  // fallback needs.
  auto delta = [&](double l) { return char_fn(spec, Complex(l, 0.0), cfg).real(); };

  if (source == EstimateSource::char_fn) {
    out.values = scan_zeros(delta, n_max, step, max_steps, nullptr);
    out.used_char_fn = true;
    return out;
  }

  // degeneracy probe: coefficient cancellation can flatten Delta0 entirely
  const auto co = AsymptoticCoefficients::of(spec);
  const double coeff_scale = std::abs(co.beta2_plus + co.gamma2_shift) +
                             std::abs(co.beta2_minus + co.gamma2_shift) +
                             std::abs(co.beta2_minus - co.gamma2_shift) +
                             std::abs(co.beta2_plus - co.gamma2_shift);
  double seen = 0.0;
  const long probe_steps = static_cast<long>(std::ceil(2.0 * spacing / step)) + 1;
  for (long k = 0; k <= probe_steps; ++k)
    seen = std::max(seen, std::abs(delta0(static_cast<double>(k) * step)));
  if (seen < 1e-10 * (coeff_scale + 1e-300)) {
    out.values = scan_zeros(delta, n_max, step, max_steps, nullptr);
    out.used_char_fn = true;
    return out;
  }

  out.values = scan_zeros(delta0, n_max, step, max_steps, nullptr);
  return out;
}

std::vector<RemainderRow> remainder_report(const ProblemSpec& spec,
                                           std::span<const double> lambdas,
                                           const IntegratorSettings& cfg) {
  std::vector<RemainderRow> rows;
  rows.reserve(lambdas.size());
  for (double l : lambdas) {
    const Complex d = char_fn(spec, Complex(l, 0.0), cfg);
    const Complex d0 = char_fn0(spec, Complex(l, 0.0));
    const double diff = std::abs(d - d0);
    rows.push_back(RemainderRow{l, diff, std::abs(l) * diff});
  }
  return rows;
}

}  // namespace pencil
