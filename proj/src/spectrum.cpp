#include "pencil/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "quadrature.hpp"

namespace pencil {

std::vector<Window> windows_from_estimates(const std::vector<double>& est, double fallback_gap) {
  std::vector<Window> wins;
  wins.reserve(est.size());
  for (size_t i = 0; i < est.size(); ++i) {
    double gap = fallback_gap;
    if (est.size() > 1) {
      const double left = i > 0 ? est[i] - est[i - 1] : std::numeric_limits<double>::infinity();
      const double right =
          i + 1 < est.size() ? est[i + 1] - est[i] : std::numeric_limits<double>::infinity();
      gap = std::min(left, right);
      if (!std::isfinite(gap)) gap = fallback_gap;
    }
    const double half = 0.45 * gap;
    wins.push_back(Window{est[i] - half, est[i] + half});
  }
  return wins;
}

std::vector<Window> bracket_windows(const ProblemSpec& spec, int n_max,
                                    const IntegratorSettings& cfg) {
  if (n_max < 1) return {};
  const auto est = eigenvalue_estimates(spec, n_max, EstimateSource::delta0, cfg);
  return windows_from_estimates(est.values, estimate_spacing(spec));
}

namespace {

Complex mueller_step(const std::array<Complex, 3>& l, const std::array<Complex, 3>& f) {
  const Complex q = (l[2] - l[1]) / (l[1] - l[0]);
  const Complex a = q * f[2] - q * (1.0 + q) * f[1] + q * q * f[0];
  const Complex b = (2.0 * q + 1.0) * f[2] - (1.0 + q) * (1.0 + q) * f[1] + q * q * f[0];
  const Complex c = (1.0 + q) * f[2];
  const Complex disc = std::sqrt(b * b - 4.0 * a * c);
  const Complex den = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
  if (den == Complex(0.0)) return l[2];
  return l[2] - (l[2] - l[1]) * 2.0 * c / den;
}

}  // namespace

RefineResult refine_root(const ProblemSpec& spec, Complex lambda0, double tol,
                         const IntegratorSettings& cfg) {
  if (!(tol > 0.0)) throw ValidationError("refine tolerance must be positive");
  constexpr int kMaxIter = 50;
  RefineResult best;
  best.lambda = lambda0;
  best.residual = std::numeric_limits<double>::infinity();

  std::array<Complex, 3> hist_l{};
  std::array<Complex, 3> hist_f{};
  int hist_n = 0;
  int stagnation = 0;
  Complex lam = lambda0;

  for (int it = 1; it <= kMaxIter; ++it) {
    CharFnPair d;
    try {
      d = char_fn_with_derivative(spec, lam, cfg);
    } catch (const NonFinite&) {
      // wandered into overflow territory; retreat halfway toward the best iterate
      lam = 0.5 * (lam + best.lambda);
      ++stagnation;
      continue;
    }
    const double r = std::abs(d.value);
    if (r < best.residual) {
      best.lambda = lam;
      best.residual = r;
      best.iterations = it;
      stagnation = 0;
    } else if (++stagnation >= 3 && hist_n >= 3) {
      const Complex m = mueller_step(hist_l, hist_f);
      if (std::isfinite(m.real()) && std::isfinite(m.imag())) {
        lam = m;
        stagnation = 0;
        continue;
      }
    }
    if (r <= tol * std::max(1.0, std::abs(d.derivative))) {
      best.lambda = lam;
      best.residual = r;
      best.iterations = it;
      best.converged = true;
      return best;
    }
    hist_l = {hist_l[1], hist_l[2], lam};
    hist_f = {hist_f[1], hist_f[2], d.value};
    hist_n = std::min(hist_n + 1, 3);

    if (std::abs(d.derivative) < 1e-300 * std::max(1.0, r)) {
      // flat spot: nudge deterministically and let the history carry Mueller
      lam += Complex(0.05, 0.05) * (1.0 + std::abs(lam));
      continue;
    }
    Complex step = d.value / d.derivative;
    // limit wild steps far outside the local root spacing
    const double cap = 2.0 * (1.0 + std::abs(lam));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    lam -= step;
  }
  best.iterations = kMaxIter;
  best.converged = false;
  return best;
}

namespace {

struct Found {
  Complex lambda;
  double residual;
  int iterations;
  int source_window;
  std::string flags;
};

void merge_into(std::vector<Found>& roots, const Found& cand, double merge_radius) {
  for (const auto& r : roots)
    if (std::abs(r.lambda - cand.lambda) <= merge_radius) return;
  roots.push_back(cand);
}

// Sign-scan Delta on the real axis (valid enumeration when gamma1=gamma2=0,
// where Delta is real there) and refine every bracketed crossing.
void scan_supplement(const ProblemSpec& spec, double lo, double hi, double step, double tol,
                     const SpectrumOptions& opts, std::vector<Found>& roots) {
  if (hi <= lo) return;
  auto f = [&](double l) { return char_fn(spec, Complex(l, 0.0), opts.scan_fwd).real(); };
  double xp = lo, fp = f(lo);
  const long n = std::lround(std::ceil((hi - lo) / step));
  for (long k = 1; k <= n; ++k) {
    const double x = std::min(lo + static_cast<double>(k) * step, hi);
    const double fx = f(x);
    if (fx == 0.0 || (fp < 0.0) != (fx < 0.0)) {
      const auto rr = refine_root(spec, Complex(0.5 * (xp + x), 0.0), tol, opts.fwd);
      if (rr.converged)
        merge_into(roots, Found{rr.lambda, rr.residual, rr.iterations, -1, "scan"},
                   opts.merge_radius);
    }
    xp = x;
    fp = fx;
  }
}

}  // namespace

Spectrum compute_spectrum(const ProblemSpec& spec, int n_max, double tol,
                          const SpectrumOptions& opts) {
  Spectrum out;
  if (n_max < 1) return out;

  const bool has_gamma = spec.jump(0).gamma != 0.0 || spec.jump(1).gamma != 0.0;
  const bool probe = has_gamma || opts.force_complex_probe;
  const double spacing = estimate_spacing(spec);

  std::vector<Found> roots;
  int est_count = n_max;
  double covered_hi = 0.0;
  double scanned_hi = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    EstimateList est;
    try {
      est = eigenvalue_estimates(spec, est_count, EstimateSource::delta0, opts.scan_fwd);
    } catch (const ScanExhausted& e) {
      out.notes.push_back(std::string("estimate scan exhausted: ") + e.what());
      break;
    }
    const auto wins = windows_from_estimates(est.values, spacing);
    for (size_t i = 0; i < wins.size(); ++i) {
      const Window& w = wins[i];
      covered_hi = std::max(covered_hi, w.hi);
      const bool covered =
          std::any_of(roots.begin(), roots.end(), [&](const Found& r) {
            return r.lambda.real() >= w.lo && r.lambda.real() <= w.hi;
          });
      if (attempt > 0 && covered) continue;
      std::vector<Complex> starts{Complex(w.center(), 0.0)};
      if (probe) {
        starts.push_back(Complex(w.center(), opts.probe_offset));
        starts.push_back(Complex(w.center(), -opts.probe_offset));
      }
      bool any = false;
      for (const Complex& s : starts) {
        const auto rr = refine_root(spec, s, tol, opts.fwd);
        if (rr.converged && rr.lambda.real() > -1e-6) {
          merge_into(roots,
                     Found{rr.lambda, rr.residual, rr.iterations, static_cast<int>(i), ""},
                     opts.merge_radius);
          any = true;
        }
      }
      if (!any)
        out.notes.push_back("window " + std::to_string(i) + " did not converge");
    }
    if (!has_gamma) {
      const double scan_to = covered_hi + 0.5 * spacing;
      scan_supplement(spec, scanned_hi, scan_to, std::min(0.01, spacing / 20.0), tol, opts,
                      roots);
      scanned_hi = std::max(scanned_hi, scan_to);
    }
    if (static_cast<int>(roots.size()) >= n_max) break;
    est_count += std::max(2, n_max / 3);
  }

  auto by_re_im = [](const Found& a, const Found& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  };
  std::sort(roots.begin(), roots.end(), by_re_im);

  if (probe && roots.size() >= 2) {
    // gap-fill: launch extra starts into suspiciously wide gaps
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> gaps;
      for (size_t i = 1; i < roots.size(); ++i)
        gaps.push_back(roots[i].lambda.real() - roots[i - 1].lambda.real());
      std::vector<double> sorted_gaps = gaps;
      std::sort(sorted_gaps.begin(), sorted_gaps.end());
      const double median = sorted_gaps[sorted_gaps.size() / 2];
      bool added = false;
      for (size_t i = 1; i < roots.size(); ++i) {
        if (gaps[i - 1] <= 1.7 * median) continue;
        const double mid = 0.5 * (roots[i].lambda.real() + roots[i - 1].lambda.real());
        for (const Complex s : {Complex(mid, 0.0), Complex(mid, opts.probe_offset),
                                Complex(mid, -opts.probe_offset)}) {
          const auto rr = refine_root(spec, s, tol, opts.fwd);
          if (rr.converged && rr.lambda.real() > -1e-6) {
            const size_t before = roots.size();
            merge_into(roots, Found{rr.lambda, rr.residual, rr.iterations, -1, "gapfill"},
                       opts.merge_radius);
            added |= roots.size() > before;
          }
        }
      }
      if (!added) break;
      std::sort(roots.begin(), roots.end(), by_re_im);
    }
  }

  if (opts.audit && !roots.empty()) {
    const IntegratorSettings audit_cfg{std::max(1e-9, opts.fwd.rtol * 100.0),
                                       std::max(1e-11, opts.fwd.atol * 100.0),
                                       opts.fwd.max_step};
    double max_im = 0.0;
    for (const auto& r : roots) max_im = std::max(max_im, std::abs(r.lambda.imag()));
    const double im_h = std::max(1.0, 3.0 * max_im + 0.1);
    for (int round = 0; round < 2; ++round) {
      int expected = -1;
      double used_hi = 0.0;
      for (int jitter = 0; jitter < 4 && expected < 0; ++jitter) {
        const Rect rect{-(0.02 + 0.013 * jitter) * spacing,
                        roots.back().lambda.real() + (0.35 + 0.17 * jitter) * spacing,
                        -im_h, im_h};
        try {
          expected = argument_principle_count(spec, rect, 128, audit_cfg);
          used_hi = rect.re_hi;
        } catch (const BoundaryRoot&) {
        } catch (const NonFinite&) {
          break;
        }
      }
      if (expected < 0) {
        out.notes.push_back("completeness audit skipped: no admissible contour found");
        break;
      }
      if (expected <= static_cast<int>(roots.size())) break;
      out.notes.push_back("audit expected " + std::to_string(expected) + " roots, found " +
                          std::to_string(roots.size()) + "; probing gaps");
      if (round == 1) break;
      // probe interior points of every gap plus the leading and trailing segments
      std::vector<double> edges{0.0};
      for (const auto& r : roots) edges.push_back(r.lambda.real());
      edges.push_back(used_hi);
      bool added = false;
      for (size_t i = 1; i < edges.size(); ++i) {
        for (const double frac : {0.3, 0.5, 0.7}) {
          const double re = edges[i - 1] + frac * (edges[i] - edges[i - 1]);
          for (const Complex s :
               {Complex(re, 0.0), Complex(re, opts.probe_offset),
                Complex(re, -opts.probe_offset), Complex(re, 2.0 * opts.probe_offset),
                Complex(re, -2.0 * opts.probe_offset)}) {
            const auto rr = refine_root(spec, s, tol, opts.fwd);
            if (rr.converged && rr.lambda.real() > -1e-6) {
              const size_t before = roots.size();
              merge_into(roots, Found{rr.lambda, rr.residual, rr.iterations, -1, "audit"},
                         opts.merge_radius);
              added |= roots.size() > before;
            }
          }
        }
      }
      if (!added) break;
      std::sort(roots.begin(), roots.end(), by_re_im);
    }
  }

  if (static_cast<int>(roots.size()) > n_max) roots.resize(static_cast<size_t>(n_max));
  out.entries.reserve(roots.size());
  for (size_t i = 0; i < roots.size(); ++i)
    out.entries.push_back(SpectrumEntry{static_cast<int>(i), roots[i].lambda, roots[i].residual,
                                        roots[i].iterations, roots[i].source_window,
                                        roots[i].flags});
  out.complete = static_cast<int>(out.entries.size()) == n_max;
  if (!out.complete)
    out.notes.push_back("incomplete spectrum: found " + std::to_string(out.entries.size()) +
                        " of " + std::to_string(n_max));
  return out;
}

namespace {

// Contour integrand nodes on one straight edge from za to zb.
struct EdgeQuad {
  const ProblemSpec* spec;
  const IntegratorSettings* cfg;

  Complex gl20(Complex za, Complex zb) const {
    const Complex mid = 0.5 * (za + zb);
    const Complex half = 0.5 * (zb - za);
    Complex acc{};
    for (const auto& p : quadrature::kGl20Half) {
      for (const double s : {-p.x, p.x}) {
        const Complex z = mid + half * s;
        const auto d = char_fn_with_derivative(*spec, z, *cfg);
        if (d.value == Complex(0.0)) throw BoundaryRoot("Delta vanishes on the contour");
        acc += p.w * (d.derivative / d.value);
      }
    }
    return acc * half;
  }

  Complex adaptive(Complex za, Complex zb, double tol, int depth) const {
    const Complex whole = gl20(za, zb);
    return refine(za, zb, whole, tol, depth);
  }

  Complex refine(Complex za, Complex zb, Complex whole, double tol, int depth) const {
    const Complex mid = 0.5 * (za + zb);
    const Complex left = gl20(za, mid);
    const Complex right = gl20(mid, zb);
    if (std::abs(whole - (left + right)) <= tol || depth >= 24)
      return left + right;
    return refine(za, mid, left, 0.5 * tol, depth + 1) +
           refine(mid, zb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

int argument_principle_count(const ProblemSpec& spec, const Rect& rect, int quad_n,
                             const IntegratorSettings& cfg) {
  if (quad_n < 64) throw ValidationError("argument principle requires quad_n >= 64");
  if (!(rect.re_lo < rect.re_hi && rect.im_lo < rect.im_hi))
    throw ValidationError("degenerate rectangle");
  const Complex corners[5] = {Complex(rect.re_lo, rect.im_lo), Complex(rect.re_hi, rect.im_lo),
                              Complex(rect.re_hi, rect.im_hi), Complex(rect.re_lo, rect.im_hi),
                              Complex(rect.re_lo, rect.im_lo)};
  const EdgeQuad eq{&spec, &cfg};
  const int panels_per_edge = std::max(1, (quad_n + 19) / 20);
  Complex total{};
  for (int e = 0; e < 4; ++e) {
    const Complex za = corners[e], zb = corners[e + 1];
    for (int p = 0; p < panels_per_edge; ++p) {
      const Complex a = za + (zb - za) * (static_cast<double>(p) / panels_per_edge);
      const Complex b = za + (zb - za) * (static_cast<double>(p + 1) / panels_per_edge);
      total += eq.adaptive(a, b, 0.01, 0);
    }
  }
  const double raw = (total / Complex(0.0, 2.0 * kPi)).real();
  const double nearest = std::round(raw);
  if (std::abs(raw - nearest) >= 0.1)
    throw BoundaryRoot("contour count " + std::to_string(raw) + " is not near an integer");
  return static_cast<int>(nearest);
}

}  // namespace pencil
