#ifndef PENCIL_SPECTRUM_HPP
#define PENCIL_SPECTRUM_HPP

#include <string>
#include <vector>

#include "pencil/asymptotics.hpp"
#include "pencil/forward.hpp"
#include "pencil/model.hpp"

namespace pencil {

struct SpectrumEntry {
  int n = 0;
  Complex lambda{};
  double residual = 0.0;  // |Delta(lambda)|
  int iterations = 0;
  int source_window = -1;  // -1: found by a scan or gap-fill pass
  std::string flags;
};

struct Spectrum {
  std::vector<SpectrumEntry> entries;
  bool complete = true;
  std::vector<std::string> notes;
};

struct Window {
  double lo, hi;
  double center() const { return 0.5 * (lo + hi); }
};

// Real intervals centered on the Delta0 zero estimates, half-width 0.45 of the
// local gap; pairwise disjoint.
std::vector<Window> bracket_windows(const ProblemSpec& spec, int n_max,
                                    const IntegratorSettings& cfg = {});
std::vector<Window> windows_from_estimates(const std::vector<double>& estimates,
                                           double fallback_gap);

struct RefineResult {
  Complex lambda{};
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton on Delta with a Mueller fallback after stagnation; stops when
// |Delta| <= tol * max(1, |Delta'|). Non-convergence is reported, not thrown.
RefineResult refine_root(const ProblemSpec& spec, Complex lambda0, double tol,
                         const IntegratorSettings& cfg = {});

struct SpectrumOptions {
  double merge_radius = 1e-8;
  double probe_offset = 0.1;   // imaginary offset of the extra starts when gamma != 0
  bool force_complex_probe = false;
  bool audit = true;           // argument-principle completeness audit + gap probes
  IntegratorSettings fwd{};
  IntegratorSettings scan_fwd{1e-8, 1e-10, kPi / 8.0};  // cheap settings for scans
};

// Enumerate the first n_max eigenvalues with nonnegative real part, ascending
// by (Re, Im). Windows come from the asymptotic estimates; a sign-scan merge
// pass (gamma = 0) or gap-fill probes (gamma != 0) guard completeness.
Spectrum compute_spectrum(const ProblemSpec& spec, int n_max, double tol,
                          const SpectrumOptions& opts = {});

struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
};

// (1/2*pi*i) * contour integral of Delta'/Delta over the rectangle boundary,
// rounded; BoundaryRoot if the raw value is not within 0.1 of an integer.
int argument_principle_count(const ProblemSpec& spec, const Rect& rect, int quad_n,
                             const IntegratorSettings& cfg = {});

}  // namespace pencil

#endif
