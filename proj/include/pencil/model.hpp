#ifndef PENCIL_MODEL_HPP
#define PENCIL_MODEL_HPP

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "pencil/errors.hpp"

namespace pencil {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kHalfPi = kPi / 2.0;

// Two-piece weight delta(x) = alpha^2 on (0, pi/2), beta^2 on (pi/2, pi).
struct PiecewiseWeight {
  double alpha = 1.0;
  double beta = 1.0;

  double value(double x) const { return x < kHalfPi ? alpha * alpha : beta * beta; }
  // Local oscillation frequency of solutions is |lambda| * root(x).
  double root(double x) const { return x < kHalfPi ? alpha : beta; }
};

// Interior transmission condition at `location`:
//   y(a+0)  = alpha_i * y(a-0)
//   y'(a+0) = (1/alpha_i) * y'(a-0) + i*lambda*gamma_i * y(a-0)
struct JumpCondition {
  double location = 0.0;
  double alpha = 1.0;
  double gamma = 0.0;

  double beta() const { return 1.0 / alpha; }  // derived, never stored
  bool trivial() const {
    const double d = alpha - 1.0;
    return d * d + gamma * gamma == 0.0;
  }
};

// Solution pair (y, y') at position x.
struct State {
  Complex y{0.0, 0.0};
  Complex dy{0.0, 0.0};
  double x = 0.0;

  bool finite() const;
};

enum class ValidationMode { strict, relaxed };

// p, q on [0, pi]. Two file-schema representations plus an internal composite
// used by the half-inverse machinery:
//  - cosine:  f(x) = sum_k c_k cos(k x)
//  - grid:    natural cubic spline through uniform samples on [0, pi]
//  - split:   cos(2kx) coefficients on [0, pi/2), delegating to another
//             Potentials on [pi/2, pi]
// Evaluation is deterministic; integrate_p is exact for the polynomial /
// trigonometric pieces of each representation.
class Potentials {
public:
  enum class Kind { cosine, grid, split };

  static Potentials cosine(std::vector<double> p_coeffs, std::vector<double> q_coeffs);
  static Potentials grid(std::vector<double> p_samples, std::vector<double> q_samples);
  static Potentials split_left_cosine(std::vector<double> left_p, std::vector<double> left_q,
                                      const Potentials& right);

  Kind kind() const { return kind_; }
  const std::vector<double>& p_data() const { return p_data_; }
  const std::vector<double>& q_data() const { return q_data_; }
  const Potentials& right() const;

  double p(double x) const;
  double q(double x) const;
  double integrate_p(double x0, double x1) const;

private:
  Potentials() = default;
  void check_domain(double x) const;

  Kind kind_ = Kind::cosine;
  std::vector<double> p_data_, q_data_;
  // grid representation: precomputed spline second derivatives
  std::vector<double> p_m2_, q_m2_;
  // split representation
  std::shared_ptr<const Potentials> right_;
};

// Immutable, validated problem instance.
class ProblemSpec {
public:
  static ProblemSpec validated(PiecewiseWeight w, Potentials pots,
                               std::array<JumpCondition, 2> jumps, ValidationMode mode);

  const PiecewiseWeight& weight() const { return weight_; }
  const Potentials& potentials() const { return potentials_; }
  const JumpCondition& jump(int i) const { return jumps_.at(static_cast<size_t>(i)); }
  const std::array<JumpCondition, 2>& jumps() const { return jumps_; }
  ValidationMode mode() const { return mode_; }

  double delta(double x) const { return weight_.value(x); }

  // Rebuild with one piece replaced; revalidates.
  ProblemSpec with_potentials(Potentials pots) const;
  ProblemSpec with_weight(PiecewiseWeight w) const;
  ProblemSpec with_jump(int i, JumpCondition j) const;

private:
  ProblemSpec(PiecewiseWeight w, Potentials p, std::array<JumpCondition, 2> j, ValidationMode m)
      : weight_(w), potentials_(std::move(p)), jumps_(j), mode_(m) {}

  PiecewiseWeight weight_;
  Potentials potentials_;
  std::array<JumpCondition, 2> jumps_;
  ValidationMode mode_;
};

ProblemSpec load_problem(const std::string& path);
void save_problem(const ProblemSpec& spec, const std::string& path);
std::string problem_to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const std::string& text);

// (p(x), q(x)); DomainError outside [0, pi].
std::pair<double, double> eval_potentials(const ProblemSpec& spec, double x);
// Integral of p over [x0, x1]; sign convention of an oriented interval.
double integrate_p(const ProblemSpec& spec, double x0, double x1);

}  // namespace pencil

#endif
