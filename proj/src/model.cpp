#include "pencil/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pencil {

namespace {

// Natural cubic spline through uniform samples on [0, pi]: second derivatives
// by the standard tridiagonal solve.
std::vector<double> spline_second_derivs(const std::vector<double>& f) {
  const size_t n = f.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  const double h = kPi / static_cast<double>(n - 1);
  std::vector<double> c(n, 0.0), d(n, 0.0);
  // rows 1..n-2 of the tridiagonal system (h/6, 2h/3, h/6)
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h;
  double beta = 2.0 * h / 3.0;
  m[1] = d[1] / beta;
  for (size_t i = 2; i + 1 < n; ++i) {
    c[i] = (h / 6.0) / beta;
    beta = 2.0 * h / 3.0 - (h / 6.0) * c[i];
    m[i] = (d[i] - (h / 6.0) * m[i - 1]) / beta;
  }
  for (size_t i = n - 3; i >= 1; --i) {
    m[i] -= c[i + 1] * m[i + 1];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const std::vector<double>& f, const std::vector<double>& m, double x) {
  const size_t n = f.size();
  const double h = kPi / static_cast<double>(n - 1);
  size_t i = static_cast<size_t>(std::floor(x / h));
  if (i >= n - 1) i = n - 2;
  const double t = (x - static_cast<double>(i) * h) / h;  // in [0, 1]
  const double u = 1.0 - t;
  // this form reproduces the stored samples exactly at t = 0 and t = 1
  return f[i] * u + f[i + 1] * t +
         (h * h / 6.0) * (m[i] * (u * u * u - u) + m[i + 1] * (t * t * t - t));
}

// Exact integral of the spline over one piece restricted to [a + t0, a + t1],
// 0 <= t0 <= t1 <= h.
double spline_piece_integral(double f0, double f1, double m0, double m1, double h,
                             double t0, double t1) {
  auto anti = [&](double t) {
    const double u = h - t;
    return (-m0 * u * u * u * u + m1 * t * t * t * t) / (24.0 * h) -
           (f0 / h - m0 * h / 6.0) * u * u / 2.0 + (f1 / h - m1 * h / 6.0) * t * t / 2.0;
  };
  return anti(t1) - anti(t0);
}

double spline_integrate(const std::vector<double>& f, const std::vector<double>& m,
                        double x0, double x1) {
  const size_t n = f.size();
  const double h = kPi / static_cast<double>(n - 1);
  double acc = 0.0;
  size_t i0 = static_cast<size_t>(std::floor(x0 / h));
  size_t i1 = static_cast<size_t>(std::floor(x1 / h));
  if (i0 >= n - 1) i0 = n - 2;
  if (i1 >= n - 1) i1 = n - 2;
  for (size_t i = i0; i <= i1; ++i) {
    const double a = static_cast<double>(i) * h;
    const double t0 = (i == i0) ? x0 - a : 0.0;
    const double t1 = (i == i1) ? x1 - a : h;
    acc += spline_piece_integral(f[i], f[i + 1], m[i], m[i + 1], h, t0, t1);
  }
  return acc;
}

double cosine_eval(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(static_cast<double>(k) * x);
  return s;
}

double cosine_integral(const std::vector<double>& c, double x0, double x1) {
  double s = 0.0;
  if (!c.empty()) s += c[0] * (x1 - x0);
  for (size_t k = 1; k < c.size(); ++k) {
    const double kk = static_cast<double>(k);
    s += c[k] * (std::sin(kk * x1) - std::sin(kk * x0)) / kk;
  }
  return s;
}

// Half-interval family used by the split representation: f(x) = sum a_k cos(2kx).
double half_cosine_eval(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(2.0 * static_cast<double>(k) * x);
  return s;
}

double half_cosine_integral(const std::vector<double>& c, double x0, double x1) {
  double s = 0.0;
  if (!c.empty()) s += c[0] * (x1 - x0);
  for (size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * static_cast<double>(k);
    s += c[k] * (std::sin(w * x1) - std::sin(w * x0)) / w;
  }
  return s;
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + " contains a non-finite entry");
}

}  // namespace

bool State::finite() const {
  return std::isfinite(y.real()) && std::isfinite(y.imag()) && std::isfinite(dy.real()) &&
         std::isfinite(dy.imag()) && std::isfinite(x);
}

Potentials Potentials::cosine(std::vector<double> p_coeffs, std::vector<double> q_coeffs) {
  require_finite(p_coeffs, "p coefficients");
  require_finite(q_coeffs, "q coefficients");
  Potentials out;
  out.kind_ = Kind::cosine;
  out.p_data_ = std::move(p_coeffs);
  out.q_data_ = std::move(q_coeffs);
  return out;
}

Potentials Potentials::grid(std::vector<double> p_samples, std::vector<double> q_samples) {
  if (p_samples.size() < 4 || q_samples.size() < 4)
    throw ValidationError("grid representation needs at least 4 samples");
  if (p_samples.size() != q_samples.size())
    throw ValidationError("grid p and q sample counts differ");
  require_finite(p_samples, "p samples");
  require_finite(q_samples, "q samples");
  Potentials out;
  out.kind_ = Kind::grid;
  out.p_data_ = std::move(p_samples);
  out.q_data_ = std::move(q_samples);
  out.p_m2_ = spline_second_derivs(out.p_data_);
  out.q_m2_ = spline_second_derivs(out.q_data_);
  return out;
}

Potentials Potentials::split_left_cosine(std::vector<double> left_p, std::vector<double> left_q,
                                         const Potentials& right) {
  require_finite(left_p, "left p coefficients");
  require_finite(left_q, "left q coefficients");
  Potentials out;
  out.kind_ = Kind::split;
  out.p_data_ = std::move(left_p);
  out.q_data_ = std::move(left_q);
  out.right_ = std::make_shared<Potentials>(right);
  return out;
}

const Potentials& Potentials::right() const {
  if (kind_ != Kind::split) throw DomainError("right() only defined for split potentials");
  return *right_;
}

void Potentials::check_domain(double x) const {
  if (!(x >= 0.0 && x <= kPi))
    throw DomainError("potential evaluation outside [0, pi]: x=" + std::to_string(x));
}

double Potentials::p(double x) const {
  check_domain(x);
  switch (kind_) {
    case Kind::cosine: return cosine_eval(p_data_, x);
    case Kind::grid: return spline_eval(p_data_, p_m2_, x);
    case Kind::split: return x < kHalfPi ? half_cosine_eval(p_data_, x) : right_->p(x);
  }
  return 0.0;
}

double Potentials::q(double x) const {
  check_domain(x);
  switch (kind_) {
    case Kind::cosine: return cosine_eval(q_data_, x);
    case Kind::grid: return spline_eval(q_data_, q_m2_, x);
    case Kind::split: return x < kHalfPi ? half_cosine_eval(q_data_, x) : right_->q(x);
  }
  return 0.0;
}

double Potentials::integrate_p(double x0, double x1) const {
  check_domain(x0);
  check_domain(x1);
  if (x0 > x1) return -integrate_p(x1, x0);
  switch (kind_) {
    case Kind::cosine: return cosine_integral(p_data_, x0, x1);
    case Kind::grid: return spline_integrate(p_data_, p_m2_, x0, x1);
    case Kind::split: {
      if (x1 <= kHalfPi) return half_cosine_integral(p_data_, x0, x1);
      if (x0 >= kHalfPi) return right_->integrate_p(x0, x1);
      return half_cosine_integral(p_data_, x0, kHalfPi) + right_->integrate_p(kHalfPi, x1);
    }
  }
  return 0.0;
}

ProblemSpec ProblemSpec::validated(PiecewiseWeight w, Potentials pots,
                                   std::array<JumpCondition, 2> jumps, ValidationMode mode) {
  if (!(w.alpha > 0.0) || !(w.beta > 0.0))
    throw ValidationError("weight roots must be positive");
  if (mode == ValidationMode::strict) {
    if (!(w.alpha < w.beta)) throw ValidationError("alpha < beta violated");
    if (!(w.beta < 1.0)) throw ValidationError("beta < 1 violated");
    if (!(w.alpha + w.beta > 1.0)) throw ValidationError("alpha + beta > 1 violated");
  }
  for (int i = 0; i < 2; ++i) {
    const JumpCondition& j = jumps[static_cast<size_t>(i)];
    if (!(j.alpha > 0.0))
      throw ValidationError("jump " + std::to_string(i + 1) + " has non-positive alpha");
    if (!std::isfinite(j.location) || !std::isfinite(j.gamma) || !std::isfinite(j.alpha))
      throw ValidationError("jump " + std::to_string(i + 1) + " has non-finite fields");
    if (mode == ValidationMode::strict && j.trivial())
      throw ValidationError("jump " + std::to_string(i + 1) + " is trivial");
  }
  if (!(jumps[0].location >= 0.0 && jumps[0].location <= kHalfPi))
    throw ValidationError("jump 1 location outside [0, pi/2]");
  if (!(jumps[1].location >= kHalfPi && jumps[1].location <= kPi))
    throw ValidationError("jump 2 location outside [pi/2, pi]");
  if (jumps[0].location == jumps[1].location)
    throw ValidationError("jump locations coincide");
  return ProblemSpec(w, std::move(pots), jumps, mode);
}

ProblemSpec ProblemSpec::with_potentials(Potentials pots) const {
  return validated(weight_, std::move(pots), jumps_, mode_);
}

ProblemSpec ProblemSpec::with_weight(PiecewiseWeight w) const {
  return validated(w, potentials_, jumps_, mode_);
}

ProblemSpec ProblemSpec::with_jump(int i, JumpCondition j) const {
  auto jumps = jumps_;
  jumps.at(static_cast<size_t>(i)) = j;
  return validated(weight_, potentials_, jumps, mode_);
}

namespace {

using nlohmann::json;

Potentials potentials_from_json(const json& jp) {
  const std::string kind = jp.at("kind").get<std::string>();
  auto p = jp.at("p").get<std::vector<double>>();
  auto q = jp.at("q").get<std::vector<double>>();
  if (kind == "cosine") return Potentials::cosine(std::move(p), std::move(q));
  if (kind == "grid") {
    if (jp.contains("grid_n")) {
      const auto n = jp.at("grid_n").get<size_t>();
      if (n != p.size() || n != q.size())
        throw ValidationError("grid_n does not match sample counts");
    }
    return Potentials::grid(std::move(p), std::move(q));
  }
  throw ValidationError("unknown potentials kind: " + kind);
}

}  // namespace

ProblemSpec problem_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("problem file is not valid JSON: ") + e.what());
  }
  try {
    PiecewiseWeight w{j.at("weight").at("alpha").get<double>(),
                      j.at("weight").at("beta").get<double>()};
    const auto& jj = j.at("jumps");
    if (!jj.is_array() || jj.size() != 2)
      throw ValidationError("exactly two jump conditions required");
    std::array<JumpCondition, 2> jumps;
    for (size_t i = 0; i < 2; ++i) {
      jumps[i].location = jj[i].at("location").get<double>();
      jumps[i].alpha = jj[i].at("alpha").get<double>();
      jumps[i].gamma = jj[i].at("gamma").get<double>();
    }
    const std::string mode_s = j.at("mode").get<std::string>();
    ValidationMode mode;
    if (mode_s == "strict")
      mode = ValidationMode::strict;
    else if (mode_s == "relaxed")
      mode = ValidationMode::relaxed;
    else
      throw ValidationError("mode must be \"strict\" or \"relaxed\"");
    return ProblemSpec::validated(w, potentials_from_json(j.at("potentials")), jumps, mode);
  } catch (const json::exception& e) {
    throw ParseError(std::string("problem file schema violation: ") + e.what());
  }
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return problem_from_json(ss.str());
}

std::string problem_to_json(const ProblemSpec& spec) {
  if (spec.potentials().kind() == Potentials::Kind::split)
    throw DomainError("split potentials have no file representation");
  json j;
  j["weight"] = {{"alpha", spec.weight().alpha}, {"beta", spec.weight().beta}};
  j["jumps"] = json::array();
  for (int i = 0; i < 2; ++i) {
    const auto& jc = spec.jump(i);
    j["jumps"].push_back(
        {{"location", jc.location}, {"alpha", jc.alpha}, {"gamma", jc.gamma}});
  }
  const char* kind = spec.potentials().kind() == Potentials::Kind::cosine ? "cosine" : "grid";
  j["potentials"] = {{"kind", kind},
                     {"p", spec.potentials().p_data()},
                     {"q", spec.potentials().q_data()}};
  if (spec.potentials().kind() == Potentials::Kind::grid)
    j["potentials"]["grid_n"] = spec.potentials().p_data().size();
  j["mode"] = spec.mode() == ValidationMode::strict ? "strict" : "relaxed";
  return j.dump(2);
}

void save_problem(const ProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write problem file: " + path);
  out << problem_to_json(spec) << "\n";
}

std::pair<double, double> eval_potentials(const ProblemSpec& spec, double x) {
  return {spec.potentials().p(x), spec.potentials().q(x)};
}

double integrate_p(const ProblemSpec& spec, double x0, double x1) {
  return spec.potentials().integrate_p(x0, x1);
}

}  // namespace pencil
