#include "pencil/verify.hpp"

#include <algorithm>
#include <cmath>

#include "quadrature.hpp"

namespace pencil {

namespace {

void require_shared_constants(const ProblemSpec& a, const ProblemSpec& b) {
  auto near = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); };
  if (!near(a.weight().alpha, b.weight().alpha) || !near(a.weight().beta, b.weight().beta))
    throw SpecMismatch("weight constants differ");
  for (int i = 0; i < 2; ++i) {
    const auto& ja = a.jump(i);
    const auto& jb = b.jump(i);
    if (!near(ja.location, jb.location) || !near(ja.alpha, jb.alpha) || !near(ja.gamma, jb.gamma))
      throw SpecMismatch("jump " + std::to_string(i + 1) + " constants differ");
  }
}

void require_shared_right_half(const ProblemSpec& a, const ProblemSpec& b) {
  for (int k = 0; k <= 64; ++k) {
    const double x = kHalfPi + (kPi - kHalfPi) * static_cast<double>(k) / 64.0;
    const auto [pa, qa] = eval_potentials(a, x);
    const auto [pb, qb] = eval_potentials(b, x);
    if (std::abs(pa - pb) > 1e-9 * (1.0 + std::abs(pa)) ||
        std::abs(qa - qb) > 1e-9 * (1.0 + std::abs(qa)))
      throw SpecMismatch("potentials differ on [pi/2, pi]");
  }
}

struct UNodes {
  std::vector<double> x, w;
  std::vector<Complex> phiAB;  // phi_A(x) * phi_B(x)
  std::vector<double> P, Q;
};

UNodes u_nodes(const ProblemSpec& a, const ProblemSpec& b, Complex lambda, int quad_n,
               const IntegratorSettings& cfg) {
  require_shared_constants(a, b);
  if (quad_n < 50) throw ValidationError("u_functional requires quad_n >= 50");

  const double a1 = a.jump(0).location;
  const double wavelength =
      2.0 * kPi / (std::max(std::abs(lambda), 1.0) * a.weight().alpha + 1e-12);
  const double max_panel = 20.0 * wavelength / 6.0;  // >= 6 nodes per wavelength

  UNodes nodes;
  auto add_base = [&](double lo, double hi) {
    if (hi - lo < 1e-15) return;
    const double len = hi - lo;
    const int by_osc = static_cast<int>(std::ceil(len / max_panel));
    const int by_count = static_cast<int>(std::ceil(static_cast<double>(quad_n) * len /
                                                    (kHalfPi * 20.0)));
    const int m = std::max({1, by_osc, by_count});
    for (int p = 0; p < m; ++p)
      quadrature::gl20_panel(lo + len * p / m, lo + len * (p + 1) / m, nodes.x, nodes.w);
  };
  add_base(0.0, std::min(a1, kHalfPi));
  add_base(std::min(a1, kHalfPi), kHalfPi);

  const auto phiA = phi_grid(a, lambda, nodes.x, cfg);
  const auto phiB = phi_grid(b, lambda, nodes.x, cfg);
  nodes.phiAB.resize(nodes.x.size());
  nodes.P.resize(nodes.x.size());
  nodes.Q.resize(nodes.x.size());
  for (size_t i = 0; i < nodes.x.size(); ++i) {
    nodes.phiAB[i] = phiA[i].y * phiB[i].y;
    const auto [pa, qa] = eval_potentials(a, nodes.x[i]);
    const auto [pb, qb] = eval_potentials(b, nodes.x[i]);
    nodes.P[i] = pa - pb;
    nodes.Q[i] = qa - qb;
  }
  return nodes;
}

}  // namespace

Complex u_functional(const ProblemSpec& specA, const ProblemSpec& specB, Complex lambda,
                     int quad_n, const IntegratorSettings& cfg) {
  const auto nodes = u_nodes(specA, specB, lambda, quad_n, cfg);
  Complex acc{};
  for (size_t i = 0; i < nodes.x.size(); ++i)
    acc += nodes.w[i] * (2.0 * lambda * nodes.P[i] + nodes.Q[i]) * nodes.phiAB[i];
  return acc;
}

std::pair<Complex, Complex> split_u(const ProblemSpec& specA, const ProblemSpec& specB,
                                    Complex lambda, int quad_n, const IntegratorSettings& cfg) {
  const auto nodes = u_nodes(specA, specB, lambda, quad_n, cfg);
  Complex u1{}, u2{};
  for (size_t i = 0; i < nodes.x.size(); ++i) {
    u1 += nodes.w[i] * nodes.P[i] * nodes.phiAB[i];
    u2 += nodes.w[i] * nodes.Q[i] * nodes.phiAB[i];
  }
  return {u1, u2};
}

double green_identity_residual(const ProblemSpec& specA, const ProblemSpec& specB,
                               Complex lambda, int quad_n, const IntegratorSettings& cfg) {
  require_shared_right_half(specA, specB);
  const Complex u = u_functional(specA, specB, lambda, quad_n, cfg);
  const State endA = phi(specA, lambda, kPi, cfg);
  const State endB = phi(specB, lambda, kPi, cfg);
  return std::abs(u + endB.dy * endA.y - endA.dy * endB.y);
}

namespace {

// Simpson weights for panels j..m of a uniform grid (3/8 patch on an odd
// count); exact through cubic integrands.
std::vector<double> tail_weights(int panels, double h) {
  std::vector<double> w(static_cast<size_t>(panels) + 1, 0.0);
  if (panels == 0) return w;
  if (panels == 1) {  // lone panel: trapezoid is all there is
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  int start = 0;
  if (panels % 2 == 1) {  // 3/8 rule on the first three panels
    if (panels == 3) {
      w[0] += 3.0 * h / 8.0;
      w[1] += 9.0 * h / 8.0;
      w[2] += 9.0 * h / 8.0;
      w[3] += 3.0 * h / 8.0;
      return w;
    }
    w[0] += 3.0 * h / 8.0;
    w[1] += 9.0 * h / 8.0;
    w[2] += 9.0 * h / 8.0;
    w[3] += 3.0 * h / 8.0;
    start = 3;
  }
  for (int j = start; j + 2 <= panels; j += 2) {
    w[static_cast<size_t>(j)] += h / 3.0;
    w[static_cast<size_t>(j) + 1] += 4.0 * h / 3.0;
    w[static_cast<size_t>(j) + 2] += h / 3.0;
  }
  return w;
}

}  // namespace

VolterraResult volterra_trivial_check(const VolterraProblem& vp,
                                      const std::function<std::vector<double>(double)>& s0,
                                      int iters) {
  if (iters < 1) throw ValidationError("volterra check needs iters >= 1");
  if (vp.dimension < 1) throw ValidationError("volterra dimension must be positive");
  if (vp.grid_n < 3) throw ValidationError("volterra grid too coarse");
  if (!(vp.t_hi > vp.t_lo)) throw ValidationError("volterra interval is empty");

  const int n = vp.grid_n;
  const int d = vp.dimension;
  const double h = (vp.t_hi - vp.t_lo) / static_cast<double>(n - 1);
  auto node = [&](int i) { return vp.t_lo + h * static_cast<double>(i); };

  std::vector<double> S(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const auto v = s0(node(i));
    if (static_cast<int>(v.size()) != d)
      throw ValidationError("s0 dimension does not match the problem");
    for (int c = 0; c < d; ++c) S[static_cast<size_t>(i) * d + c] = v[static_cast<size_t>(c)];
  }

  auto sup_norm = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  // per-start-index quadrature weights, shared across iterations
  std::vector<std::vector<double>> weights(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) weights[static_cast<size_t>(i)] = tail_weights(n - 1 - i, h);

  VolterraResult res;
  res.norm_history.push_back(sup_norm(S));

  std::vector<double> K(static_cast<size_t>(d) * d);
  std::vector<double> next(S.size());
  constexpr double kOverflowGuard = 1e12;
  for (int it = 0; it < iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const auto& w = weights[static_cast<size_t>(i)];
      double* acc = &next[static_cast<size_t>(i) * d];
      for (int j = i; j < n; ++j) {
        const double wj = w[static_cast<size_t>(j - i)];
        if (wj == 0.0) continue;
        vp.kernel(node(j), node(i), K);
        for (double kv : K)
          if (!(std::abs(kv) <= kOverflowGuard))
            throw UnboundedKernel("kernel exceeds the overflow guard on the grid");
        const double* sj = &S[static_cast<size_t>(j) * d];
        for (int r = 0; r < d; ++r) {
          double dot = 0.0;
          for (int c = 0; c < d; ++c) dot += K[static_cast<size_t>(r) * d + c] * sj[c];
          acc[r] -= wj * dot;
        }
      }
    }
    S.swap(next);
    res.norm_history.push_back(sup_norm(S));
  }
  res.final_norm = res.norm_history.back();
  return res;
}

}  // namespace pencil
