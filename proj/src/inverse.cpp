#include "pencil/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "parallel.hpp"

namespace pencil {

Potentials ReconstructionReport::compose(const Potentials& known_right) const {
  return Potentials::split_left_cosine(p_coeffs, q_coeffs, known_right);
}

std::vector<Complex> residual_vector(const std::vector<double>& left_p,
                                     const std::vector<double>& left_q,
                                     const Potentials& known_right,
                                     const ProblemSpec& spec_template, const Spectrum& target,
                                     const IntegratorSettings& cfg) {
  const ProblemSpec candidate = spec_template.with_potentials(
      Potentials::split_left_cosine(left_p, left_q, known_right));
  std::vector<Complex> r(target.entries.size());
  detail::parallel_for(static_cast<int>(target.entries.size()), [&](int i) {
    r[static_cast<size_t>(i)] = char_fn(candidate, target.entries[static_cast<size_t>(i)].lambda, cfg);
  });
  return r;
}

double left_l2_distance(const std::vector<double>& pa, const std::vector<double>& qa,
                        const std::vector<double>& pb, const std::vector<double>& qb) {
  auto term = [](const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = std::max(a.size(), b.size());
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const double da = (k < a.size() ? a[k] : 0.0) - (k < b.size() ? b[k] : 0.0);
      acc += (k == 0 ? kHalfPi : kHalfPi / 2.0) * da * da;  // int cos^2(2kx) over [0, pi/2]
    }
    return acc;
  };
  return std::sqrt(term(pa, pb) + term(qa, qb));
}

namespace {

struct LmProblem {
  const Potentials* known_right;
  const ProblemSpec* spec_template;
  const Spectrum* target;  // already truncated to n_eigen entries
  const ReconstructionConfig* cfg;
  int dim;  // basis_dim

  Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
    std::vector<double> p(theta.data(), theta.data() + dim);
    std::vector<double> q(theta.data() + dim, theta.data() + 2 * dim);
    const auto r =
        residual_vector(p, q, *known_right, *spec_template, *target, cfg->forward);
    const bool penalize = cfg->continuity_penalty > 0.0;
    Eigen::VectorXd out(2 * static_cast<int>(r.size()) + (penalize ? 2 : 0));
    for (size_t i = 0; i < r.size(); ++i) {
      out[2 * static_cast<int>(i)] = r[i].real();
      out[2 * static_cast<int>(i) + 1] = r[i].imag();
    }
    if (penalize) {
      // value mismatch against the known right half at the interface
      const double w = std::sqrt(cfg->continuity_penalty);
      double p_left = 0.0, q_left = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double c = std::cos(2.0 * k * kHalfPi);
        p_left += p[static_cast<size_t>(k)] * c;
        q_left += q[static_cast<size_t>(k)] * c;
      }
      out[out.size() - 2] = w * (p_left - known_right->p(kHalfPi));
      out[out.size() - 1] = w * (q_left - known_right->q(kHalfPi));
    }
    return out;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta, const Eigen::VectorXd& r0) const {
    Eigen::MatrixXd J(r0.size(), theta.size());
    for (int j = 0; j < theta.size(); ++j) {
      const double h = cfg->fd_step * std::max(1.0, std::abs(theta[j]));
      Eigen::VectorXd tp = theta;
      tp[j] += h;
      J.col(j) = (residuals(tp) - r0) / h;
    }
    return J;
  }
};

ReconstructionReport run_lm(const LmProblem& prob, const Eigen::VectorXd& theta0) {
  const auto& cfg = *prob.cfg;
  ReconstructionReport rep;
  rep.seed = cfg.seed;

  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd r = prob.residuals(theta);
  double obj = r.squaredNorm() + cfg.regularization * theta.squaredNorm();
  rep.objective_history.push_back(obj);

  double mu = -1.0;  // initialized from the first Jacobian
  const int n_params = static_cast<int>(theta.size());
  for (int it = 0; it < cfg.max_iter; ++it) {
    rep.iterations = it + 1;
    const Eigen::MatrixXd J = prob.jacobian(theta, r);
    const Eigen::VectorXd grad = J.transpose() * r + cfg.regularization * theta;
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      rep.converged = true;
      break;
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    rep.jacobian_condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (rep.jacobian_condition > 1e12) rep.ill_conditioned = true;
    if (mu < 0.0) mu = 1e-3 * JtJ.diagonal().maxCoeff() + 1e-12;
    if (rep.ill_conditioned) mu = std::max(mu, 1e-6 * JtJ.diagonal().maxCoeff());

    bool accepted = false;
    for (int inner = 0; inner < 20; ++inner) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += cfg.regularization + mu;
      const Eigen::VectorXd delta = A.ldlt().solve(-grad);
      const Eigen::VectorXd trial = theta + delta;
      const Eigen::VectorXd r_trial = prob.residuals(trial);
      const double obj_trial = r_trial.squaredNorm() + cfg.regularization * trial.squaredNorm();
      if (obj_trial <= obj) {
        const bool small_step =
            delta.norm() <= cfg.step_tol * (theta.norm() + cfg.step_tol);
        theta = trial;
        r = r_trial;
        obj = obj_trial;
        rep.objective_history.push_back(obj);
        mu = std::max(mu * 0.35, 1e-14);
        accepted = true;
        if (small_step) rep.converged = true;
        break;
      }
      mu *= 3.5;
    }
    if (!accepted || rep.converged) {
      // no downhill step at any damping: gradient-stationary for this budget
      if (!accepted) rep.converged = grad.lpNorm<Eigen::Infinity>() <= 1e3 * cfg.grad_tol;
      break;
    }
  }
  if (!rep.converged && rep.iterations >= cfg.max_iter) rep.hit_max_iterations = true;

  rep.p_coeffs.assign(theta.data(), theta.data() + n_params / 2);
  rep.q_coeffs.assign(theta.data() + n_params / 2, theta.data() + n_params);
  rep.final_residual = r.norm();
  rep.multistart_distances = {{0.0}};
  return rep;
}

Spectrum truncated(const Spectrum& target, int n_eigen) {
  Spectrum t = target;
  t.entries.resize(static_cast<size_t>(n_eigen));
  return t;
}

void validate_config(const ReconstructionConfig& cfg, const Spectrum& target) {
  if (cfg.basis_dim < 1) throw ValidationError("basis_dim must be positive");
  if (cfg.n_eigen < 2 * cfg.basis_dim)
    throw ValidationError("n_eigen must be at least 2 * basis_dim (both p and q are unknown)");
  if (static_cast<int>(target.entries.size()) < cfg.n_eigen)
    throw ValidationError("target spectrum has fewer than n_eigen entries");
}

}  // namespace

ReconstructionReport reconstruct(const Potentials& known_right, const ProblemSpec& spec_template,
                                 const Spectrum& target, const ReconstructionConfig& cfg) {
  validate_config(cfg, target);
  const Spectrum t = truncated(target, cfg.n_eigen);
  const LmProblem prob{&known_right, &spec_template, &t, &cfg, cfg.basis_dim};
  return run_lm(prob, Eigen::VectorXd::Zero(2 * cfg.basis_dim));
}

ReconstructionReport uniqueness_probe(const Potentials& known_right,
                                      const ProblemSpec& spec_template, const Spectrum& target,
                                      const ReconstructionConfig& cfg) {
  validate_config(cfg, target);
  if (cfg.multistart < 1) throw ValidationError("multistart must be at least 1");
  const Spectrum t = truncated(target, cfg.n_eigen);
  const LmProblem prob{&known_right, &spec_template, &t, &cfg, cfg.basis_dim};

  // mt19937 is fully specified, so the draw sequence is portable
  std::mt19937 rng(cfg.seed);
  auto draw = [&rng]() {
    return -0.5 + static_cast<double>(rng()) * (1.0 / 4294967296.0);
  };

  std::vector<ReconstructionReport> runs;
  runs.reserve(static_cast<size_t>(cfg.multistart));
  for (int s = 0; s < cfg.multistart; ++s) {
    Eigen::VectorXd theta0(2 * cfg.basis_dim);
    for (int j = 0; j < theta0.size(); ++j) theta0[j] = draw();
    runs.push_back(run_lm(prob, theta0));
  }

  std::vector<int> converged;
  for (int s = 0; s < cfg.multistart; ++s)
    if (runs[static_cast<size_t>(s)].converged) converged.push_back(s);
  if (converged.empty()) throw AllDiverged("no multistart run converged");

  const size_t m = converged.size();
  std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j) {
      const auto& a = runs[static_cast<size_t>(converged[i])];
      const auto& b = runs[static_cast<size_t>(converged[j])];
      dist[i][j] = left_l2_distance(a.p_coeffs, a.q_coeffs, b.p_coeffs, b.q_coeffs);
    }

  size_t best = 0;
  for (size_t i = 1; i < m; ++i)
    if (runs[static_cast<size_t>(converged[i])].final_residual <
        runs[static_cast<size_t>(converged[best])].final_residual)
      best = i;
  ReconstructionReport rep = runs[static_cast<size_t>(converged[best])];
  rep.multistart_distances = std::move(dist);
  return rep;
}

std::vector<AxisScan> constants_probe(const ProblemSpec& spec, const Spectrum& target,
                                      int points, double rel_span,
                                      const IntegratorSettings& cfg) {
  if (target.entries.size() < 10)
    throw ValidationError("constants probe needs at least 10 target eigenvalues");

  auto objective = [&](const ProblemSpec& s) {
    double acc = 0.0;
    for (const auto& e : target.entries) acc += std::norm(char_fn(s, e.lambda, cfg));
    return acc;
  };
  auto rebuild = [&](PiecewiseWeight w, std::array<JumpCondition, 2> j) {
    // scans may leave the strict admissibility region; relaxed keeps them legal
    return ProblemSpec::validated(w, spec.potentials(), j, ValidationMode::relaxed);
  };

  struct Axis {
    std::string name;
    double truth;
  };
  const std::vector<Axis> axes = {
      {"alpha", spec.weight().alpha},   {"beta", spec.weight().beta},
      {"alpha1", spec.jump(0).alpha},   {"alpha2", spec.jump(1).alpha},
      {"gamma1", spec.jump(0).gamma},   {"gamma2", spec.jump(1).gamma},
  };

  std::vector<AxisScan> out;
  for (const auto& ax : axes) {
    AxisScan scan;
    scan.axis = ax.name;
    scan.degenerate = points <= 1;
    const double span = ax.truth != 0.0 ? rel_span * std::abs(ax.truth) : rel_span;
    const int m = std::max(points, 1);
    for (int i = 0; i < m; ++i) {
      const double off =
          m == 1 ? 0.0 : -span + 2.0 * span * static_cast<double>(i) / (m - 1);
      const double val = ax.truth + off;
      PiecewiseWeight w = spec.weight();
      std::array<JumpCondition, 2> j = spec.jumps();
      if (ax.name == "alpha") w.alpha = val;
      else if (ax.name == "beta") w.beta = val;
      else if (ax.name == "alpha1") j[0].alpha = val;
      else if (ax.name == "alpha2") j[1].alpha = val;
      else if (ax.name == "gamma1") j[0].gamma = val;
      else if (ax.name == "gamma2") j[1].gamma = val;
      scan.offsets.push_back(off);
      scan.objective.push_back(objective(rebuild(w, j)));
    }
    if (!scan.degenerate) {
      const auto it = std::min_element(scan.objective.begin(), scan.objective.end());
      const auto idx = static_cast<size_t>(it - scan.objective.begin());
      scan.min_at_truth = idx == static_cast<size_t>((m - 1) / 2) && idx > 0 && idx + 1 < scan.objective.size();
      if (ax.truth == 0.0) {
        bool sym = true;
        for (size_t i = 0; i < scan.objective.size(); ++i) {
          const double a = scan.objective[i];
          const double b = scan.objective[scan.objective.size() - 1 - i];
          if (std::abs(a - b) > 1e-6 * (std::abs(a) + std::abs(b) + 1e-30)) sym = false;
        }
        scan.symmetric_about_zero = sym;
      }
    }
    out.push_back(std::move(scan));
  }
  return out;
}

}  // namespace pencil
