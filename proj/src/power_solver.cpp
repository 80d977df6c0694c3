#include "ehsched/power_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ehsched/nnls.hpp"

namespace ehsched {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Power block restricted to the slots that can carry energy. Slots before
// the first harvest (cumulative energy 0) are pinned at p = 0.
class PowerProblem {
 public:
  PowerProblem(const Eigen::MatrixXd& tau, const EnergyProfile& profile,
               std::span<const UserChannel> users, const SystemParams& params)
      : tau_(tau), users_(users), params_(params),
        T_(profile.slot_lengths()), cum_e_(profile.cumulative_energy()) {
    first_free_ = 0;
    while (first_free_ < cum_e_.size() && cum_e_[first_free_] <= 0.0) ++first_free_;
  }

  Eigen::Index slots() const { return T_.size(); }
  Eigen::Index first_free() const { return first_free_; }
  Eigen::Index free_count() const { return T_.size() - first_free_; }
  const Eigen::VectorXd& slot_lengths() const { return T_; }
  const Eigen::VectorXd& cumulative_energy() const { return cum_e_; }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(slots());
    p.tail(free_count()) = x;
    return p;
  }

  // s_j = cumE_j - sum_{i<=j} p_i T_i for the free constraints j.
  Eigen::VectorXd slacks(const Eigen::VectorXd& x) const {
    Eigen::VectorXd s(free_count());
    double spent = 0.0;
    for (Eigen::Index j = 0; j < free_count(); ++j) {
      spent += x[j] * T_[first_free_ + j];
      s[j] = cum_e_[first_free_ + j] - spent;
    }
    return s;
  }

  double utility_at(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd bits = user_bits(tau_, expand(x), users_, params_);
    double u = 0.0;
    for (Eigen::Index n = 0; n < bits.size(); ++n) {
      if (!(bits[n] > 0.0)) return kNegInf;
      u += std::log2(bits[n]);
    }
    return u;
  }

  Eigen::VectorXd utility_gradient(const Eigen::VectorXd& x) const {
    return utility_gradient_power(tau_, expand(x), users_, params_).tail(free_count());
  }

  Eigen::MatrixXd utility_hessian(const Eigen::VectorXd& x) const {
    return utility_hessian_power(tau_, expand(x), users_, params_)
        .bottomRightCorner(free_count(), free_count());
  }

  bool strictly_feasible(const Eigen::VectorXd& x) const {
    return (x.array() > 0.0).all() && (slacks(x).array() > 0.0).all();
  }

  double barrier_value(const Eigen::VectorXd& x, double mu) const {
    if (!strictly_feasible(x)) return kNegInf;
    const double u = utility_at(x);
    if (u == kNegInf) return kNegInf;
    return u + mu * (slacks(x).array().log().sum() + x.array().log().sum());
  }

  void barrier_derivatives(const Eigen::VectorXd& x, double mu, Eigen::VectorXd& grad,
                           Eigen::MatrixXd& hess) const {
    const Eigen::Index m = free_count();
    grad = utility_gradient(x);
    hess = utility_hessian(x);
    const Eigen::VectorXd s = slacks(x);
    for (Eigen::Index i = 0; i < m; ++i) {
      grad[i] += mu / x[i];
      hess(i, i) -= mu / (x[i] * x[i]);
    }
    // Constraint j couples free slots 0..j with normal T_i.
    Eigen::VectorXd normal = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      normal[j] = T_[first_free_ + j];
      const auto head = normal.head(j + 1);
      grad.head(j + 1) -= (mu / s[j]) * head;
      hess.topLeftCorner(j + 1, j + 1).noalias() -= (mu / (s[j] * s[j])) * head * head.transpose();
    }
  }

 private:
  const Eigen::MatrixXd& tau_;
  std::span<const UserChannel> users_;
  const SystemParams& params_;
  Eigen::VectorXd T_;
  Eigen::VectorXd cum_e_;
  Eigen::Index first_free_ = 0;
};

Eigen::VectorXd interior_start(const PowerProblem& prob, const EnergyProfile& profile) {
  const Eigen::Index m = prob.free_count();
  const Eigen::Index k0 = prob.first_free();
  const auto& T = prob.slot_lengths();
  const auto& E = profile.harvests();
  Eigen::VectorXd sg(m);
  for (Eigen::Index i = 0; i < m; ++i) sg[i] = E[k0 + i] / T[k0 + i];
  if ((sg.array() > 0.0).all()) return 0.5 * sg;

  // Some harvest is zero: SG sits on the boundary p_t = 0. Blend with the
  // largest constant power that respects every cumulative constraint.
  double q = std::numeric_limits<double>::infinity();
  double cum_t = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cum_t += T[k0 + j];
    q = std::min(q, prob.cumulative_energy()[k0 + j] / cum_t);
  }
  return 0.5 * sg + Eigen::VectorXd::Constant(m, 0.25 * q);
}

struct CenteringResult {
  int iterations = 0;
  bool converged = false;
};

// Damped Newton ascent on the barrier objective at fixed mu.
CenteringResult center(const PowerProblem& prob, Eigen::VectorXd& x, double mu,
                       const SolverOptions& opts) {
  CenteringResult res;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (; res.iterations < opts.max_inner_iters; ++res.iterations) {
    prob.barrier_derivatives(x, mu, grad, hess);
    Eigen::VectorXd dir;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
    bool newton_ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (newton_ok) {
      dir = ldlt.solve(grad);
      newton_ok = dir.allFinite() && grad.dot(dir) > 0.0;
    }
    if (!newton_ok) dir = grad;  // steepest ascent fallback
    const double slope = grad.dot(dir);
    if (newton_ok && 0.5 * slope <= opts.inner_tol) {
      res.converged = true;
      break;
    }
    if (!(slope > 0.0)) {
      res.converged = true;
      break;
    }

    const double f0 = prob.barrier_value(x, mu);
    double step = 1.0;
    while (step > 1e-300 && !prob.strictly_feasible(x + step * dir)) step *= 0.5;
    bool moved = false;
    for (int bt = 0; bt < 200; ++bt) {
      const Eigen::VectorXd trial = x + step * dir;
      const double f1 = prob.barrier_value(trial, mu);
      if (f1 >= f0 + kArmijo * step * slope) {
        moved = (trial - x).cwiseAbs().maxCoeff() > 0.0;
        x = trial;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No representable ascent left; the iterate is centered to rounding.
      res.converged = true;
      break;
    }
  }
  return res;
}

struct FaceSolve {
  bool ok = false;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // one per active energy row
};

// Equality-constrained Newton on the face where the given energy rows are
// tight and the pinned slots are zero.
FaceSolve solve_face(const PowerProblem& prob, const Eigen::VectorXd& start,
                     const std::vector<Eigen::Index>& energy_rows,
                     const std::vector<bool>& pinned) {
  const Eigen::Index m = prob.free_count();
  const Eigen::Index k0 = prob.first_free();
  const auto& T = prob.slot_lengths();
  const auto& cum_e = prob.cumulative_energy();

  std::vector<Eigen::Index> vars;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) vars.push_back(i);
  }
  const auto nv = static_cast<Eigen::Index>(vars.size());
  const auto na = static_cast<Eigen::Index>(energy_rows.size());
  FaceSolve out;
  if (nv == 0) return out;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(na, nv);
  Eigen::VectorXd b(na);
  for (Eigen::Index r = 0; r < na; ++r) {
    const Eigen::Index j = energy_rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < nv; ++c) {
      const Eigen::Index v = vars[static_cast<std::size_t>(c)];
      if (v <= j) a(r, c) = T[k0 + v];
    }
    b[r] = cum_e[k0 + j];
  }

  Eigen::VectorXd y = start;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    if (pinned[i]) y[static_cast<Eigen::Index>(i)] = 0.0;
  }
  out.lambda = Eigen::VectorXd::Zero(na);
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd g_full = prob.utility_gradient(y);
    const Eigen::MatrixXd h_full = prob.utility_hessian(y);
    Eigen::VectorXd g(nv);
    Eigen::VectorXd z(nv);
    Eigen::MatrixXd h(nv, nv);
    for (Eigen::Index r = 0; r < nv; ++r) {
      const Eigen::Index vr = vars[static_cast<std::size_t>(r)];
      g[r] = g_full[vr];
      z[r] = y[vr];
      for (Eigen::Index c = 0; c < nv; ++c) h(r, c) = h_full(vr, vars[static_cast<std::size_t>(c)]);
    }

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + na, nv + na);
    kkt.topLeftCorner(nv, nv) = -h;
    kkt.topRightCorner(nv, na) = a.transpose();
    kkt.bottomLeftCorner(na, nv) = a;
    Eigen::VectorXd rhs(nv + na);
    rhs.head(nv) = g;
    rhs.tail(na) = b - a * z;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return out;
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) return out;
    const Eigen::VectorXd d = sol.head(nv);
    out.lambda = sol.tail(na);

    double step = 1.0;
    while (step > 1e-12 && ((z + step * d).array() <= 0.0).any()) step *= 0.5;
    if (step <= 1e-12) return out;
    for (Eigen::Index c = 0; c < nv; ++c) y[vars[static_cast<std::size_t>(c)]] = z[c] + step * d[c];
    if (step == 1.0 && d.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + z.cwiseAbs().maxCoeff())) break;
  }
  out.ok = true;
  out.x = y;
  return out;
}

// Primal active-set refinement seeded by the barrier iterate: solve on the
// guessed face, then add the most violated energy row or drop the most
// negative multiplier until the face solution is a KKT point. Leaves x
// untouched on failure.
bool polish(const PowerProblem& prob, Eigen::VectorXd& x, double mu) {
  const Eigen::Index m = prob.free_count();
  const Eigen::VectorXd s = prob.slacks(x);
  const double scale = std::max(1.0, prob.cumulative_energy()[prob.cumulative_energy().size() - 1]);

  std::vector<bool> active(static_cast<std::size_t>(m), false);
  std::vector<bool> pinned(static_cast<std::size_t>(m), false);
  for (Eigen::Index j = 0; j < m; ++j) {
    active[static_cast<std::size_t>(j)] = mu / s[j] > s[j];
    pinned[static_cast<std::size_t>(j)] = mu / x[j] > x[j];
  }
  const double u_before = prob.utility_at(x);

  for (Eigen::Index round = 0; round < 4 * m + 4; ++round) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (active[static_cast<std::size_t>(j)]) rows.push_back(j);
    }
    const FaceSolve face = solve_face(prob, x, rows, pinned);
    if (!face.ok) return false;

    const Eigen::VectorXd fs = prob.slacks(face.x);
    Eigen::Index worst = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!active[static_cast<std::size_t>(j)] && fs[j] < -1e-12 * scale &&
          (worst < 0 || fs[j] < fs[worst])) {
        worst = j;
      }
    }
    if (worst >= 0) {
      active[static_cast<std::size_t>(worst)] = true;
      continue;
    }
    Eigen::Index negative = -1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      if (face.lambda[ri] < -1e-12 && (negative < 0 || face.lambda[ri] < face.lambda[negative])) {
        negative = ri;
      }
    }
    if (negative >= 0) {
      active[static_cast<std::size_t>(rows[static_cast<std::size_t>(negative)])] = false;
      continue;
    }
    // Pinned slots must have a nonpositive reduced gradient.
    const Eigen::VectorXd g = prob.utility_gradient(face.x);
    bool pinned_ok = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!pinned[static_cast<std::size_t>(i)]) continue;
      double price = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= i) price += face.lambda[static_cast<Eigen::Index>(r)] * prob.slot_lengths()[prob.first_free() + i];
      }
      if (g[i] - price > 1e-12) {
        pinned[static_cast<std::size_t>(i)] = false;
        pinned_ok = false;
      }
    }
    if (!pinned_ok) continue;

    const double u_after = prob.utility_at(face.x);
    if (!(u_after >= u_before - 1e-12 * std::max(1.0, std::abs(u_before)))) return false;
    x = face.x;
    return true;
  }
  return false;
}

void validate_time_allocation(const Eigen::MatrixXd& tau, const EnergyProfile& profile,
                              std::span<const UserChannel> users, const SolverOptions& opts,
                              Eigen::Index first_free) {
  const auto k = static_cast<Eigen::Index>(profile.slots());
  if (tau.cols() != k || tau.rows() != static_cast<Eigen::Index>(users.size())) {
    throw ShapeError("time allocation must be " + std::to_string(users.size()) + "x" +
                     std::to_string(k));
  }
  if (users.empty()) throw PreconditionError("power block needs at least one user");
  if ((tau.array() < 0.0).any()) throw PreconditionError("time allocation has negative entries");
  const auto& T = profile.slot_lengths();
  for (Eigen::Index t = 0; t < k; ++t) {
    if (std::abs(tau.col(t).sum() - T[t]) > opts.time_sum_tol) {
      throw PreconditionError("slot " + std::to_string(t + 1) +
                              " time shares do not sum to the slot length");
    }
  }
  const double eps = opts.effective_epsilon(profile);
  for (Eigen::Index n = 0; n < tau.rows(); ++n) {
    if (tau.row(n).sum() < eps) {
      throw PreconditionError("user " + std::to_string(n + 1) + " has less than epsilon time");
    }
    if (!(tau.row(n).tail(k - first_free).sum() > 0.0)) {
      throw PreconditionError("user " + std::to_string(n + 1) +
                              " is only served in slots before the first harvest");
    }
  }
}

}  // namespace

PowerSolution solve_power(const Eigen::MatrixXd& time_alloc, const EnergyProfile& profile,
                          std::span<const UserChannel> users, const SystemParams& params,
                          const SolverOptions& opts) {
  opts.validate();
  const PowerProblem prob(time_alloc, profile, users, params);
  validate_time_allocation(time_alloc, profile, users, opts, prob.first_free());

  PowerSolution sol;
  Eigen::VectorXd x = interior_start(prob, profile);
  const auto m = static_cast<double>(prob.free_count());
  double mu = opts.barrier_initial_weight;
  bool barrier_done = false;
  bool centered = true;
  for (; sol.barrier_rounds < opts.max_outer_rounds;) {
    const CenteringResult c = center(prob, x, mu, opts);
    sol.inner_iterations += c.iterations;
    centered = c.converged;
    ++sol.barrier_rounds;
    const double u = prob.utility_at(x);
    if (2.0 * m * mu < opts.barrier_stop * std::max(1.0, std::abs(u))) {
      barrier_done = true;
      break;
    }
    mu /= opts.barrier_growth;
  }
  sol.polished = polish(prob, x, mu);
  sol.powers = prob.expand(x);
  sol.kkt_residual = kkt_residual_power(sol.powers, time_alloc, profile, users, params);
  sol.converged = barrier_done && (centered || sol.polished) && sol.kkt_residual <= opts.kkt_tol;
  return sol;
}

namespace {

struct ActiveSystem {
  Eigen::MatrixXd normals;  // columns: active constraint normals
  std::vector<Eigen::Index> index;  // 0..K-1 energy rows, K..2K-1 nonnegativity
};

ActiveSystem active_system(const Eigen::VectorXd& p, const EnergyProfile& profile,
                           double active_tol) {
  const auto k = static_cast<Eigen::Index>(profile.slots());
  const auto& T = profile.slot_lengths();
  const Eigen::VectorXd cum_e = profile.cumulative_energy();
  std::vector<Eigen::VectorXd> cols;
  ActiveSystem sys;
  double spent = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    spent += p[j] * T[j];
    if (cum_e[j] - spent <= active_tol * std::max(1.0, cum_e[j])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
      a.head(j + 1) = T.head(j + 1);
      cols.push_back(a);
      sys.index.push_back(j);
    }
  }
  for (Eigen::Index t = 0; t < k; ++t) {
    if (p[t] <= active_tol) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(k);
      a[t] = -1.0;
      cols.push_back(a);
      sys.index.push_back(k + t);
    }
  }
  sys.normals.resize(k, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sys.normals.col(static_cast<Eigen::Index>(c)) = cols[c];
  return sys;
}

}  // namespace

double kkt_residual_power(const Eigen::VectorXd& powers, const Eigen::MatrixXd& time_alloc,
                          const EnergyProfile& profile, std::span<const UserChannel> users,
                          const SystemParams& params, double active_tol) {
  const Eigen::VectorXd grad = utility_gradient_power(time_alloc, powers, users, params);
  const ActiveSystem sys = active_system(powers, profile, active_tol);
  return nnls(sys.normals, grad).residual_norm;
}

Eigen::VectorXd kkt_multipliers_power(const Eigen::VectorXd& powers,
                                      const Eigen::MatrixXd& time_alloc,
                                      const EnergyProfile& profile,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params, double active_tol) {
  const auto k = static_cast<Eigen::Index>(profile.slots());
  const Eigen::VectorXd grad = utility_gradient_power(time_alloc, powers, users, params);
  const ActiveSystem sys = active_system(powers, profile, active_tol);
  const NnlsResult fit = nnls(sys.normals, grad);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * k);
  for (std::size_t c = 0; c < sys.index.size(); ++c) out[sys.index[c]] = fit.x[static_cast<Eigen::Index>(c)];
  return out;
}

}  // namespace ehsched
