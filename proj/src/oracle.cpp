#include "ehsched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ehsched::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Bisection on the water level w for sum_n max(0, w - c_n/R_n) = budget.
Eigen::VectorXd bisect_column(const Eigen::VectorXd& carried, const Eigen::VectorXd& rates,
                              double budget) {
  const Eigen::Index n = rates.size();
  Eigen::VectorXd shares = Eigen::VectorXd::Zero(n);
  double hi = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rates[i] > 0.0) {
      hi = std::max(hi, carried[i] / rates[i]);
      any = true;
    }
  }
  if (!any) {
    shares[0] = budget;
    return shares;
  }
  auto fill = [&](double w) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (rates[i] > 0.0) s += std::max(0.0, w - carried[i] / rates[i]);
    }
    return s;
  };
  double lo = 0.0;
  hi += budget;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fill(mid) > budget ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rates[i] > 0.0) shares[i] = std::max(0.0, w - carried[i] / rates[i]);
  }
  shares *= budget / shares.sum();
  return shares;
}

double log_utility(const Eigen::MatrixXd& tau, const Eigen::MatrixXd& rates) {
  const Eigen::VectorXd bits = tau.cwiseProduct(rates).rowwise().sum();
  double u = 0.0;
  for (Eigen::Index n = 0; n < bits.size(); ++n) {
    if (!(bits[n] > 0.0)) return kNegInf;
    u += std::log2(bits[n]);
  }
  return u;
}

Eigen::MatrixXd direct_rates(std::span<const UserChannel> users, const Eigen::VectorXd& powers,
                             const SystemParams& params) {
  Eigen::MatrixXd r(static_cast<Eigen::Index>(users.size()), powers.size());
  for (Eigen::Index n = 0; n < r.rows(); ++n) {
    for (Eigen::Index t = 0; t < r.cols(); ++t) {
      r(n, t) = params.bandwidth_hz() *
                std::log2(1.0 + users[static_cast<std::size_t>(n)].norm_gain() * powers[t]);
    }
  }
  return r;
}

struct Evaluation {
  double utility = kNegInf;
  Eigen::VectorXd powers;
  Eigen::MatrixXd tau;
};

class GridSearch {
 public:
  GridSearch(const EnergyProfile& profile, std::span<const UserChannel> users,
             const SystemParams& params)
      : profile_(profile), users_(users), params_(params),
        T_(profile.slot_lengths()), cum_e_(profile.cumulative_energy()) {}

  // Power vector from the K-1 leading coordinates, or nullopt if infeasible.
  std::optional<Eigen::VectorXd> complete(const Eigen::VectorXd& head) const {
    const Eigen::Index k = T_.size();
    Eigen::VectorXd p(k);
    double spent = 0.0;
    for (Eigen::Index t = 0; t + 1 < k; ++t) {
      if (head[t] < 0.0) return std::nullopt;
      spent += head[t] * T_[t];
      if (spent > cum_e_[t] * (1.0 + 1e-12)) return std::nullopt;
      p[t] = head[t];
    }
    p[k - 1] = std::max(0.0, (cum_e_[k - 1] - spent) / T_[k - 1]);
    return p;
  }

  Evaluation evaluate(const Eigen::VectorXd& head) {
    ++evaluated;
    Evaluation ev;
    const auto p = complete(head);
    if (!p) return ev;
    const auto tau = optimal_time_allocation(profile_, users_, params_, *p);
    if (!tau) return ev;
    ev.utility = log_utility(*tau, direct_rates(users_, *p, params_));
    ev.powers = *p;
    ev.tau = *tau;
    return ev;
  }

  // All heads on center + step * {-r..r}^(K-1), clipped to >= 0 and, when
  // upper is set, to the per-coordinate energy cap.
  template <class Visit>
  void enumerate(const Eigen::VectorXd& center, double step, int radius, Visit&& visit) {
    const Eigen::Index dims = T_.size() - 1;
    if (dims == 0) {
      visit(Eigen::VectorXd(0));
      return;
    }
    std::vector<int> idx(static_cast<std::size_t>(dims), -radius);
    for (;;) {
      Eigen::VectorXd head(dims);
      bool ok = true;
      for (Eigen::Index d = 0; d < dims; ++d) {
        head[d] = center[d] + step * idx[static_cast<std::size_t>(d)];
        if (head[d] < -1e-15) ok = false;
        head[d] = std::max(0.0, head[d]);
      }
      if (ok) visit(head);
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] > radius) idx[d++] = -radius;
      if (d == idx.size()) break;
    }
  }

  // Full grid from 0 with spacing step.
  template <class Visit>
  void enumerate_full(double step, Visit&& visit) {
    const Eigen::Index dims = T_.size() - 1;
    if (dims == 0) {
      visit(Eigen::VectorXd(0));
      return;
    }
    std::vector<long> count(static_cast<std::size_t>(dims));
    for (Eigen::Index d = 0; d < dims; ++d) {
      count[static_cast<std::size_t>(d)] =
          static_cast<long>(std::floor(cum_e_[d] / T_[d] / step + 1e-9));
    }
    std::vector<long> idx(static_cast<std::size_t>(dims), 0);
    for (;;) {
      Eigen::VectorXd head(dims);
      for (Eigen::Index d = 0; d < dims; ++d) head[d] = step * static_cast<double>(idx[static_cast<std::size_t>(d)]);
      visit(head);
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] > count[d]) idx[d++] = 0;
      if (d == idx.size()) break;
    }
  }

  long evaluated = 0;

 private:
  const EnergyProfile& profile_;
  std::span<const UserChannel> users_;
  const SystemParams& params_;
  Eigen::VectorXd T_;
  Eigen::VectorXd cum_e_;
};

}  // namespace

std::optional<Eigen::MatrixXd> optimal_time_allocation(const EnergyProfile& profile,
                                                       std::span<const UserChannel> users,
                                                       const SystemParams& params,
                                                       const Eigen::VectorXd& powers) {
  const Eigen::MatrixXd rates = direct_rates(users, powers, params);
  for (Eigen::Index n = 0; n < rates.rows(); ++n) {
    if (!(rates.row(n).maxCoeff() > 0.0)) return std::nullopt;
  }
  const auto& T = profile.slot_lengths();
  const Eigen::Index n_users = rates.rows();
  Eigen::MatrixXd tau(n_users, rates.cols());
  for (Eigen::Index t = 0; t < tau.cols(); ++t) tau.col(t).setConstant(T[t] / static_cast<double>(n_users));

  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index t = 0; t < tau.cols(); ++t) {
      const Eigen::VectorXd total = tau.cwiseProduct(rates).rowwise().sum();
      const Eigen::VectorXd carried =
          (total - tau.col(t).cwiseProduct(rates.col(t))).cwiseMax(0.0);
      const Eigen::VectorXd col = bisect_column(carried, rates.col(t), T[t]);
      moved = std::max(moved, (col - tau.col(t)).cwiseAbs().maxCoeff());
      tau.col(t) = col;
    }
    if (moved < 1e-8) break;
  }
  return tau;
}

GridResult grid_global_optimum(const EnergyProfile& profile, std::span<const UserChannel> users,
                               const SystemParams& params, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (users.size() > 3 || profile.slots() > 3) {
    throw SizeError("grid oracle supports at most 3 users and 3 slots");
  }
  if (users.empty()) throw SizeError("grid oracle needs at least one user");

  GridSearch search(profile, users, params);
  Evaluation best;
  Eigen::VectorXd best_head;
  search.enumerate_full(step, [&](const Eigen::VectorXd& head) {
    Evaluation ev = search.evaluate(head);
    if (ev.utility > best.utility) {
      best = std::move(ev);
      best_head = head;
    }
  });
  if (best.utility == kNegInf) throw SetupError("no grid point serves every user");

  GridResult out;
  out.utility = best.utility;
  out.powers = best.powers;
  out.time_alloc = best.tau;

  search.enumerate(best_head, step, 1, [&](const Eigen::VectorXd& head) {
    const Evaluation ev = search.evaluate(head);
    if (ev.utility != kNegInf) {
      out.resolution_bound = std::max(out.resolution_bound, std::abs(ev.utility - best.utility));
    }
  });

  Evaluation refined = best;
  Eigen::VectorXd center = best_head;
  for (double s = step / 10.0; s >= step * 1e-6; s /= 10.0) {
    Eigen::VectorXd next_center = center;
    search.enumerate(center, s, 10, [&](const Eigen::VectorXd& head) {
      Evaluation ev = search.evaluate(head);
      if (ev.utility > refined.utility) {
        refined = std::move(ev);
        next_center = head;
      }
    });
    center = next_center;
  }
  out.refined_utility = refined.utility;
  out.refined_powers = refined.powers;
  out.refined_time_alloc = refined.tau;
  out.evaluated_points = search.evaluated;
  return out;
}

Eigen::VectorXd finite_diff_gradient(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = f(xp);
    xp[i] = x[i] - hi;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

Eigen::MatrixXd finite_diff_hessian(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += hi;
    xm[i] -= hi;
    hess.col(i) = (finite_diff_gradient(f, xp, h) - finite_diff_gradient(f, xm, h)) / (2.0 * hi);
  }
  return 0.5 * (hess + hess.transpose());
}

ProbeResult concavity_probe(const ScalarField& f, const DomainSampler& sampler, int trials,
                            ProbeKind kind, std::uint64_t seed, double tolerance) {
  if (trials < 1) throw DomainError("concavity probe needs at least one trial");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProbeResult res;
  res.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const Eigen::VectorXd x1 = sampler(rng);
    const Eigen::VectorXd x2 = sampler(rng);
    const double lambda = unit(rng);
    const double mid = f(lambda * x1 + (1.0 - lambda) * x2);
    const double chord = lambda * f(x1) + (1.0 - lambda) * f(x2);
    const double violation = kind == ProbeKind::kConcave ? chord - mid : std::abs(mid - chord);
    res.worst_violation = std::max(res.worst_violation, violation);
  }
  res.passed = res.worst_violation <= tolerance;
  return res;
}

}  // namespace ehsched::oracle
