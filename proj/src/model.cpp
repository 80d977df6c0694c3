#include "ehsched/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ehsched {

namespace {

void require_shape(const Eigen::MatrixXd& time_alloc, const Eigen::VectorXd& powers,
                   std::span<const UserChannel> users) {
  if (time_alloc.cols() != powers.size() ||
      time_alloc.rows() != static_cast<Eigen::Index>(users.size())) {
    std::ostringstream os;
    os << "time allocation is " << time_alloc.rows() << "x" << time_alloc.cols()
       << " but instance has " << users.size() << " users and " << powers.size() << " slots";
    throw ShapeError(os.str());
  }
}

}  // namespace

SystemParams::SystemParams(double bandwidth_hz, double noise_density)
    : bandwidth_hz_(bandwidth_hz), noise_density_(noise_density) {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw DomainError("bandwidth must be positive and finite");
  }
  if (!(noise_density > 0.0) || !std::isfinite(noise_density)) {
    throw DomainError("noise density must be positive and finite");
  }
}

UserChannel::UserChannel(double path_loss_db, const SystemParams& params)
    : path_loss_db_(path_loss_db),
      gain_(std::pow(10.0, -path_loss_db / 10.0)),
      norm_gain_(gain_ / params.noise_power()) {
  if (!std::isfinite(path_loss_db)) {
    throw DomainError("path loss must be finite");
  }
  if (!(gain_ > 0.0) || !(norm_gain_ > 0.0) || !std::isfinite(norm_gain_)) {
    throw SetupError("path loss of " + std::to_string(path_loss_db) +
                     " dB gives a zero or non-finite channel gain");
  }
}

std::vector<UserChannel> make_users(std::span<const double> path_losses_db,
                                    const SystemParams& params) {
  std::vector<UserChannel> users;
  users.reserve(path_losses_db.size());
  for (double pl : path_losses_db) users.emplace_back(pl, params);
  return users;
}

EnergyProfile::EnergyProfile(std::vector<double> slot_lengths, std::vector<double> harvests) {
  if (slot_lengths.empty()) throw DomainError("energy profile needs at least one slot");
  if (slot_lengths.size() != harvests.size()) {
    throw ShapeError("got " + std::to_string(slot_lengths.size()) + " slot lengths but " +
                     std::to_string(harvests.size()) + " harvests");
  }
  bool any_energy = false;
  for (std::size_t t = 0; t < slot_lengths.size(); ++t) {
    if (!(slot_lengths[t] > 0.0) || !std::isfinite(slot_lengths[t])) {
      throw DomainError("slot " + std::to_string(t + 1) + " has non-positive length");
    }
    if (!(harvests[t] >= 0.0) || !std::isfinite(harvests[t])) {
      throw DomainError("slot " + std::to_string(t + 1) + " has negative harvest");
    }
    any_energy = any_energy || harvests[t] > 0.0;
  }
  if (!any_energy) throw DomainError("energy profile harvests no energy");
  slot_lengths_ = Eigen::Map<const Eigen::VectorXd>(slot_lengths.data(),
                                                    static_cast<Eigen::Index>(slot_lengths.size()));
  harvests_ = Eigen::Map<const Eigen::VectorXd>(harvests.data(),
                                                static_cast<Eigen::Index>(harvests.size()));
}

Eigen::VectorXd EnergyProfile::cumulative_energy() const {
  Eigen::VectorXd cum(harvests_.size());
  double acc = 0.0;
  for (Eigen::Index t = 0; t < harvests_.size(); ++t) {
    acc += harvests_[t];
    cum[t] = acc;
  }
  return cum;
}

double slot_rate(double norm_gain, double power, const SystemParams& params) {
  if (norm_gain < 0.0 || power < 0.0) throw DomainError("slot_rate needs L >= 0 and p >= 0");
  return params.bandwidth_hz() * std::log1p(norm_gain * power) / kLn2;
}

double slot_rate_derivative(double norm_gain, double power, const SystemParams& params) {
  return params.bandwidth_hz() * norm_gain / ((1.0 + norm_gain * power) * kLn2);
}

double slot_rate_second_derivative(double norm_gain, double power, const SystemParams& params) {
  const double d = 1.0 + norm_gain * power;
  return -params.bandwidth_hz() * norm_gain * norm_gain / (d * d * kLn2);
}

Eigen::MatrixXd rate_matrix(std::span<const UserChannel> users, const Eigen::VectorXd& powers,
                            const SystemParams& params) {
  Eigen::MatrixXd rates(static_cast<Eigen::Index>(users.size()), powers.size());
  for (Eigen::Index n = 0; n < rates.rows(); ++n) {
    for (Eigen::Index t = 0; t < rates.cols(); ++t) {
      rates(n, t) = slot_rate(users[static_cast<std::size_t>(n)].norm_gain(), powers[t], params);
    }
  }
  return rates;
}

Eigen::VectorXd user_bits(const Eigen::MatrixXd& time_alloc, const Eigen::VectorXd& powers,
                          std::span<const UserChannel> users, const SystemParams& params) {
  require_shape(time_alloc, powers, users);
  return time_alloc.cwiseProduct(rate_matrix(users, powers, params)).rowwise().sum();
}

Schedule::Schedule(Eigen::VectorXd powers, Eigen::MatrixXd time_alloc,
                   std::span<const UserChannel> users, const SystemParams& params)
    : powers_(std::move(powers)), time_alloc_(std::move(time_alloc)) {
  require_shape(time_alloc_, powers_, users);
  // Negative powers are kept so check_feasible can report them; the bits
  // are then undefined and utility() treats the schedule as degenerate.
  if ((powers_.array() < 0.0).any()) {
    user_bits_ = Eigen::VectorXd::Constant(time_alloc_.rows(), std::numeric_limits<double>::quiet_NaN());
    return;
  }
  user_bits_ = ehsched::user_bits(time_alloc_, powers_, users, params);
}

double SolverOptions::effective_epsilon(const EnergyProfile& profile) const {
  return epsilon_time.value_or(1e-6 * profile.frame_length());
}

void SolverOptions::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(std::string("solver option ") + name + " must be positive");
  };
  if (epsilon_time) positive(*epsilon_time, "epsilon_time");
  positive(time_sum_tol, "time_sum_tol");
  positive(energy_tol, "energy_tol");
  positive(utility_tol, "utility_tol");
  positive(var_tol, "var_tol");
  positive(barrier_initial_weight, "barrier_initial_weight");
  positive(barrier_stop, "barrier_stop");
  positive(inner_tol, "inner_tol");
  positive(kkt_tol, "kkt_tol");
  positive(waterfill_tol, "waterfill_tol");
  positive(certificate_tol, "certificate_tol");
  if (!(barrier_growth > 1.0)) throw DomainError("solver option barrier_growth must exceed 1");
  if (max_bcd_iters < 1 || max_inner_iters < 1 || max_outer_rounds < 1) {
    throw DomainError("iteration limits must be at least 1");
  }
}

double utility(const Eigen::MatrixXd& time_alloc, const Eigen::VectorXd& powers,
               std::span<const UserChannel> users, const SystemParams& params) {
  const Eigen::VectorXd bits = user_bits(time_alloc, powers, users, params);
  double u = 0.0;
  for (Eigen::Index n = 0; n < bits.size(); ++n) {
    if (!(bits[n] > 0.0)) {
      throw DegenerateScheduleError("user " + std::to_string(n + 1) +
                                    " receives no bits; utility is -inf");
    }
    u += std::log2(bits[n]);
  }
  return u;
}

double utility(const Schedule& sched) {
  const auto& bits = sched.user_bits();
  double u = 0.0;
  for (Eigen::Index n = 0; n < bits.size(); ++n) {
    if (!(bits[n] > 0.0)) {
      throw DegenerateScheduleError("user " + std::to_string(n + 1) +
                                    " receives no bits; utility is -inf");
    }
    u += std::log2(bits[n]);
  }
  return u;
}

Eigen::VectorXd utility_gradient_power(const Eigen::MatrixXd& time_alloc,
                                       const Eigen::VectorXd& powers,
                                       std::span<const UserChannel> users,
                                       const SystemParams& params) {
  const Eigen::VectorXd bits = user_bits(time_alloc, powers, users, params);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(powers.size());
  for (Eigen::Index n = 0; n < time_alloc.rows(); ++n) {
    const double ln = users[static_cast<std::size_t>(n)].norm_gain();
    for (Eigen::Index t = 0; t < powers.size(); ++t) {
      if (time_alloc(n, t) == 0.0) continue;
      grad[t] += time_alloc(n, t) * slot_rate_derivative(ln, powers[t], params) / (bits[n] * kLn2);
    }
  }
  return grad;
}

Eigen::MatrixXd utility_gradient_time(const Eigen::MatrixXd& time_alloc,
                                      const Eigen::VectorXd& powers,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params) {
  const Eigen::MatrixXd rates = rate_matrix(users, powers, params);
  require_shape(time_alloc, powers, users);
  const Eigen::VectorXd bits = time_alloc.cwiseProduct(rates).rowwise().sum();
  Eigen::MatrixXd grad(rates.rows(), rates.cols());
  for (Eigen::Index n = 0; n < rates.rows(); ++n) {
    grad.row(n) = rates.row(n) / (bits[n] * kLn2);
  }
  return grad;
}

Eigen::MatrixXd utility_hessian_power(const Eigen::MatrixXd& time_alloc,
                                      const Eigen::VectorXd& powers,
                                      std::span<const UserChannel> users,
                                      const SystemParams& params) {
  const Eigen::VectorXd bits = user_bits(time_alloc, powers, users, params);
  const Eigen::Index k = powers.size();
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd g(k);
  for (Eigen::Index n = 0; n < time_alloc.rows(); ++n) {
    const double ln = users[static_cast<std::size_t>(n)].norm_gain();
    for (Eigen::Index t = 0; t < k; ++t) {
      g[t] = time_alloc(n, t) * slot_rate_derivative(ln, powers[t], params);
      hess(t, t) += time_alloc(n, t) * slot_rate_second_derivative(ln, powers[t], params) /
                    (bits[n] * kLn2);
    }
    hess.noalias() -= g * g.transpose() / (bits[n] * bits[n] * kLn2);
  }
  return hess;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kNonnegativeTime: return "nonnegative-time";
    case ConstraintKind::kNonnegativePower: return "nonnegative-power";
    case ConstraintKind::kSlotBudget: return "slot-budget";
    case ConstraintKind::kMinUserTime: return "min-user-time";
    case ConstraintKind::kEnergyCausality: return "energy-causality";
  }
  return "unknown";
}

std::string FeasibilityReport::describe() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << to_string(v.kind);
    switch (v.kind) {
      case ConstraintKind::kNonnegativeTime:
        os << " user " << v.user + 1 << " slot " << v.slot + 1;
        break;
      case ConstraintKind::kMinUserTime:
        os << " user " << v.user + 1;
        break;
      default:
        os << " slot " << v.slot + 1;
    }
    os << " slack " << v.slack << '\n';
  }
  return os.str();
}

FeasibilityReport check_feasible(const Schedule& sched, const EnergyProfile& profile,
                                 const SolverOptions& opts) {
  const auto& p = sched.powers();
  const auto& tau = sched.time_alloc();
  if (p.size() != static_cast<Eigen::Index>(profile.slots())) {
    throw ShapeError("schedule has " + std::to_string(p.size()) + " slots, profile has " +
                     std::to_string(profile.slots()));
  }
  const auto& T = profile.slot_lengths();
  const auto& E = profile.harvests();
  FeasibilityReport report;
  auto& out = report.violations;

  for (Eigen::Index t = 0; t < p.size(); ++t) {
    const auto ts = static_cast<std::size_t>(t);
    if (p[t] < 0.0) out.push_back({ConstraintKind::kNonnegativePower, ts, 0, p[t]});
    for (Eigen::Index n = 0; n < tau.rows(); ++n) {
      if (tau(n, t) < 0.0) {
        out.push_back({ConstraintKind::kNonnegativeTime, ts, static_cast<std::size_t>(n), tau(n, t)});
      }
    }
  }
  for (Eigen::Index t = 0; t < p.size(); ++t) {
    const double gap = T[t] - tau.col(t).sum();
    if (std::abs(gap) > opts.time_sum_tol) {
      out.push_back({ConstraintKind::kSlotBudget, static_cast<std::size_t>(t), 0, -std::abs(gap)});
    }
  }
  const double eps = opts.effective_epsilon(profile);
  for (Eigen::Index n = 0; n < tau.rows(); ++n) {
    const double slack = tau.row(n).sum() - eps;
    if (slack < 0.0) {
      out.push_back({ConstraintKind::kMinUserTime, 0, static_cast<std::size_t>(n), slack});
    }
  }
  double spent = 0.0;
  double harvested = 0.0;
  for (Eigen::Index t = 0; t < p.size(); ++t) {
    spent += p[t] * T[t];
    harvested += E[t];
    const double slack = harvested - spent;
    if (slack < -opts.energy_tol) {
      out.push_back({ConstraintKind::kEnergyCausality, static_cast<std::size_t>(t), 0, slack});
    }
  }
  return report;
}

}  // namespace ehsched
