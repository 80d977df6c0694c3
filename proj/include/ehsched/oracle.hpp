#pragma once

// Independent numerical references used to validate the solvers: a
// brute-force power grid with its own time-allocation routine, central
// finite differences and a random interpolation (concavity) probe.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>

#include "ehsched/model.hpp"

namespace ehsched::oracle {

struct GridResult {
  double utility = 0.0;  // best utility on the grid
  Eigen::VectorXd powers;
  Eigen::MatrixXd time_alloc;
  // Largest utility change between the best grid point and its grid
  // neighbours; the error bar attached to `utility`.
  double resolution_bound = 0.0;
  // Zoomed search around the best grid point down to step * 1e-6.
  double refined_utility = 0.0;
  Eigen::VectorXd refined_powers;
  Eigen::MatrixXd refined_time_alloc;
  long evaluated_points = 0;
};

// Enumerates p_1..p_{K-1} on the energy-feasible grid of spacing `step` (W);
// p_K spends the remaining energy. For every power vector the time
// allocation is found by cyclic per-slot water-filling (bisection on the
// water level) iterated until shares move less than 1e-8.
// Throws SizeError unless N <= 3 and K <= 3, DomainError unless step > 0.
GridResult grid_global_optimum(const EnergyProfile& profile, std::span<const UserChannel> users,
                               const SystemParams& params, double step);

// Optimal time allocation for fixed powers via the oracle's own routine.
// Returns nullopt if some user has zero rate in every slot.
std::optional<Eigen::MatrixXd> optimal_time_allocation(const EnergyProfile& profile,
                                                       std::span<const UserChannel> users,
                                                       const SystemParams& params,
                                                       const Eigen::VectorXd& powers);

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// Central differences with per-coordinate step h * max(1, |x_i|).
Eigen::VectorXd finite_diff_gradient(const ScalarField& f, const Eigen::VectorXd& x, double h);
Eigen::MatrixXd finite_diff_hessian(const ScalarField& f, const Eigen::VectorXd& x, double h);

enum class ProbeKind { kConcave, kAffine };

struct ProbeResult {
  bool passed = false;
  double worst_violation = 0.0;
  int trials = 0;
};

using DomainSampler = std::function<Eigen::VectorXd(std::mt19937_64&)>;

// Draws (x1, x2, lambda) and checks f(lambda x1 + (1-lambda) x2) against
// lambda f(x1) + (1-lambda) f(x2): >= for kConcave, == for kAffine, both to
// within `tolerance`. The sampler's domain must be convex.
ProbeResult concavity_probe(const ScalarField& f, const DomainSampler& sampler, int trials,
                            ProbeKind kind = ProbeKind::kConcave, std::uint64_t seed = 12345,
                            double tolerance = 1e-9);

}  // namespace ehsched::oracle
