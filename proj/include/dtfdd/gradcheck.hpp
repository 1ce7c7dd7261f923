#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dtfdd/agent.hpp"
#include "dtfdd/mlp.hpp"

namespace dtfdd {

/// max_i |analytic_i - numeric_i| / max(|analytic|_inf, |numeric|_inf).
double relative_gradient_error(const std::vector<double>& analytic,
                               const std::vector<double>& numeric);

/// Backward pass of L = sum(out_grad .* f(x)) against central differences
/// with step h, over all parameters.
double mlp_gradient_error(const Mlp& net, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& out_grad, double h = 1e-6);

/// actor_objective_gradient against central differences of
/// J = mean_i Q(s_i, proto(s_i)) in the actor parameters.
double actor_objective_gradient_error(const WddpgAgent& agent,
                                      const std::vector<const Transition*>& batch,
                                      double h = 1e-6);

}  // namespace dtfdd
