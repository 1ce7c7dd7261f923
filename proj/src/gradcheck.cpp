#include "dtfdd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtfdd {

double relative_gradient_error(const std::vector<double>& analytic,
                               const std::vector<double>& numeric) {
  if (analytic.size() != numeric.size()) throw std::invalid_argument("gradient size mismatch");
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double mlp_gradient_error(const Mlp& net, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& out_grad, double h) {
  const Gradients g = net.backward(net.forward(x), out_grad);
  const std::vector<double> analytic = flatten(g.params).values;

  ParamVector p = flatten(net.params());
  std::vector<double> numeric(p.values.size());
  auto loss = [&](const ParamVector& v) {
    const Mlp probe(net.spec(), unflatten(v, net.spec()));
    return (probe.predict_batch(x).array() * out_grad.array()).sum();
  };
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double keep = p.values[i];
    p.values[i] = keep + h;
    const double up = loss(p);
    p.values[i] = keep - h;
    const double down = loss(p);
    p.values[i] = keep;
    numeric[i] = (up - down) / (2.0 * h);
  }
  return relative_gradient_error(analytic, numeric);
}

double actor_objective_gradient_error(const WddpgAgent& agent,
                                      const std::vector<const Transition*>& batch, double h) {
  const std::vector<double> analytic = flatten(agent.actor_objective_gradient(batch)).values;
  const Mlp& critic = agent.critic();
  const MlpSpec& spec = agent.actor().spec();

  ParamVector p = flatten(agent.actor().params());
  auto objective = [&](const ParamVector& v) {
    const Mlp actor(spec, unflatten(v, spec));
    double total = 0.0;
    for (const Transition* t : batch) {
      const Embedding proto = to_unit_cube(actor.predict(t->s));
      total += critic.predict(critic_input(t->s, proto))(0);
    }
    return total / static_cast<double>(batch.size());
  };
  std::vector<double> numeric(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double keep = p.values[i];
    p.values[i] = keep + h;
    const double up = objective(p);
    p.values[i] = keep - h;
    const double down = objective(p);
    p.values[i] = keep;
    numeric[i] = (up - down) / (2.0 * h);
  }
  return relative_gradient_error(analytic, numeric);
}

}  // namespace dtfdd
