#include "dtfdd/agent.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace dtfdd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::store(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t count, Rng& rng) {
  if (count > n) throw std::invalid_argument("minibatch larger than replay buffer");
  std::vector<std::size_t> out;
  out.reserve(count);
  std::unordered_set<std::size_t> taken;
  taken.reserve(count * 2);
  for (std::size_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    std::size_t t = pick(rng);
    if (!taken.insert(t).second) {
      t = j;
      taken.insert(t);
    }
    out.push_back(t);
  }
  return out;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  return sample_distinct(items_.size(), count, rng);
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  std::vector<const Transition*> out;
  out.reserve(count);
  for (std::size_t i : sample_indices(count, rng)) out.push_back(&items_[i]);
  return out;
}

const Embedding& OuNoise::step(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& x : state) x += theta * (mu - x) + sigma * gauss(rng);
  return state;
}

MlpSpec actor_spec(std::size_t n_ues, const std::vector<std::size_t>& hidden) {
  MlpSpec s;
  s.sizes.push_back(2 * n_ues);
  s.sizes.insert(s.sizes.end(), hidden.begin(), hidden.end());
  s.sizes.push_back(3);
  s.hidden = Activation::Relu;
  s.output = Activation::Tanh;
  return s;
}

MlpSpec critic_spec(std::size_t n_ues, const std::vector<std::size_t>& hidden) {
  MlpSpec s;
  s.sizes.push_back(2 * n_ues + 3);
  s.sizes.insert(s.sizes.end(), hidden.begin(), hidden.end());
  s.sizes.push_back(1);
  s.hidden = Activation::Relu;
  s.output = Activation::Identity;
  return s;
}

Embedding to_unit_cube(const Eigen::VectorXd& tanh_out) {
  Embedding p{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = 0.5 * (tanh_out(static_cast<Eigen::Index>(i)) + 1.0);
    if (!std::isfinite(v)) throw TrainingDivergence("non-finite proto-action");
    p[i] = v;
  }
  return p;
}

Eigen::VectorXd critic_input(const Eigen::VectorXd& state, const Embedding& action) {
  Eigen::VectorXd x(state.size() + 3);
  x.head(state.size()) = state;
  for (Eigen::Index i = 0; i < 3; ++i) x(state.size() + i) = action[static_cast<std::size_t>(i)];
  return x;
}

Selection wolpertinger_select(const ActionSpace& space, const Eigen::VectorXd& state,
                              const Embedding& proto, std::size_t k, const Mlp& critic) {
  const std::vector<Neighbor> cands = space.knn(proto, k);
  const Eigen::Index ns = state.size();
  Eigen::MatrixXd x(ns + 3, static_cast<Eigen::Index>(cands.size()));
  std::vector<Embedding> embs;
  embs.reserve(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const Embedding e = space.embed(cands[c].index);
    embs.push_back(e);
    const auto col = static_cast<Eigen::Index>(c);
    x.col(col).head(ns) = state;
    for (Eigen::Index i = 0; i < 3; ++i) x(ns + i, col) = e[static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd q = critic.predict_batch(x);
  // Candidates arrive in (distance, index) order, so strict > keeps the
  // nearest among equal Q-values.
  std::size_t best = 0;
  for (std::size_t c = 1; c < cands.size(); ++c) {
    if (q(0, static_cast<Eigen::Index>(c)) > q(0, static_cast<Eigen::Index>(best))) best = c;
  }
  const double qbest = q(0, static_cast<Eigen::Index>(best));
  if (!std::isfinite(qbest)) throw TrainingDivergence("non-finite Q-value");
  return {cands[best].index, embs[best], qbest};
}

WddpgAgent::WddpgAgent(std::shared_ptr<const ActionSpace> space, std::size_t n_ues,
                       AgentConfig cfg, Rng& init_rng)
    : space_(std::move(space)),
      n_ues_(n_ues),
      cfg_(std::move(cfg)),
      actor_(actor_spec(n_ues, cfg_.hidden), init_rng),
      critic_(critic_spec(n_ues, cfg_.hidden), init_rng),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(AdamState::for_params(actor_.params())),
      critic_opt_(AdamState::for_params(critic_.params())),
      buffer_(cfg_.buffer_capacity) {
  if (cfg_.k == 0) throw std::invalid_argument("k must be >= 1");
  if (cfg_.batch == 0) throw std::invalid_argument("minibatch size must be >= 1");
  noise_.theta = cfg_.ou_theta;
  noise_.sigma = cfg_.ou_sigma;
  noise_.mu = cfg_.ou_mu;
}

Embedding WddpgAgent::proto_action(const Eigen::VectorXd& state) const {
  return to_unit_cube(actor_.predict(state));
}

Embedding WddpgAgent::target_proto_action(const Eigen::VectorXd& state) const {
  return to_unit_cube(target_actor_.predict(state));
}

Selection WddpgAgent::greedy_action(const Eigen::VectorXd& state) const {
  return wolpertinger_select(*space_, state, proto_action(state), cfg_.k, critic_);
}

Selection WddpgAgent::behavioral_action(const Eigen::VectorXd& state, Rng& noise_rng) {
  Embedding proto = proto_action(state);
  const Embedding& n = noise_.step(noise_rng);
  for (std::size_t i = 0; i < 3; ++i) proto[i] += n[i];
  return wolpertinger_select(*space_, state, clamp_unit(proto), cfg_.k, critic_);
}

namespace {

Eigen::MatrixXd stack_states(const std::vector<const Transition*>& batch, bool next) {
  const Eigen::Index ns = batch.front()->s.size();
  Eigen::MatrixXd s(ns, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    s.col(static_cast<Eigen::Index>(i)) = next ? batch[i]->s_next : batch[i]->s;
  }
  return s;
}

}  // namespace

double WddpgAgent::critic_td_update(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty minibatch");
  const auto count = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index ns = static_cast<Eigen::Index>(state_size());

  // TD targets from the target actor + target critic Wolpertinger policy.
  Eigen::VectorXd y(count);
  for (Eigen::Index i = 0; i < count; ++i) y(i) = batch[static_cast<std::size_t>(i)]->r;
  if (cfg_.gamma != 0.0) {
    const Eigen::MatrixXd s_next = stack_states(batch, true);
    const Eigen::MatrixXd protos = target_actor_.predict_batch(s_next);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::VectorXd sn = s_next.col(i);
      const Selection sel = wolpertinger_select(*space_, sn, to_unit_cube(protos.col(i)),
                                                cfg_.k, target_critic_);
      y(i) += cfg_.gamma * sel.q;
    }
  }

  Eigen::MatrixXd x(ns + 3, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    x.col(i) = critic_input(batch[static_cast<std::size_t>(i)]->s,
                            batch[static_cast<std::size_t>(i)]->a);
  }
  const ForwardCache cache = critic_.forward(x);
  const Eigen::RowVectorXd err = cache.output.row(0) - y.transpose();
  const double loss = err.squaredNorm() / (2.0 * static_cast<double>(count));
  if (!std::isfinite(loss)) throw TrainingDivergence("non-finite critic loss");
  const Eigen::MatrixXd grad_out = err / static_cast<double>(count);
  const Gradients g = critic_.backward(cache, grad_out);
  adam_step(critic_.params(), g.params, critic_opt_, cfg_.critic_lr);
  return loss;
}

MlpParams WddpgAgent::actor_objective_gradient(const std::vector<const Transition*>& batch) const {
  if (batch.empty()) throw std::invalid_argument("empty minibatch");
  const auto count = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index ns = static_cast<Eigen::Index>(state_size());
  const Eigen::MatrixXd s = stack_states(batch, false);
  const ForwardCache actor_cache = actor_.forward(s);

  Eigen::MatrixXd x(ns + 3, count);
  x.topRows(ns) = s;
  x.bottomRows(3) = 0.5 * (actor_cache.output.array() + 1.0);
  const ForwardCache critic_cache = critic_.forward(x);
  const Eigen::MatrixXd dq =
      Eigen::MatrixXd::Constant(1, count, 1.0 / static_cast<double>(count));
  const Gradients cg = critic_.backward(critic_cache, dq);
  // d proto / d tanh-output = 1/2.
  const Eigen::MatrixXd d_out = 0.5 * cg.input.bottomRows(3);
  return actor_.backward(actor_cache, d_out).params;
}

void WddpgAgent::actor_update(const std::vector<const Transition*>& batch) {
  MlpParams grad = actor_objective_gradient(batch);
  for (auto& l : grad.layers) {
    l.w = -l.w;
    l.b = -l.b;
  }
  adam_step(actor_.params(), grad, actor_opt_, cfg_.actor_lr);
}

void WddpgAgent::soft_update_targets() {
  soft_update(target_critic_.params(), critic_.params(), cfg_.kappa);
  soft_update(target_actor_.params(), actor_.params(), cfg_.kappa);
}

}  // namespace dtfdd
