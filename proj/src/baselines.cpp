#include "dtfdd/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace dtfdd {

namespace {

struct KindName {
  PolicyKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {PolicyKind::STfdd, "s_tfdd"},        {PolicyKind::MyopicDTfdd, "myopic_d_tfdd"},
    {PolicyKind::DTdd, "d_tdd"},          {PolicyKind::Iddpg, "iddpg"},
    {PolicyKind::MaddpgLite, "maddpg_lite"}, {PolicyKind::Random, "random"},
    {PolicyKind::Fwddpg, "fwddpg"},
};

std::string normalise(std::string_view text) {
  std::string s;
  for (char c : text) {
    s.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return s;
}

std::shared_ptr<const ActionSpace> cached_space(
    std::map<std::size_t, std::shared_ptr<const ActionSpace>>& cache, std::size_t n_ues,
    std::size_t n_subchannels, std::size_t n_subframes, bool frozen) {
  auto it = cache.find(n_ues);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const ActionSpace> space;
  if (frozen) {
    const FrameAction rr = round_robin_action(n_ues, n_subchannels, 0);
    space = std::make_shared<const ActionSpace>(ActionSpace::with_fixed_assignment(
        n_subchannels, n_ues, n_subframes, rr.dl, rr.ul));
  } else {
    space = std::make_shared<const ActionSpace>(n_subchannels, n_ues, n_subframes);
  }
  cache.emplace(n_ues, space);
  return space;
}

std::vector<std::shared_ptr<const ActionSpace>> build_spaces(
    const std::vector<std::size_t>& ues_per_bs, std::size_t n_subchannels,
    std::size_t n_subframes, bool frozen) {
  std::map<std::size_t, std::shared_ptr<const ActionSpace>> cache;
  std::vector<std::shared_ptr<const ActionSpace>> out;
  for (std::size_t u : ues_per_bs) {
    out.push_back(cached_space(cache, u, n_subchannels, n_subframes, frozen));
  }
  return out;
}

std::string indexed(const char* label, std::size_t b) {
  return std::string(label) + "/" + std::to_string(b);
}

}  // namespace

const char* to_string(PolicyKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view text) {
  const std::string s = normalise(text);
  for (const auto& kn : kKindNames) {
    if (s == kn.name) return kn.kind;
  }
  if (s == "myopic") return PolicyKind::MyopicDTfdd;
  if (s == "d_tfdd") return PolicyKind::Fwddpg;
  throw std::invalid_argument("unknown policy kind '" + std::string(text) + "'");
}

std::vector<PolicyKind> all_policy_kinds() {
  std::vector<PolicyKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

FrameAction round_robin_action(std::size_t n_ues, std::size_t n_subchannels, std::size_t f) {
  FrameAction a;
  a.f = f;
  a.dl.assign(n_subchannels, kNoUe);
  a.ul.assign(n_subchannels, kNoUe);
  if (n_ues == 0) return a;
  for (std::size_t n = 0; n < n_subchannels; ++n) {
    a.dl[n] = a.ul[n] = static_cast<int>(n % n_ues);
  }
  return a;
}

std::size_t default_dl_subframes(std::size_t n_subframes) {
  return static_cast<std::size_t>(std::lround(static_cast<double>(n_subframes) / 2.0));
}

std::unique_ptr<StaticController> s_tfdd_policy(const std::vector<std::size_t>& ues_per_bs,
                                                std::size_t n_subchannels,
                                                std::size_t n_subframes,
                                                std::optional<std::size_t> dl_subframes) {
  const std::size_t f = dl_subframes.value_or(default_dl_subframes(n_subframes));
  std::vector<FrameAction> actions;
  for (std::size_t b = 0; b < ues_per_bs.size(); ++b) {
    FrameAction a = round_robin_action(ues_per_bs[b], n_subchannels, f);
    if (auto v = validate(a, n_subchannels, ues_per_bs[b], n_subframes)) {
      throw std::invalid_argument("static action for BS " + std::to_string(b) + ": " +
                                  v->message);
    }
    actions.push_back(std::move(a));
  }
  return std::make_unique<StaticController>(std::move(actions));
}

// ---------------------------------------------------------------------------

RandomController::RandomController(const std::vector<std::size_t>& ues_per_bs,
                                   std::size_t n_subchannels, std::size_t n_subframes,
                                   std::uint64_t master_seed)
    : spaces_(build_spaces(ues_per_bs, n_subchannels, n_subframes, false)),
      rng_(make_stream(master_seed, "random-policy")) {}

std::vector<FrameAction> RandomController::act(const std::vector<LocalState>&) {
  std::vector<FrameAction> out;
  out.reserve(spaces_.size());
  for (const auto& sp : spaces_) {
    std::uniform_int_distribution<std::uint64_t> pick(0, sp->size() - 1);
    out.push_back(sp->decode(ActionIndex{pick(rng_)}));
  }
  return out;
}

// ---------------------------------------------------------------------------

FederatedWddpg::FederatedWddpg(const std::vector<std::size_t>& ues_per_bs,
                               std::size_t n_subchannels, std::size_t n_subframes,
                               LearnerOptions options, Eigen::MatrixXd weights,
                               std::uint64_t master_seed)
    : opt_(std::move(options)), weights_(std::move(weights)), mailbox_(ues_per_bs.size()) {
  const std::size_t n_bs = ues_per_bs.size();
  if (static_cast<std::size_t>(weights_.rows()) != n_bs ||
      static_cast<std::size_t>(weights_.cols()) != n_bs) {
    throw std::invalid_argument("weight matrix does not match the number of BSs");
  }
  const auto spaces =
      build_spaces(ues_per_bs, n_subchannels, n_subframes, opt_.frozen_assignment);
  agents_.reserve(n_bs);
  for (std::size_t b = 0; b < n_bs; ++b) {
    Rng init = make_stream(master_seed, indexed("init", b));
    agents_.emplace_back(spaces[b], ues_per_bs[b], opt_.agent, init);
    noise_rngs_.push_back(make_stream(master_seed, indexed("noise", b)));
    replay_rngs_.push_back(make_stream(master_seed, indexed("replay", b)));
  }
  last_.resize(n_bs);
}

void FederatedWddpg::begin_epoch() {
  for (auto& a : agents_) a.noise().reset();
}

std::vector<FrameAction> FederatedWddpg::act(const std::vector<LocalState>& states) {
  if (states.size() != agents_.size()) throw std::invalid_argument("one state per BS required");
  std::vector<FrameAction> out;
  out.reserve(agents_.size());
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    trace(9);
    trace(10);
    trace(11);
    last_[b] = agents_[b].behavioral_action(states[b].normalized, noise_rngs_[b]);
    out.push_back(agents_[b].space().decode(last_[b].index));
  }
  return out;
}

void FederatedWddpg::learn(const std::vector<LocalState>& states, const StepOutcome& outcome,
                           std::size_t frame) {
  const std::size_t n_bs = agents_.size();
  for (std::size_t b = 0; b < n_bs; ++b) {
    trace(14);
    trace(15);
    WddpgAgent& ag = agents_[b];
    trace(16);
    ag.buffer().store({states[b].normalized, last_[b].embedding,
                       outcome.rewards[b] * opt_.reward_scale,
                       outcome.next_states[b].normalized});
    if (ag.buffer().size() >= opt_.agent.batch) {
      trace(17);
      const auto batch = ag.buffer().sample(opt_.agent.batch, replay_rngs_[b]);
      trace(18);
      ag.critic_td_update(batch);
      trace(19);
      ag.actor_update(batch);
    }
  }

  // Critic exchange with one-hop neighbours at the frame barrier.
  if (n_bs > 1 && is_exchange_frame(frame, opt_.exchange_period)) {
    mailbox_.clear();
    std::vector<ParamVector> local;
    local.reserve(n_bs);
    for (std::size_t b = 0; b < n_bs; ++b) {
      local.push_back(flatten(agents_[b].critic().params()));
      mailbox_.publish({b, frame, local.back()});
    }
    const auto merged = exchange_and_aggregate(local, weights_, frame, opt_.exchange_period);
    for (std::size_t b = 0; b < n_bs; ++b) {
      trace(20);
      agents_[b].critic().params() = unflatten(merged[b], agents_[b].critic().spec());
    }
    ++exchanges_;
  }

  for (auto& ag : agents_) {
    trace(21);
    ag.soft_update_targets();
  }
}

void FederatedWddpg::end_epoch() {
  for (auto& a : agents_) a.end_epoch();
}

// ---------------------------------------------------------------------------

MaddpgLite::MaddpgLite(const std::vector<std::size_t>& ues_per_bs, std::size_t n_subchannels,
                       std::size_t n_subframes, LearnerOptions options,
                       std::uint64_t master_seed)
    : opt_(std::move(options)),
      spaces_(build_spaces(ues_per_bs, n_subchannels, n_subframes, opt_.frozen_assignment)),
      replay_rng_(make_stream(master_seed, "replay/0")) {
  const std::size_t n_bs = ues_per_bs.size();
  if (n_bs == 0) throw std::invalid_argument("at least one BS required");
  if (opt_.agent.k == 0 || opt_.agent.batch == 0 || opt_.agent.buffer_capacity == 0) {
    throw std::invalid_argument("k, minibatch and buffer capacity must be positive");
  }

  std::size_t total = 0;
  for (std::size_t u : ues_per_bs) {
    offsets_.push_back(total);
    total += 2 * u + 3;
  }

  // Actor 0 and the critic share BS 0's init stream, so one BS draws
  // exactly what a single WDDPG learner would.
  Rng init0 = make_stream(master_seed, "init/0");
  for (std::size_t b = 0; b < n_bs; ++b) {
    if (b == 0) {
      actors_.emplace_back(actor_spec(ues_per_bs[b], opt_.agent.hidden), init0);
    } else {
      Rng init = make_stream(master_seed, indexed("init", b));
      actors_.emplace_back(actor_spec(ues_per_bs[b], opt_.agent.hidden), init);
    }
    actor_opts_.push_back(AdamState::for_params(actors_.back().params()));
    OuNoise nz;
    nz.theta = opt_.agent.ou_theta;
    nz.sigma = opt_.agent.ou_sigma;
    nz.mu = opt_.agent.ou_mu;
    noise_.push_back(nz);
    noise_rngs_.push_back(make_stream(master_seed, indexed("noise", b)));
  }
  target_actors_ = actors_;

  MlpSpec cs;
  cs.sizes.push_back(total);
  cs.sizes.insert(cs.sizes.end(), opt_.agent.hidden.begin(), opt_.agent.hidden.end());
  cs.sizes.push_back(1);
  cs.hidden = Activation::Relu;
  cs.output = Activation::Identity;
  critic_ = Mlp(cs, init0);
  target_critic_ = critic_;
  critic_opt_ = AdamState::for_params(critic_.params());
  last_.resize(n_bs);
}

void MaddpgLite::begin_epoch() {
  for (auto& n : noise_) n.reset();
}

MaddpgLite::Choice MaddpgLite::refine(const std::vector<Eigen::VectorXd>& states,
                                      std::vector<Embedding> protos, const Mlp& critic) const {
  const std::size_t n_bs = spaces_.size();
  const auto width = static_cast<Eigen::Index>(critic_input_size());
  Eigen::VectorXd base(width);
  for (std::size_t b = 0; b < n_bs; ++b) {
    const auto off = static_cast<Eigen::Index>(offsets_[b]);
    base.segment(off, states[b].size()) = states[b];
  }
  Choice ch;
  ch.embeddings = protos;
  ch.indices.resize(n_bs);
  for (std::size_t b = 0; b < n_bs; ++b) {
    for (std::size_t c = 0; c < n_bs; ++c) {
      const auto at = static_cast<Eigen::Index>(offsets_[c]) + states[c].size();
      for (Eigen::Index i = 0; i < 3; ++i) base(at + i) = ch.embeddings[c][static_cast<std::size_t>(i)];
    }
    const std::vector<Neighbor> cands = spaces_[b]->knn(protos[b], opt_.agent.k);
    const auto at = static_cast<Eigen::Index>(offsets_[b]) + states[b].size();
    Eigen::MatrixXd x(width, static_cast<Eigen::Index>(cands.size()));
    std::vector<Embedding> embs;
    embs.reserve(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const Embedding e = spaces_[b]->embed(cands[c].index);
      embs.push_back(e);
      const auto col = static_cast<Eigen::Index>(c);
      x.col(col) = base;
      for (Eigen::Index i = 0; i < 3; ++i) x(at + i, col) = e[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd q = critic.predict_batch(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < cands.size(); ++c) {
      if (q(0, static_cast<Eigen::Index>(c)) > q(0, static_cast<Eigen::Index>(best))) best = c;
    }
    ch.q = q(0, static_cast<Eigen::Index>(best));
    if (!std::isfinite(ch.q)) throw TrainingDivergence("non-finite Q-value");
    ch.embeddings[b] = embs[best];
    ch.indices[b] = cands[best].index;
  }
  return ch;
}

std::vector<FrameAction> MaddpgLite::act(const std::vector<LocalState>& states) {
  const std::size_t n_bs = spaces_.size();
  if (states.size() != n_bs) throw std::invalid_argument("one state per BS required");
  std::vector<Eigen::VectorXd> s;
  std::vector<Embedding> protos;
  for (std::size_t b = 0; b < n_bs; ++b) {
    trace(9);
    trace(10);
    s.push_back(states[b].normalized);
    Embedding p = to_unit_cube(actors_[b].predict(s.back()));
    const Embedding& n = noise_[b].step(noise_rngs_[b]);
    for (std::size_t i = 0; i < 3; ++i) p[i] += n[i];
    protos.push_back(clamp_unit(p));
  }
  trace(11);
  const Choice ch = refine(s, std::move(protos), critic_);
  last_ = ch.embeddings;
  std::vector<FrameAction> out;
  for (std::size_t b = 0; b < n_bs; ++b) out.push_back(spaces_[b]->decode(ch.indices[b]));
  return out;
}

double MaddpgLite::critic_update(const std::vector<const JointTransition*>& batch) {
  const std::size_t n_bs = spaces_.size();
  const auto count = static_cast<Eigen::Index>(batch.size());
  Eigen::VectorXd y(count);
  for (Eigen::Index i = 0; i < count; ++i) y(i) = batch[static_cast<std::size_t>(i)]->r;
  if (opt_.agent.gamma != 0.0) {
    std::vector<Eigen::MatrixXd> next_protos;
    for (std::size_t b = 0; b < n_bs; ++b) {
      Eigen::MatrixXd sn(batch.front()->s_next[b].size(), count);
      for (Eigen::Index i = 0; i < count; ++i) sn.col(i) = batch[static_cast<std::size_t>(i)]->s_next[b];
      next_protos.push_back(target_actors_[b].predict_batch(sn));
    }
    for (Eigen::Index i = 0; i < count; ++i) {
      std::vector<Embedding> protos;
      for (std::size_t b = 0; b < n_bs; ++b) protos.push_back(to_unit_cube(next_protos[b].col(i)));
      const Choice ch = refine(batch[static_cast<std::size_t>(i)]->s_next, std::move(protos),
                               target_critic_);
      y(i) += opt_.agent.gamma * ch.q;
    }
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(critic_input_size()), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const JointTransition& t = *batch[static_cast<std::size_t>(i)];
    for (std::size_t b = 0; b < n_bs; ++b) {
      const auto off = static_cast<Eigen::Index>(offsets_[b]);
      x.col(i).segment(off, t.s[b].size() + 3) = critic_input(t.s[b], t.a[b]);
    }
  }
  const ForwardCache cache = critic_.forward(x);
  const Eigen::RowVectorXd err = cache.output.row(0) - y.transpose();
  const double loss = err.squaredNorm() / (2.0 * static_cast<double>(count));
  if (!std::isfinite(loss)) throw TrainingDivergence("non-finite critic loss");
  const Eigen::MatrixXd grad_out = err / static_cast<double>(count);
  const Gradients g = critic_.backward(cache, grad_out);
  adam_step(critic_.params(), g.params, critic_opt_, opt_.agent.critic_lr);
  return loss;
}

void MaddpgLite::actor_updates(const std::vector<const JointTransition*>& batch) {
  const std::size_t n_bs = spaces_.size();
  const auto count = static_cast<Eigen::Index>(batch.size());
  std::vector<ForwardCache> caches;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(critic_input_size()), count);
  for (std::size_t b = 0; b < n_bs; ++b) {
    const Eigen::Index ns = batch.front()->s[b].size();
    Eigen::MatrixXd s(ns, count);
    for (Eigen::Index i = 0; i < count; ++i) s.col(i) = batch[static_cast<std::size_t>(i)]->s[b];
    caches.push_back(actors_[b].forward(s));
    const auto off = static_cast<Eigen::Index>(offsets_[b]);
    x.middleRows(off, ns) = s;
    x.middleRows(off + ns, 3) = 0.5 * (caches.back().output.array() + 1.0);
  }
  const ForwardCache critic_cache = critic_.forward(x);
  const Eigen::MatrixXd dq =
      Eigen::MatrixXd::Constant(1, count, 1.0 / static_cast<double>(count));
  const Gradients cg = critic_.backward(critic_cache, dq);
  for (std::size_t b = 0; b < n_bs; ++b) {
    const Eigen::Index ns = batch.front()->s[b].size();
    const auto off = static_cast<Eigen::Index>(offsets_[b]);
    const Eigen::MatrixXd d_out = 0.5 * cg.input.middleRows(off + ns, 3);
    MlpParams grad = actors_[b].backward(caches[b], d_out).params;
    for (auto& l : grad.layers) {
      l.w = -l.w;
      l.b = -l.b;
    }
    adam_step(actors_[b].params(), grad, actor_opts_[b], opt_.agent.actor_lr);
  }
}

void MaddpgLite::learn(const std::vector<LocalState>& states, const StepOutcome& outcome,
                       std::size_t) {
  const std::size_t n_bs = spaces_.size();
  trace(14);
  trace(15);
  JointTransition t;
  double global = 0.0;
  for (std::size_t b = 0; b < n_bs; ++b) {
    t.s.push_back(states[b].normalized);
    t.s_next.push_back(outcome.next_states[b].normalized);
    global += outcome.rewards[b];
  }
  t.a = last_;
  t.r = global * opt_.reward_scale;
  trace(16);
  if (buffer_.size() < opt_.agent.buffer_capacity) {
    buffer_.push_back(std::move(t));
  } else {
    buffer_[next_slot_] = std::move(t);
  }
  next_slot_ = (next_slot_ + 1) % opt_.agent.buffer_capacity;

  if (buffer_.size() >= opt_.agent.batch) {
    trace(17);
    std::vector<const JointTransition*> batch;
    for (std::size_t i : sample_distinct(buffer_.size(), opt_.agent.batch, replay_rng_)) {
      batch.push_back(&buffer_[i]);
    }
    trace(18);
    critic_update(batch);
    trace(19);
    actor_updates(batch);
  }
  trace(21);
  soft_update(target_critic_.params(), critic_.params(), opt_.agent.kappa);
  for (std::size_t b = 0; b < n_bs; ++b) {
    soft_update(target_actors_[b].params(), actors_[b].params(), opt_.agent.kappa);
  }
}

void MaddpgLite::end_epoch() {
  for (auto& n : noise_) n.sigma *= opt_.agent.ou_sigma_decay;
}

}  // namespace dtfdd
