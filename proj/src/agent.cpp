#include "actpc/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace actpc {

namespace {

constexpr std::uint64_t kMemoryStream = 0x6d656d6f7279ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

std::vector<double> half_squares(const std::vector<Vec<Real>>& errors) {
  std::vector<double> out;
  out.reserve(errors.size());
  for (const auto& e : errors) {
    double s = 0.0;
    for (Real v : e) s += static_cast<double>(v) * static_cast<double>(v);
    out.push_back(0.5 * s);
  }
  return out;
}

int episode_limit(const envs::Environment& env, int max_len) {
  return max_len > 0 ? max_len : env.spec().max_episode_len;
}

}  // namespace

std::vector<double> EpisodeLog::sparse_returns() const {
  std::vector<double> out;
  for (const auto& e : episodes) out.push_back(e.sparse_return);
  return out;
}

std::vector<double> EpisodeLog::successes() const {
  std::vector<double> out;
  for (const auto& e : episodes) out.push_back(e.success ? 1.0 : 0.0);
  return out;
}

Agent::Agent(AgentConfig cfg, envs::EnvSpec spec, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      spec_(std::move(spec)),
      seed_(seed),
      rng_(seed),
      wm_(spec_.obs_dim, cfg_.memory_window, envs::mix_seed(seed, kMemoryStream), cfg_.memory_sigma),
      replay_(cfg_.replay_capacity),
      demos_(cfg_.demo_capacity),
      actor_buffer_(cfg_.actor_capacity) {
  const std::size_t D = spec_.obs_dim, A = spec_.action_dim, md = wm_.dim();
  actor_ = circuits::ActorCircuit(cfg_.actor, D, A, spec_.action_bound, md);
  policy_ = circuits::PolicyCircuit(cfg_.policy, D, A, cfg_.discount, md);
  generator_ = circuits::GeneratorCircuit(cfg_.generator, D, A, md);
  prior_ = circuits::PriorCircuit(cfg_.prior, D, md);
  actor_.initialize(rng_);
  policy_.initialize(rng_);
  generator_.initialize(rng_);
  prior_.initialize(rng_);
  rewards_.alpha_ep = cfg_.alpha_ep;
  rewards_.alpha_in = cfg_.alpha_in;
}

std::uint64_t Agent::episode_seed(int episode) const {
  return envs::mix_seed(seed_, static_cast<std::uint64_t>(episode));
}

void Agent::load_demos(const std::vector<Episode>& episodes, bool pretrain) {
  // Working-memory vectors as the agent itself would have seen them.
  std::vector<Episode> prepared;
  std::vector<Transition> flat;
  memory::WorkingMemory wm = wm_;
  for (const auto& ep : episodes) {
    if (ep.empty()) continue;
    wm.reset();
    Episode out;
    for (auto tr : ep) {
      require_dim(tr.obs.size(), spec_.obs_dim, "demo observation");
      require_dim(tr.next_obs.size(), spec_.obs_dim, "demo next observation");
      require_dim(tr.action.size(), spec_.action_dim, "demo action");
      tr.memory = wm.vector();
      tr.next_memory = wm.advance(tr.memory, tr.obs);
      wm.push(tr.obs);
      out.push_back(tr);
      flat.push_back(std::move(tr));
    }
    prepared.push_back(std::move(out));
  }

  if (pretrain && !prior_.frozen()) {
    if (flat.empty())
      prior_.freeze();
    else
      circuits::pretrain_prior(prior_, flat, cfg_.prior_epochs);
  }

  // Demo rewards use their own maxima so the agent's running maxima start at 1.
  rewards::RewardState rs;
  rs.alpha_ep = cfg_.alpha_ep;
  rs.alpha_in = cfg_.alpha_in;
  for (auto& ep : prepared) {
    for (auto& tr : ep) {
      const double r_in = rewards::instrumental(rs, circuits::prior_infer(prior_, tr));
      double r = rewards::combine(rs, 0.0, r_in);
      if (cfg_.add_sparse_reward) r += tr.sparse_reward;
      tr.reward = static_cast<Real>(r);
      demos_.push(tr);
    }
    actor_buffer_.store_episode_filtered(ep);
  }
}

const Vec<Real>& Agent::begin_episode(envs::Environment& env, int max_len) {
  if (env.spec().obs_dim != spec_.obs_dim || env.spec().action_dim != spec_.action_dim)
    throw ShapeError("environment '" + env.spec().name + "' does not match the agent's dimensions");
  limit_ = episode_limit(env, max_len);
  if (limit_ < 1) throw std::invalid_argument("episode length limit must be >= 1");
  running_ = {};
  running_.episode = episodes_done_;
  running_.seed = episode_seed(episodes_done_);
  obs_ = env.reset(running_.seed);
  wm_.reset();
  episode_.clear();
  in_episode_ = true;
  return obs_;
}

Vec<Real> Agent::explore(Vec<Real> a) {
  const double kappa = spec_.action_bound;
  const double sigma = cfg_.exploration_sigma * kappa;
  if (sigma <= 0.0) return a;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& v : a) v = static_cast<Real>(std::clamp(static_cast<double>(v) + noise(rng_), -kappa, kappa));
  return a;
}

StepRecord Agent::step(envs::Environment& env) {
  if (!in_episode_) throw std::logic_error("Agent::step called outside an episode");

  StepRecord rec;
  rec.t = ++steps_;
  rec.episode = running_.episode;
  rec.episode_step = running_.steps + 1;

  const Vec<Real> m = wm_.vector();
  note("act");
  rec.action = explore(actor_.act(obs_, m));

  note("env_step");
  auto res = env.step(rec.action);
  Transition tr;
  tr.obs = obs_;
  tr.action = rec.action;
  tr.next_obs = std::move(res.obs);
  tr.terminal = res.terminal;
  tr.sparse_reward = static_cast<Real>(res.reward);
  tr.memory = m;
  tr.next_memory = wm_.advance(m, obs_);

  note("generator_infer");
  const auto gen_errors = circuits::generator_infer(generator_, tr);
  rec.r_ep = rewards::epistemic(rewards_, gen_errors);
  rec.tod = half_squares(gen_errors);
  for (double v : rec.tod) rec.tod_total += v;

  note("prior_infer");
  rec.r_in = rewards::instrumental(rewards_, circuits::prior_infer(prior_, tr));

  note("combine");
  rec.r_t = rewards::combine(rewards_, rec.r_ep, rec.r_in);
  if (cfg_.add_sparse_reward) rec.r_t += res.reward;
  tr.reward = static_cast<Real>(rec.r_t);
  rec.sparse_r = res.reward;
  rec.terminal = res.terminal;

  note("store");
  replay_.push(tr);

  if (steps_ > cfg_.warmup_steps) {
    rec.updated = true;
    note("sample");
    const auto batch = memory::sample_combined(replay_, cfg_.batch, tr, rng_, &demos_, cfg_.demo_fraction);

    note("update_actor");
    circuits::update_actor_coupled(actor_, policy_, batch);

    note("update_policy");
    std::vector<Vec<Real>> targets;
    targets.reserve(batch.size());
    for (const auto* b : batch) targets.push_back(circuits::compute_td_target(policy_, actor_, *b));
    circuits::update_policy(policy_, batch, targets);

    // The generator still holds the settled state from its inference above.
    note("update_generator");
    generator_.apply(generator_.core().compute_weight_updates());

    note("actor_refresh");
    circuits::actor_refresh(actor_, actor_buffer_, cfg_.batch, rng_);
  }

  note("wm_push");
  wm_.push(obs_);

  obs_ = tr.next_obs;
  episode_.push_back(std::move(tr));
  running_.steps += 1;
  running_.sparse_return += rec.sparse_r;
  running_.combined_return += rec.r_t;
  running_.r_ep_mean += rec.r_ep;
  running_.r_in_mean += rec.r_in;
  running_.tod_gen_mean += rec.tod_total;
  if (rec.terminal && rec.sparse_r > 0.0) running_.success = true;
  if (rec.terminal || running_.steps >= limit_) finish_episode();
  return rec;
}

void Agent::finish_episode() {
  note("store_episode");
  running_.stored = actor_buffer_.store_episode_filtered(episode_);
  const double n = static_cast<double>(running_.steps);
  running_.r_ep_mean /= n;
  running_.r_in_mean /= n;
  running_.tod_gen_mean /= n;
  ++episodes_done_;
  in_episode_ = false;
}

EpisodeRecord Agent::run_episode(envs::Environment& env, int max_len, const StepCallback& on_step) {
  begin_episode(env, max_len);
  while (in_episode_) {
    const auto rec = step(env);
    if (on_step) on_step(rec);
  }
  return running_;
}

EpisodeLog Agent::run(envs::Environment& env, int episodes, int max_len, const StepCallback& on_step,
                      const EpisodeCallback& on_episode) {
  if (episodes < 0) throw std::invalid_argument("episode count must be >= 0");
  EpisodeLog log;
  for (int i = 0; i < episodes; ++i) {
    log.episodes.push_back(run_episode(env, max_len, on_step));
    if (on_episode) on_episode(log.episodes.back());
  }
  return log;
}

EvalSummary evaluate(const Agent& agent, envs::Environment& env, int episodes, std::uint64_t seed, int max_len) {
  auto actor = agent.actor();
  auto wm = agent.working_memory();
  const int limit = episode_limit(env, max_len);
  EvalSummary s;
  s.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    auto obs = env.reset(envs::mix_seed(seed ^ kEvalStream, static_cast<std::uint64_t>(i)));
    wm.reset();
    double ret = 0.0;
    for (int t = 0; t < limit; ++t) {
      const auto a = actor.act(obs, wm.vector());
      auto res = env.step(a);
      ret += res.reward;
      wm.push(obs);
      obs = std::move(res.obs);
      if (res.terminal) {
        if (res.reward > 0.0) s.success_rate += 1.0;
        break;
      }
    }
    s.avg_return += ret;
  }
  if (episodes > 0) {
    s.success_rate /= episodes;
    s.avg_return /= episodes;
  }
  return s;
}

EvalSummary evaluate_random(envs::Environment& env, int episodes, std::uint64_t seed, int max_len) {
  const int limit = episode_limit(env, max_len);
  const double kappa = env.spec().action_bound;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-kappa, kappa);
  EvalSummary s;
  s.episodes = episodes;
  Vec<Real> a(env.spec().action_dim);
  for (int i = 0; i < episodes; ++i) {
    env.reset(envs::mix_seed(seed ^ kEvalStream, static_cast<std::uint64_t>(i)));
    double ret = 0.0;
    for (int t = 0; t < limit; ++t) {
      for (auto& v : a) v = static_cast<Real>(u(rng));
      const auto res = env.step(a);
      ret += res.reward;
      if (res.terminal) {
        if (res.reward > 0.0) s.success_rate += 1.0;
        break;
      }
    }
    s.avg_return += ret;
  }
  if (episodes > 0) {
    s.success_rate /= episodes;
    s.avg_return /= episodes;
  }
  return s;
}

std::vector<Episode> collect_demos(envs::Environment& env, int count, std::uint64_t seed, int max_len) {
  if (count < 0) throw std::invalid_argument("demo count must be >= 0");
  const int limit = episode_limit(env, max_len);
  const auto& spec = env.spec();
  std::vector<Episode> out;
  const long long budget = 10LL * count;
  for (long long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt >= budget)
      throw std::runtime_error("scripted expert starved: " + std::to_string(out.size()) + " of " +
                               std::to_string(count) + " successful episodes after " + std::to_string(budget) +
                               " attempts");
    auto obs = env.reset(envs::mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    Episode ep;
    bool success = false;
    for (int t = 0; t < limit; ++t) {
      Transition tr;
      tr.obs = obs;
      tr.action = envs::scripted_expert(spec.name, obs, spec.action_bound);
      auto res = env.step(tr.action);
      tr.next_obs = res.obs;
      tr.terminal = res.terminal;
      tr.sparse_reward = static_cast<Real>(res.reward);
      obs = std::move(res.obs);
      ep.push_back(std::move(tr));
      if (res.terminal) {
        success = res.reward > 0.0;
        break;
      }
    }
    if (success) out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace actpc
