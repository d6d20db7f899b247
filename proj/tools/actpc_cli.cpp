// actpc: train, evaluate, generate demonstrations, and emit plot data.
//
// Exit status: 0 success, 1 invalid usage or configuration, 2 run failure
// (divergence, I/O, checkpoint mismatch).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "actpc/agent.hpp"
#include "actpc/config.hpp"
#include "actpc/envs.hpp"
#include "actpc/io.hpp"
#include "actpc/metrics.hpp"
#include "actpc/ngc.hpp"
#include "actpc/persistence.hpp"

namespace fs = std::filesystem;
using namespace actpc;

namespace {

struct Overrides {
  std::string config_path;
  std::string preset = "desk";
  std::optional<std::string> env;
  std::vector<std::uint64_t> seeds;
  std::optional<int> episodes;
  std::optional<int> max_len;
  std::optional<double> fail_reward;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<std::string> demo_file;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (fields override the preset)");
  cmd->add_option("--preset", o.preset, "Base defaults: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--env", o.env, "Environment name");
  cmd->add_option("--seed", o.seeds, "Seed (repeatable)");
  cmd->add_option("--max-len", o.max_len, "Episode length limit (0: environment default)");
  cmd->add_option("--fail-reward", o.fail_reward, "Sparse reward on non-goal steps (0 or -1)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint path");
  cmd->add_option("--demo-file", o.demo_file, "Demonstration JSON-lines file");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.preset == "paper" ? paper_config() : desk_config();
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  if (o.env) c.env = *o.env;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.max_len) c.max_len = *o.max_len;
  if (o.fail_reward) c.fail_reward = *o.fail_reward;
  if (o.out) c.out_dir = *o.out;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  if (o.demo_file) c.demo_file = *o.demo_file;
  c.validate();
  return c;
}

std::string seed_path(const RunConfig& c, const std::string& stem, std::uint64_t seed, const std::string& ext) {
  return (fs::path(c.out_dir) / (stem + "_seed" + std::to_string(seed) + ext)).string();
}

std::string checkpoint_path(const RunConfig& c, std::uint64_t seed) {
  if (c.checkpoint.empty()) return seed_path(c, "checkpoint", seed, ".ckpt");
  if (c.seeds.size() == 1) return c.checkpoint;
  const fs::path p(c.checkpoint);
  return (p.parent_path() / (p.stem().string() + "_seed" + std::to_string(seed) + p.extension().string())).string();
}

io::SummaryRow summarize(const RunConfig& c, std::uint64_t seed, const EpisodeLog& log) {
  const auto returns = log.sparse_returns();
  io::SummaryRow row;
  row.env = c.env;
  row.seed = seed;
  row.avg_return_last100 = metrics::tail_mean(returns, 100);
  if (!returns.empty()) {
    try {
      row.r_stability = metrics::r_stability(returns, std::min<std::size_t>(100, returns.size()));
      row.rs_defined = true;
    } catch (const metrics::UndefinedMetric&) {
    }
  }
  return row;
}

int cmd_train(const RunConfig& c, bool resume, bool force) {
  fs::create_directories(c.out_dir);
  io::write_atomic((fs::path(c.out_dir) / "config.resolved.json").string(), nlohmann::json(c).dump(2) + "\n");

  std::vector<Episode> demos;
  if (c.episodes > 0 && !resume) {
    if (c.demo_file.empty()) throw std::invalid_argument("train needs --demo-file (create one with `actpc demo`)");
    demos = io::read_demos(c.demo_file);
  }

  std::vector<io::SummaryRow> rows;
  int status = 0;
  for (const auto seed : c.seeds) {
    auto env = envs::make_env(c.env, c.fail_reward, c.max_len);
    const std::string ckpt = checkpoint_path(c, seed);
    Agent agent = resume ? persistence::load(ckpt, c, force) : Agent(c.agent, env->spec(), seed);
    if (!resume && c.episodes > 0) agent.load_demos(demos);

    io::EpisodeCsv csv(seed_path(c, "episodes", seed, ".csv"));
    std::optional<io::StepJsonl> steps;
    if (c.write_steps) steps.emplace(seed_path(c, "steps", seed, ".jsonl"));

    EpisodeLog log;
    try {
      log = agent.run(
          *env, c.episodes, c.max_len,
          [&](const StepRecord& r) {
            if (steps) steps->write(r);
          },
          [&](const EpisodeRecord& r) { csv.write(r); });
    } catch (const ngc::DivergenceError& e) {
      std::cerr << "seed " << seed << ": divergence in layer " << e.layer() << " after step " << agent.steps()
                << ": " << e.what() << "\n";
      status = 2;
      continue;
    }
    persistence::save(agent, c, ckpt, c.snapshot_buffers);
    rows.push_back(summarize(c, seed, log));
    const auto& row = rows.back();
    std::cout << "seed " << seed << ": episodes " << log.episodes.size() << ", avg_return_last100 "
              << io::fmt(row.avg_return_last100) << ", r_stability "
              << (row.rs_defined ? io::fmt(row.r_stability) : std::string("undefined")) << "\n";
  }
  io::write_summary((fs::path(c.out_dir) / "summary.csv").string(), rows);
  return status;
}

int cmd_eval(const RunConfig& c, bool force, bool random) {
  const auto seed = c.seeds.front();
  auto env = envs::make_env(c.env, c.fail_reward, c.max_len);
  EvalSummary s;
  if (random) {
    s = evaluate_random(*env, c.eval_episodes, seed, c.max_len);
  } else {
    if (c.checkpoint.empty()) throw std::invalid_argument("eval needs --checkpoint (or --random)");
    const Agent agent = persistence::load(c.checkpoint, c, force);
    s = evaluate(agent, *env, c.eval_episodes, seed, c.max_len);
  }
  const nlohmann::json j{{"env", c.env},
                         {"policy", random ? "random" : "checkpoint"},
                         {"episodes", s.episodes},
                         {"success_rate", s.success_rate},
                         {"avg_return", s.avg_return}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_demo(const RunConfig& c, int count) {
  auto env = envs::make_env(c.env, c.fail_reward, c.max_len);
  const auto episodes = collect_demos(*env, count, c.seeds.front(), c.max_len);
  const std::string path =
      c.demo_file.empty() ? (fs::path(c.out_dir) / ("demos_" + c.env + ".jsonl")).string() : c.demo_file;
  io::write_demos(path, episodes);
  std::cout << "wrote " << episodes.size() << " episodes to " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backprop-free actor/critic agent built from predictive-coding circuits"};
  app.require_subcommand(1);

  Overrides train_o, eval_o, demo_o;
  bool resume = false, force = false, eval_force = false, random = false;

  auto* train = app.add_subcommand("train", "Pretrain the prior on demos and run the agent per seed");
  add_common(train, train_o);
  train->add_option("--episodes", train_o.episodes, "Episodes per seed");
  train->add_flag("--resume", resume, "Continue from the checkpoint instead of starting fresh");
  train->add_flag("--force", force, "Accept a checkpoint whose config hash differs");

  auto* eval = app.add_subcommand("eval", "Greedy rollouts of a checkpointed agent");
  add_common(eval, eval_o);
  eval->add_option("--episodes", eval_o.episodes, "Ignored (use --rollouts)");
  int rollouts = -1;
  eval->add_option("--rollouts", rollouts, "Number of evaluation episodes (default 100)");
  eval->add_flag("--force", eval_force, "Accept a checkpoint whose config hash differs");
  eval->add_flag("--random", random, "Evaluate the uniform-random policy instead");

  auto* demo = app.add_subcommand("demo", "Write scripted-expert demonstrations");
  add_common(demo, demo_o);
  int count = -1;
  demo->add_option("--episodes,--count", count, "Successful episodes to record (default 300)");

  auto* plot = app.add_subcommand("plot-data", "Rolling mean of an episode CSV as tidy CSV");
  std::string plot_in, plot_out;
  std::size_t window = 100;
  plot->add_option("input", plot_in, "episodes_seed*.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output CSV (default: <input>_plot.csv)");
  plot->add_option("--window", window, "Rolling window")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(resolve(train_o), resume, force);
    if (*eval) {
      auto c = resolve(eval_o);
      if (rollouts >= 0) c.eval_episodes = rollouts;
      return cmd_eval(c, eval_force, random);
    }
    if (*demo) {
      auto c = resolve(demo_o);
      return cmd_demo(c, count >= 0 ? count : c.demo_episodes);
    }
    if (*plot) {
      if (plot_out.empty()) {
        const fs::path p(plot_in);
        plot_out = (p.parent_path() / (p.stem().string() + "_plot.csv")).string();
      }
      io::write_plot_data(plot_out, io::read_episode_returns(plot_in), window);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
