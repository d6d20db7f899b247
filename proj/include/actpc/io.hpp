#pragma once

// Text outputs: demonstration files (JSON lines), per-episode CSV, per-step
// JSON lines, the run summary and plot data.

#include <fstream>
#include <string>
#include <vector>

#include "actpc/agent.hpp"

namespace actpc::io {

/// Shortest decimal text that parses back to the same double.
std::string fmt(double v);

/// One transition per line {o, a, sparse_r, o_next, terminal}; each episode
/// is followed by {"episode_end": true}.
void write_demos(const std::string& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_demos(const std::string& path);

class EpisodeCsv {
 public:
  explicit EpisodeCsv(const std::string& path);
  void write(const EpisodeRecord& r);

  static constexpr const char* kHeader =
      "episode,seed,sparse_return,combined_return,success,r_ep_mean,r_in_mean,tod_gen_mean,steps";

 private:
  std::ofstream out_;
};

class StepJsonl {
 public:
  explicit StepJsonl(const std::string& path);
  void write(const StepRecord& r);

 private:
  std::ofstream out_;
};

struct SummaryRow {
  std::string env;
  std::uint64_t seed = 0;
  double avg_return_last100 = 0.0;
  bool rs_defined = false;
  double r_stability = 0.0;
};

/// Columns env, seed, avg_return_last100, r_stability (empty when undefined).
void write_summary(const std::string& path, const std::vector<SummaryRow>& rows);

/// Reads the sparse_return column of an episode CSV.
std::vector<double> read_episode_returns(const std::string& path);

/// Columns episode, rolling_mean_return.
void write_plot_data(const std::string& path, const std::vector<double>& returns, std::size_t window);

/// Write `text` to `path` via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& text);

}  // namespace actpc::io
