#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "actpc/io.hpp"
#include "agent_support.hpp"
#include "doctest.h"

using namespace actpc;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(ACTPC_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string tiny_config_file(const std::filesystem::path& dir) {
  const auto path = (dir / "tiny.json").string();
  nlohmann::json j = testing::tiny_config();
  std::ofstream(path) << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("cli usage errors") {
  CHECK(run("").status != 0);
  CHECK(run("train --env nowhere --episodes 0 --out /tmp/actpc_cli_none").status == 1);
  CHECK(run("train --fail-reward 3 --episodes 0 --out /tmp/actpc_cli_none").status == 1);
  CHECK(run("eval --env point_reacher").status == 1);
}

TEST_CASE("cli demo") {
  const auto dir = testing::scratch_dir("cli_demo");
  const auto zero = run("demo --env point_reacher --count 0 --demo-file " + (dir / "zero.jsonl").string());
  CHECK(zero.status == 0);
  CHECK(slurp(dir / "zero.jsonl").empty());
  const auto some = run("demo --env line_world --episodes 2 --out " + dir.string());
  CHECK(some.status == 0);
  CHECK(std::filesystem::exists(dir / "demos_line_world.jsonl"));
}

TEST_CASE("cli train, eval and plot-data") {
  const auto dir = testing::scratch_dir("cli_train");
  const auto cfg = tiny_config_file(dir);
  const auto demos = (dir / "d.jsonl").string();
  REQUIRE(run("demo --env point_reacher --count 3 --demo-file " + demos).status == 0);

  SUBCASE("zero episodes") {
    const auto r = run("train --config " + cfg + " --episodes 0 --out " + (dir / "zero").string());
    CHECK(r.status == 0);
    CHECK(slurp(dir / "zero" / "episodes_seed1.csv") == std::string(io::EpisodeCsv::kHeader) + "\n");
    CHECK(slurp(dir / "zero" / "summary.csv") == "env,seed,avg_return_last100,r_stability\npoint_reacher,1,0,\n");
  }
  SUBCASE("missing demo file") {
    CHECK(run("train --config " + cfg + " --episodes 2 --out " + (dir / "nodemo").string()).status == 1);
  }

  const std::string common = "train --config " + cfg + " --episodes 3 --demo-file " + demos + " --seed 4 ";
  REQUIRE(run(common + "--out " + (dir / "a").string()).status == 0);

  SUBCASE("reruns are byte-identical") {
    // The checkpoint header records the output directory, so rerun in place.
    const std::vector<std::string> files{"episodes_seed4.csv", "steps_seed4.jsonl", "checkpoint_seed4.ckpt",
                                         "summary.csv", "config.resolved.json"};
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(slurp(dir / "a" / f));
    REQUIRE(run(common + "--out " + (dir / "a").string()).status == 0);
    for (std::size_t i = 0; i < files.size(); ++i) {
      INFO(files[i]);
      CHECK(!first[i].empty());
      CHECK(slurp(dir / "a" / files[i]) == first[i]);
    }
  }
  SUBCASE("eval is repeatable and leaves the checkpoint alone") {
    const auto ckpt = (dir / "a" / "checkpoint_seed4.ckpt").string();
    const auto before = slurp(ckpt);
    const std::string e = "eval --config " + cfg + " --rollouts 5 --checkpoint " + ckpt;
    const auto r1 = run(e), r2 = run(e);
    CHECK(r1.status == 0);
    CHECK(r1.out == r2.out);
    const auto j = nlohmann::json::parse(r1.out);
    CHECK(j.at("episodes") == 5);
    CHECK(slurp(ckpt) == before);
    CHECK(run("eval --config " + cfg + " --random --rollouts 5").status == 0);
  }
  SUBCASE("eval rejects a different config unless forced") {
    const auto ckpt = (dir / "a" / "checkpoint_seed4.ckpt").string();
    CHECK(run("eval --preset desk --rollouts 2 --checkpoint " + ckpt).status == 2);
    CHECK(run("eval --config " + cfg + " --env line_world --force --rollouts 2 --checkpoint " + ckpt).status == 2);
  }
  SUBCASE("resume continues the episode count") {
    const auto r = run("train --config " + cfg + " --episodes 2 --seed 4 --resume --out " + (dir / "a").string());
    CHECK(r.status == 0);
    const auto csv = slurp(dir / "a" / "episodes_seed4.csv");
    CHECK(csv.find("\n3,") != std::string::npos);
  }
  SUBCASE("plot-data") {
    const auto r = run("plot-data " + (dir / "a" / "episodes_seed4.csv").string() + " --window 2");
    CHECK(r.status == 0);
    const auto plot = slurp(dir / "a" / "episodes_seed4_plot.csv");
    CHECK(plot.rfind("episode,rolling_mean_return\n", 0) == 0);
    CHECK(run("plot-data " + (dir / "a" / "summary.csv").string()).status == 1);
  }
}
