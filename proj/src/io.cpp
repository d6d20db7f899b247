#include "actpc/io.hpp"

#include <charconv>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "actpc/metrics.hpp"

namespace actpc::io {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

json vec_json(const Vec<Real>& v) {
  json a = json::array();
  for (Real x : v) a.push_back(static_cast<double>(x));
  return a;
}

Vec<Real> json_vec(const json& a, const std::string& where) {
  if (!a.is_array()) throw std::invalid_argument(where + ": expected an array");
  Vec<Real> v;
  for (const auto& x : a) v.push_back(static_cast<Real>(x.get<double>()));
  return v;
}

}  // namespace

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_demos(const std::string& path, const std::vector<Episode>& episodes) {
  std::ostringstream os;
  for (const auto& ep : episodes) {
    for (const auto& tr : ep) {
      json j{{"o", vec_json(tr.obs)},
             {"a", vec_json(tr.action)},
             {"sparse_r", static_cast<double>(tr.sparse_reward)},
             {"o_next", vec_json(tr.next_obs)},
             {"terminal", tr.terminal}};
      os << j.dump() << '\n';
    }
    os << R"({"episode_end":true})" << '\n';
  }
  write_atomic(path, os.str());
}

std::vector<Episode> read_demos(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open demo file '" + path + "'");
  std::vector<Episode> out;
  Episode cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    if (j.value("episode_end", false)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    try {
      Transition tr;
      tr.obs = json_vec(j.at("o"), where);
      tr.action = json_vec(j.at("a"), where);
      tr.sparse_reward = static_cast<Real>(j.at("sparse_r").get<double>());
      tr.next_obs = json_vec(j.at("o_next"), where);
      tr.terminal = j.at("terminal").get<bool>();
      cur.push_back(std::move(tr));
    } catch (const json::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  // A trailing episode without its end marker still counts.
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

EpisodeCsv::EpisodeCsv(const std::string& path) : out_(open_out(path)) { out_ << kHeader << '\n'; }

void EpisodeCsv::write(const EpisodeRecord& r) {
  out_ << r.episode << ',' << r.seed << ',' << fmt(r.sparse_return) << ',' << fmt(r.combined_return) << ','
       << (r.success ? 1 : 0) << ',' << fmt(r.r_ep_mean) << ',' << fmt(r.r_in_mean) << ',' << fmt(r.tod_gen_mean)
       << ',' << r.steps << '\n';
  out_.flush();
}

StepJsonl::StepJsonl(const std::string& path) : out_(open_out(path)) {}

void StepJsonl::write(const StepRecord& r) {
  json j{{"t", r.t},
         {"episode", r.episode},
         {"r_ep", r.r_ep},
         {"r_in", r.r_in},
         {"r_t", r.r_t},
         {"sparse_r", r.sparse_r},
         {"terminal", r.terminal},
         {"tod", r.tod}};
  out_ << j.dump() << '\n';
}

void write_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "env,seed,avg_return_last100,r_stability\n";
  for (const auto& r : rows)
    os << r.env << ',' << r.seed << ',' << fmt(r.avg_return_last100) << ','
       << (r.rs_defined ? fmt(r.r_stability) : std::string()) << '\n';
  write_atomic(path, os.str());
}

std::vector<double> read_episode_returns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open episode file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != EpisodeCsv::kHeader)
    throw std::invalid_argument(path + ": not an episode CSV (unexpected header)");
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < 3 && std::getline(ls, cell, ','); ++i) {
    }
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ": bad sparse_return value '" + cell + "'");
    }
  }
  return out;
}

void write_plot_data(const std::string& path, const std::vector<double>& returns, std::size_t window) {
  const auto smooth = metrics::rolling_mean(returns, window);
  std::ostringstream os;
  os << "episode,rolling_mean_return\n";
  for (std::size_t i = 0; i < smooth.size(); ++i) os << i << ',' << fmt(smooth[i]) << '\n';
  write_atomic(path, os.str());
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace actpc::io
