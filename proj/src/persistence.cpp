#include "actpc/persistence.hpp"

#include <bit>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "actpc/envs.hpp"

namespace actpc::persistence {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'C', 'T', 'P', 'C', 'N', 'G', 'C'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
static_assert(sizeof(Real) == 4, "checkpoint stores 32-bit floats");

using Visit = std::function<void(const std::string& name, const char* role, Matrix<Real>& m)>;

void visit_circuit(circuits::LearningCircuit& c, const std::string& prefix, const Visit& fn) {
  c.core().params().for_each(
      [&](const std::string& n, const char* role, Matrix<Real>& m) { fn(prefix + "/" + n, role, m); });
  if (c.has_target())
    c.target().params().for_each(
        [&](const std::string& n, const char* role, Matrix<Real>& m) { fn("target_" + prefix + "/" + n, role, m); });
  std::vector<std::string> names;
  c.core().params().for_each([&](const std::string& n, const char*, Matrix<Real>&) { names.push_back(n); });
  auto& first = c.rule().first_moments();
  auto& second = c.rule().second_moments();
  for (std::size_t i = 0; i < names.size(); ++i) fn(prefix + "/adam_m/" + names[i], "adam_m", first[i]);
  for (std::size_t i = 0; i < names.size(); ++i) fn(prefix + "/adam_v/" + names[i], "adam_v", second[i]);
}

void visit_model(Agent& a, const Visit& fn) {
  visit_circuit(a.actor(), "actor", fn);
  visit_circuit(a.policy(), "policy", fn);
  visit_circuit(a.generator(), "gen", fn);
  visit_circuit(a.prior(), "prior", fn);
  // The projection is reproducible from the seed but stored for inspection
  // and for verification on load.
  auto q = a.working_memory().projection();
  fn("wm/Q", "projection", q);
  if (!(q == a.working_memory().projection())) a.working_memory().set_projection(std::move(q));
}

struct Layout {
  std::size_t D, A, md;
  std::size_t cols() const { return 2 * D + A + 3 + 2 * md; }
};

Matrix<Real> pack(const std::vector<const Transition*>& items, const Layout& L) {
  Matrix<Real> m(items.size(), L.cols());
  for (std::size_t r = 0; r < items.size(); ++r) {
    const auto& t = *items[r];
    auto row = m.row(r);
    std::size_t k = 0;
    auto put = [&](const Vec<Real>& v, std::size_t n, const char* what) {
      require_dim(v.size(), n, what);
      for (Real x : v) row[k++] = x;
    };
    put(t.obs, L.D, "transition obs");
    put(t.action, L.A, "transition action");
    row[k++] = t.reward;
    put(t.next_obs, L.D, "transition next_obs");
    row[k++] = t.terminal ? Real{1} : Real{0};
    row[k++] = t.sparse_reward;
    put(t.memory, L.md, "transition memory");
    put(t.next_memory, L.md, "transition next_memory");
  }
  return m;
}

std::vector<Transition> unpack(const Matrix<Real>& m, const Layout& L) {
  std::vector<Transition> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    std::size_t k = 0;
    auto take = [&](std::size_t n) {
      Vec<Real> v(row.begin() + static_cast<std::ptrdiff_t>(k), row.begin() + static_cast<std::ptrdiff_t>(k + n));
      k += n;
      return v;
    };
    auto& t = out[r];
    t.obs = take(L.D);
    t.action = take(L.A);
    t.reward = row[k++];
    t.next_obs = take(L.D);
    t.terminal = row[k++] != Real{0};
    t.sparse_reward = row[k++];
    t.memory = take(L.md);
    t.next_memory = take(L.md);
  }
  return out;
}

std::vector<const Transition*> pointers(const std::vector<Transition>& v) {
  std::vector<const Transition*> out;
  for (const auto& t : v) out.push_back(&t);
  return out;
}

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

json circuit_scalars(const circuits::LearningCircuit& c) {
  return json{{"updates", c.updates()}, {"adam_steps", c.rule().steps()}};
}

void restore_circuit_scalars(circuits::LearningCircuit& c, const json& j) {
  c.set_updates(j.at("updates").get<std::uint64_t>());
  c.rule().set_steps(j.at("adam_steps").get<std::uint64_t>());
}

struct Parsed {
  json header;
  std::vector<char> data;
};

Parsed parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw CheckpointError("checkpoint '" + path + "' is truncated");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw CheckpointError("checkpoint '" + path + "': bad container magic");
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data() + 8, 8);
  if (n > bytes.size() - 16) throw CheckpointError("checkpoint '" + path + "' is truncated (header)");
  Parsed p;
  try {
    p.header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path + "': unreadable header: " + e.what());
  }
  p.data.assign(bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n), bytes.end());
  return p;
}

}  // namespace

std::vector<std::string> tensor_names(const Agent& agent) {
  std::vector<std::string> out;
  visit_model(const_cast<Agent&>(agent), [&](const std::string& n, const char*, Matrix<Real>&) { out.push_back(n); });
  return out;
}

void save(const Agent& agent_in, const RunConfig& cfg, const std::string& path, bool snapshot_buffers) {
  auto& agent = const_cast<Agent&>(agent_in);
  json tensors = json::array();
  std::vector<Matrix<Real>> extra;

  std::vector<Matrix<Real>> model;
  visit_model(agent, [&](const std::string& n, const char* role, Matrix<Real>& m) {
    tensors.push_back({{"name", n}, {"role", role}, {"rows", m.rows()}, {"cols", m.cols()}});
    model.push_back(m);
  });

  json scalars{{"seed", agent.seed()},
               {"r_ep_max", agent.reward_state().ep_max},
               {"r_in_max", agent.reward_state().in_max},
               {"steps", agent.steps()},
               {"episodes_done", agent.episodes_done()},
               {"rng", rng_text(agent.rng())},
               {"prior_frozen", agent.prior().frozen()},
               {"actor", circuit_scalars(agent.actor())},
               {"policy", circuit_scalars(agent.policy())},
               {"generator", circuit_scalars(agent.generator())},
               {"prior", circuit_scalars(agent.prior())},
               {"buffers", snapshot_buffers}};

  if (snapshot_buffers) {
    const Layout L{agent.spec().obs_dim, agent.spec().action_dim, agent.working_memory().dim()};
    auto add = [&](const std::string& name, Matrix<Real> m) {
      tensors.push_back({{"name", name}, {"role", "buffer"}, {"rows", m.rows()}, {"cols", m.cols()}});
      extra.push_back(std::move(m));
    };
    add("replay/main", pack(pointers(agent.replay().raw()), L));
    add("replay/demo", pack(pointers(agent.demos().raw()), L));
    std::vector<const Transition*> flat;
    json lengths = json::array();
    for (const auto& ep : agent.actor_buffer().raw()) {
      lengths.push_back(ep.size());
      for (const auto& t : ep) flat.push_back(&t);
    }
    add("actor_buffer/transitions", pack(flat, L));
    const auto& hist = agent.working_memory().history();
    Matrix<Real> h(hist.size(), agent.spec().obs_dim);
    for (std::size_t r = 0; r < hist.size(); ++r) std::copy(hist[r].begin(), hist[r].end(), h.row(r).begin());
    add("wm/history", std::move(h));
    scalars["replay_cursor"] = agent.replay().cursor();
    scalars["demo_cursor"] = agent.demos().cursor();
    scalars["actor_episode_lengths"] = lengths;
    scalars["actor_best_return"] = agent.actor_buffer().best_return();
  }

  const json header{{"version", kFormatVersion},
                    {"config_hash", config_hash(cfg)},
                    {"config", cfg},
                    {"env",
                     {{"name", agent.spec().name},
                      {"obs_dim", agent.spec().obs_dim},
                      {"action_dim", agent.spec().action_dim}}},
                    {"scalars", scalars},
                    {"tensors", tensors}};
  const std::string head = header.dump();

  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + tmp + "' for writing");
    out.write(kMagic, 8);
    const std::uint64_t n = head.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto* group : {&model, &extra})
      for (const auto& m : *group)
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(Real)));
    if (!out) throw CheckpointError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw CheckpointError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

json read_header(const std::string& path) { return parse_file(path).header; }

Agent load(const std::string& path, const RunConfig& cfg, bool force) {
  auto parsed = parse_file(path);
  const json& h = parsed.header;
  try {
    const int version = h.at("version").get<int>();
    if (version != kFormatVersion && !force)
      throw CheckpointError("checkpoint '" + path + "': format version " + std::to_string(version) +
                            ", expected " + std::to_string(kFormatVersion));
    const std::string hash = h.at("config_hash").get<std::string>();
    if (hash != config_hash(cfg) && !force)
      throw CheckpointError("checkpoint '" + path + "': config hash " + hash + " does not match " +
                            config_hash(cfg) + " (use --force to override)");

    // Locate every tensor's bytes before constructing anything.
    struct Entry {
      std::size_t rows, cols, offset;
    };
    std::map<std::string, Entry> table;
    std::size_t offset = 0;
    for (const auto& t : h.at("tensors")) {
      const Entry e{t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>(), offset};
      offset += e.rows * e.cols * sizeof(Real);
      table[t.at("name").get<std::string>()] = e;
    }
    if (offset != parsed.data.size())
      throw CheckpointError("checkpoint '" + path + "' is truncated: expected " + std::to_string(offset) +
                            " tensor bytes, found " + std::to_string(parsed.data.size()));
    auto read = [&](const std::string& name, Matrix<Real>& into) {
      const auto it = table.find(name);
      if (it == table.end()) throw CheckpointError("checkpoint '" + path + "' lacks tensor '" + name + "'");
      const auto& e = it->second;
      if (e.rows != into.rows() || e.cols != into.cols())
        throw CheckpointError("checkpoint tensor '" + name + "' has shape " + shape_str(e.rows, e.cols) +
                              ", expected " + shape_str(into.rows(), into.cols()));
      std::memcpy(into.data(), parsed.data.data() + e.offset, e.rows * e.cols * sizeof(Real));
    };
    auto read_any = [&](const std::string& name, std::size_t cols) {
      const auto it = table.find(name);
      if (it == table.end()) throw CheckpointError("checkpoint '" + path + "' lacks tensor '" + name + "'");
      Matrix<Real> m(it->second.rows, it->second.cols);
      if (m.cols() != cols && m.rows() > 0)
        throw CheckpointError("checkpoint tensor '" + name + "' has " + std::to_string(m.cols()) +
                              " columns, expected " + std::to_string(cols));
      std::memcpy(m.data(), parsed.data.data() + it->second.offset, m.size() * sizeof(Real));
      return m;
    };

    const auto env = envs::make_env(cfg.env, cfg.fail_reward, cfg.max_len);
    const auto& henv = h.at("env");
    if (henv.at("obs_dim").get<std::size_t>() != env->spec().obs_dim ||
        henv.at("action_dim").get<std::size_t>() != env->spec().action_dim)
      throw CheckpointError("checkpoint '" + path + "' was written for " + henv.at("name").get<std::string>() +
                            " (obs " + std::to_string(henv.at("obs_dim").get<std::size_t>()) + ", action " +
                            std::to_string(henv.at("action_dim").get<std::size_t>()) + "), not " +
                            env->spec().name);

    const json& s = h.at("scalars");
    Agent agent(cfg.agent, env->spec(), s.at("seed").get<std::uint64_t>());
    visit_model(agent, [&](const std::string& n, const char*, Matrix<Real>& m) { read(n, m); });

    agent.reward_state().ep_max = s.at("r_ep_max").get<double>();
    agent.reward_state().in_max = s.at("r_in_max").get<double>();
    agent.set_counters(s.at("steps").get<std::uint64_t>(), s.at("episodes_done").get<int>());
    std::istringstream rs(s.at("rng").get<std::string>());
    rs >> agent.rng();
    if (!rs) throw CheckpointError("checkpoint '" + path + "': unreadable rng state");
    if (s.at("prior_frozen").get<bool>()) agent.prior().freeze();
    restore_circuit_scalars(agent.actor(), s.at("actor"));
    restore_circuit_scalars(agent.policy(), s.at("policy"));
    restore_circuit_scalars(agent.generator(), s.at("generator"));
    restore_circuit_scalars(agent.prior(), s.at("prior"));

    if (s.value("buffers", false)) {
      const Layout L{agent.spec().obs_dim, agent.spec().action_dim, agent.working_memory().dim()};
      auto main = unpack(read_any("replay/main", L.cols()), L);
      auto demo = unpack(read_any("replay/demo", L.cols()), L);
      if (main.size() > agent.replay().capacity() || demo.size() > agent.demos().capacity())
        throw CheckpointError("checkpoint '" + path + "': buffer snapshot exceeds configured capacity");
      agent.replay().restore(std::move(main), s.at("replay_cursor").get<std::size_t>());
      agent.demos().restore(std::move(demo), s.at("demo_cursor").get<std::size_t>());
      auto flat = unpack(read_any("actor_buffer/transitions", L.cols()), L);
      std::deque<std::vector<Transition>> eps;
      std::size_t k = 0;
      for (const auto& len : s.at("actor_episode_lengths")) {
        const auto n = len.get<std::size_t>();
        if (k + n > flat.size()) throw CheckpointError("checkpoint '" + path + "': actor buffer lengths inconsistent");
        eps.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(k), flat.begin() + static_cast<std::ptrdiff_t>(k + n));
        k += n;
      }
      agent.actor_buffer().restore(std::move(eps), s.at("actor_best_return").get<double>());
      const auto hist = read_any("wm/history", agent.spec().obs_dim);
      std::deque<Vec<Real>> hv;
      for (std::size_t r = 0; r < hist.rows(); ++r) hv.emplace_back(hist.row(r).begin(), hist.row(r).end());
      agent.working_memory().set_history(std::move(hv));
    }
    return agent;
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path + "': malformed header: " + e.what());
  }
}

}  // namespace actpc::persistence
