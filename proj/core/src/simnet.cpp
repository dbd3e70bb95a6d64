#include "twp/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace twp {

uint64_t SimClock::local_time(double true_ms) const {
  double local = true_ms + offset_ms + drift_ppm * 1e-6 * true_ms;
  long long ms = std::llround(local);
  return ms < 0 ? 0 : static_cast<uint64_t>(ms);
}

void DelayModel::validate() const {
  if (constant_ms.has_value() == dist.has_value())
    throw std::invalid_argument(
        "delay model needs exactly one of constant/distribution");
  if (constant_ms && !(*constant_ms > 0.0))
    throw std::invalid_argument("constant delay must be > 0");
  if (dist) dist->validate();
}

double DelayModel::sample_delay(Rng& rng) const {
  if (constant_ms) return *constant_ms;
  // Resample below the 1 ms floor observed as the minimum real RTT.
  for (int i = 0; i < 10000; ++i) {
    double d = sample_one(*dist, rng);
    if (d >= 1.0) return d;
  }
  throw std::runtime_error(
      "delay distribution essentially never reaches 1 ms");
}

void LinkModel::validate() const {
  delay.validate();
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
    throw std::invalid_argument("loss_prob must be in [0, 1]");
}

std::optional<double> transmit(const LinkModel& link, double send_true_ms,
                               Rng& rng) {
  if (uniform01(rng) < link.loss_prob) return std::nullopt;
  return send_true_ms + link.delay.sample_delay(rng);
}

void SimConfig::validate() const {
  if (n_nodes < 2 || n_nodes > 256)
    throw std::invalid_argument("n_nodes must be in [2, 256]");
  if (ticks == 0) throw std::invalid_argument("ticks must be > 0");
  if (probe_interval_ms == 0)
    throw std::invalid_argument("interval_ms must be > 0");
  if (clocks.size() != n_nodes)
    throw std::invalid_argument("clock table size != n_nodes");
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = 0; j < n_nodes; ++j) {
      if (i == j) continue;
      auto it = links.find({static_cast<NodeId>(i), static_cast<NodeId>(j)});
      if (it == links.end())
        throw std::invalid_argument(
            "no link model for " + std::to_string(i) + "->" +
            std::to_string(j) + " (add a [link * *] default section)");
      it->second.validate();
    }
  }
}

const LinkModel& SimConfig::link(NodeId src, NodeId dst) const {
  return links.at({src, dst});
}

namespace {

DelayModel parse_delay_spec(std::istringstream& in, std::size_t line_no) {
  std::string family;
  if (!(in >> family))
    throw std::runtime_error("sim config line " + std::to_string(line_no) +
                             ": delay needs a family");
  std::map<std::string, double> kv;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("sim config line " + std::to_string(line_no) +
                               ": expected key=value, got '" + tok + "'");
    kv[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
  }

  DelayModel model;
  if (family == "constant") {
    if (!kv.contains("ms"))
      throw std::runtime_error("sim config line " + std::to_string(line_no) +
                               ": constant delay needs ms=");
    model.constant_ms = kv["ms"];
    return model;
  }
  auto fam = family_from_string(family);
  if (!fam)
    throw std::runtime_error("sim config line " + std::to_string(line_no) +
                             ": unknown delay family '" + family + "'");
  DistParams p;
  p.family = *fam;
  if (kv.contains("shape")) p.shape = kv["shape"];
  if (kv.contains("scale")) p.scale = kv["scale"];
  if (kv.contains("location")) p.location = kv["location"];
  if (kv.contains("threshold")) p.threshold = kv["threshold"];
  p.validate();
  model.dist = p;
  return model;
}

}  // namespace

SimConfig SimConfig::from_text(const std::string& text) {
  SimConfig cfg;
  struct LinkSection {
    bool any_src = false, any_dst = false;
    NodeId src = 0, dst = 0;
    std::optional<DelayModel> delay;
    std::optional<double> loss;
  };
  std::vector<LinkSection> link_sections;
  std::map<std::size_t, SimClock> node_sections;

  enum class In { Top, Node, Link } where = In::Top;
  std::size_t cur_node = 0;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;

    if (key == "[node") {
      std::string rest;
      ls >> rest;
      if (!rest.empty() && rest.back() == ']') rest.pop_back();
      cur_node = std::stoul(rest);
      node_sections[cur_node];  // materialize defaults
      where = In::Node;
      continue;
    }
    if (key == "[link") {
      LinkSection sec;
      std::string s1, s2;
      ls >> s1 >> s2;
      if (!s2.empty() && s2.back() == ']') s2.pop_back();
      if (s1 == "*")
        sec.any_src = true;
      else
        sec.src = static_cast<NodeId>(std::stoul(s1));
      if (s2 == "*")
        sec.any_dst = true;
      else
        sec.dst = static_cast<NodeId>(std::stoul(s2));
      link_sections.push_back(sec);
      where = In::Link;
      continue;
    }

    switch (where) {
      case In::Top: {
        if (key == "nodes")
          ls >> cfg.n_nodes;
        else if (key == "ticks")
          ls >> cfg.ticks;
        else if (key == "interval_ms")
          ls >> cfg.probe_interval_ms;
        else if (key == "start_ms")
          ls >> cfg.start_ms;
        else if (key == "seed")
          ls >> cfg.seed;
        else if (key == "rotate_s") {
          uint32_t v;
          ls >> v;
          cfg.rotate_s = v;
        } else
          throw std::runtime_error("sim config line " +
                                   std::to_string(line_no) +
                                   ": unknown key '" + key + "'");
        break;
      }
      case In::Node: {
        if (key == "offset_ms")
          ls >> node_sections[cur_node].offset_ms;
        else if (key == "drift_ppm")
          ls >> node_sections[cur_node].drift_ppm;
        else
          throw std::runtime_error("sim config line " +
                                   std::to_string(line_no) +
                                   ": unknown node key '" + key + "'");
        break;
      }
      case In::Link: {
        auto& sec = link_sections.back();
        if (key == "delay")
          sec.delay = parse_delay_spec(ls, line_no);
        else if (key == "loss") {
          double v;
          ls >> v;
          sec.loss = v;
        } else
          throw std::runtime_error("sim config line " +
                                   std::to_string(line_no) +
                                   ": unknown link key '" + key + "'");
        break;
      }
    }
  }

  if (cfg.n_nodes < 2)
    throw std::runtime_error("sim config: nodes must be >= 2");
  cfg.clocks.assign(cfg.n_nodes, SimClock{});
  for (const auto& [i, clock] : node_sections) {
    if (i >= cfg.n_nodes)
      throw std::runtime_error("sim config: [node " + std::to_string(i) +
                               "] outside roster");
    cfg.clocks[i] = clock;
  }

  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    for (std::size_t j = 0; j < cfg.n_nodes; ++j) {
      if (i == j) continue;
      LinkModel model;
      bool have = false;
      for (const auto& sec : link_sections) {
        bool match = (sec.any_src || sec.src == i) &&
                     (sec.any_dst || sec.dst == j);
        if (!match) continue;
        if (sec.delay) {
          model.delay = *sec.delay;
          have = true;
        }
        if (sec.loss) model.loss_prob = *sec.loss;
      }
      if (have)
        cfg.links[{static_cast<NodeId>(i), static_cast<NodeId>(j)}] = model;
    }
  }
  cfg.validate();
  return cfg;
}

SimConfig SimConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sim config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::vector<LogRecord> SimResult::node_records(std::size_t node) const {
  std::vector<LogRecord> out;
  for (const auto& seg : segments[node])
    out.insert(out.end(), seg.records.begin(), seg.records.end());
  return out;
}

std::vector<uint8_t> SimResult::node_log_bytes(std::size_t node) const {
  std::vector<uint8_t> out;
  for (const auto& seg : segments[node])
    for (const auto& rec : seg.records) append_record(out, rec);
  return out;
}

SimResult run_scenario(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);

  struct Event {
    double t;
    uint64_t order;
    enum Kind { Tick, Deliver } kind;
    NodeId node;
    uint64_t tick_index;  // Tick only
    NodeId from;          // Deliver only
    TwpMessage msg;       // Deliver only
  };
  auto later = [](const Event& a, const Event& b) {
    return a.t != b.t ? a.t > b.t : a.order > b.order;
  };
  std::priority_queue<Event, std::vector<Event>, decltype(later)> queue(later);
  uint64_t order = 0;

  std::vector<Peer> peers;
  peers.reserve(config.n_nodes);
  for (std::size_t i = 0; i < config.n_nodes; ++i) {
    PeerConfig pc;
    pc.self_id = static_cast<NodeId>(i);
    pc.roster_size = config.n_nodes;
    pc.probe_interval_ms = config.probe_interval_ms;
    pc.rotation_interval_s =
        config.rotate_s.value_or(std::numeric_limits<uint32_t>::max());
    peers.emplace_back(pc);
  }

  SimResult result;
  result.segments.resize(config.n_nodes);
  result.roster.interval_ms = config.probe_interval_ms;
  for (std::size_t i = 0; i < config.n_nodes; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "node%03zu", i);
    result.roster.addresses.push_back(name);
  }

  double start = static_cast<double>(config.start_ms);
  for (std::size_t i = 0; i < config.n_nodes; ++i)
    queue.push(Event{start, order++, Event::Tick, static_cast<NodeId>(i), 0,
                     0, {}});

  auto dispatch_sends = [&](NodeId node, double t,
                            const std::vector<SendAction>& actions) {
    for (const auto& action : actions) {
      ++result.messages_sent;
      auto arrival = transmit(config.link(node, action.to), t, rng);
      if (!arrival) {
        ++result.messages_lost;
        continue;
      }
      queue.push(
          Event{*arrival, order++, Event::Deliver, action.to, 0, node,
                action.msg});
    }
  };

  while (!queue.empty()) {
    Event ev = queue.top();
    queue.pop();
    Peer& peer = peers[ev.node];
    uint64_t local = config.clocks[ev.node].local_time(ev.t);

    if (ev.kind == Event::Tick) {
      dispatch_sends(ev.node, ev.t, peer.on_tick(local));
      if (config.rotate_s) {
        if (auto seg = peer.rotate_if_due(local))
          result.segments[ev.node].push_back(std::move(*seg));
      }
      if (ev.tick_index + 1 < config.ticks) {
        double next = start + static_cast<double>(ev.tick_index + 1) *
                                  config.probe_interval_ms;
        queue.push(Event{next, order++, Event::Tick, ev.node,
                         ev.tick_index + 1, 0, {}});
      }
    } else {
      dispatch_sends(ev.node, ev.t, peer.on_message(ev.msg, ev.from, local));
    }
  }

  for (std::size_t i = 0; i < config.n_nodes; ++i)
    result.segments[i].push_back(peers[i].rotate_now());
  return result;
}

}  // namespace twp
