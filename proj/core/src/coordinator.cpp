#include "twp/coordinator.hpp"

#include <algorithm>
#include <sstream>

namespace twp {

std::string Roster::to_line() const {
  std::ostringstream out;
  out << "ROSTER " << interval_ms;
  for (const auto& a : addresses) out << ' ' << a;
  return out.str();
}

std::string Roster::to_file_text() const {
  std::ostringstream out;
  out << "interval_ms " << interval_ms << '\n';
  for (std::size_t i = 0; i < addresses.size(); ++i)
    out << "node " << i << ' ' << addresses[i] << '\n';
  return out.str();
}

Roster Roster::from_file_text(const std::string& text) {
  Roster r;
  r.addresses.clear();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "interval_ms") {
      if (!(ls >> r.interval_ms))
        throw std::runtime_error("roster: bad interval_ms at line " +
                                 std::to_string(line_no));
    } else if (key == "node") {
      std::size_t id;
      std::string addr;
      if (!(ls >> id >> addr))
        throw std::runtime_error("roster: bad node line " +
                                 std::to_string(line_no));
      if (id != r.addresses.size())
        throw std::runtime_error("roster: node ids must be 0..n-1 in order, got " +
                                 std::to_string(id) + " at line " +
                                 std::to_string(line_no));
      r.addresses.push_back(addr);
    } else {
      throw std::runtime_error("roster: unknown key '" + key + "' at line " +
                               std::to_string(line_no));
    }
  }
  if (r.addresses.empty()) throw std::runtime_error("roster: no nodes");
  return r;
}

Coordinator::Coordinator(uint32_t interval_ms, std::size_t max_concurrent_uploads)
    : interval_ms_(interval_ms), max_concurrent_(max_concurrent_uploads) {
  if (max_concurrent_ == 0)
    throw std::invalid_argument("max_concurrent_uploads must be > 0");
}

NodeId Coordinator::register_address(const std::string& addr) {
  if (phase_ != Phase::Registering) {
    // A rejoining node keeps its id; only new addresses are rejected.
    auto id = id_of(addr);
    if (id) return *id;
    throw CoordError(CoordError::Kind::RegistrationClosed,
                     "registration closed, unknown address " + addr);
  }
  if (addresses_.size() >= 256 && !addresses_.contains(addr))
    throw CoordError(CoordError::Kind::BadState, "roster full (256 nodes)");
  addresses_.insert(addr);
  return *id_of(addr);
}

void Coordinator::close_registration() {
  if (phase_ != Phase::Registering) return;
  if (addresses_.empty())
    throw CoordError(CoordError::Kind::Empty, "no registered nodes");
  phase_ = Phase::Running;
}

bool Coordinator::is_registered(const std::string& addr) const {
  return addresses_.contains(addr);
}

std::optional<NodeId> Coordinator::id_of(const std::string& addr) const {
  auto it = addresses_.find(addr);
  if (it == addresses_.end()) return std::nullopt;
  return static_cast<NodeId>(std::distance(addresses_.begin(), it));
}

Roster Coordinator::roster() const {
  if (phase_ == Phase::Registering)
    throw CoordError(CoordError::Kind::NotClosed, "registration still open");
  if (addresses_.empty())
    throw CoordError(CoordError::Kind::Empty, "no registered nodes");
  Roster r;
  r.interval_ms = interval_ms_;
  r.addresses.assign(addresses_.begin(), addresses_.end());
  return r;
}

void Coordinator::check_node(NodeId node) const {
  if (node >= addresses_.size())
    throw CoordError(CoordError::Kind::UnknownNode,
                     "unknown node " + std::to_string(node));
}

GrantResult Coordinator::grant_upload(NodeId node) {
  if (phase_ == Phase::Registering)
    throw CoordError(CoordError::Kind::BadState, "experiment not started");
  check_node(node);
  if (active_.contains(node)) return GrantResult::Granted;
  if (std::find(queue_.begin(), queue_.end(), node) != queue_.end())
    return GrantResult::Queued;
  if (active_.size() < max_concurrent_) {
    active_.insert(node);
    return GrantResult::Granted;
  }
  queue_.push_back(node);
  return GrantResult::Queued;
}

std::optional<NodeId> Coordinator::release_upload(NodeId node) {
  check_node(node);
  active_.erase(node);
  if (queue_.empty() || active_.size() >= max_concurrent_) return std::nullopt;
  NodeId next = queue_.front();
  queue_.pop_front();
  active_.insert(next);
  return next;
}

std::vector<NodeId> Coordinator::finalize() {
  if (phase_ != Phase::Running) return {};
  phase_ = Phase::Finalizing;
  std::vector<NodeId> ids(addresses_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<NodeId>(i);
  return ids;
}

void Coordinator::mark_done(NodeId node) {
  check_node(node);
  done_.insert(node);
}

bool Coordinator::all_done() const { return done_.size() == addresses_.size(); }

namespace {

const char* verb_name(ControlMsg::Verb v) {
  switch (v) {
    case ControlMsg::Verb::Register: return "REGISTER";
    case ControlMsg::Verb::RosterLine: return "ROSTER";
    case ControlMsg::Verb::Start: return "START";
    case ControlMsg::Verb::UploadReq: return "UPLOAD-REQ";
    case ControlMsg::Verb::UploadGrant: return "UPLOAD-GRANT";
    case ControlMsg::Verb::UploadDone: return "UPLOAD-DONE";
    case ControlMsg::Verb::Stop: return "STOP";
    case ControlMsg::Verb::Ok: return "OK";
    case ControlMsg::Verb::Err: return "ERR";
  }
  return "?";
}

std::optional<ControlMsg::Verb> verb_of(const std::string& name) {
  using V = ControlMsg::Verb;
  if (name == "REGISTER") return V::Register;
  if (name == "ROSTER") return V::RosterLine;
  if (name == "START") return V::Start;
  if (name == "UPLOAD-REQ") return V::UploadReq;
  if (name == "UPLOAD-GRANT") return V::UploadGrant;
  if (name == "UPLOAD-DONE") return V::UploadDone;
  if (name == "STOP") return V::Stop;
  if (name == "OK") return V::Ok;
  if (name == "ERR") return V::Err;
  return std::nullopt;
}

std::size_t min_args(ControlMsg::Verb v) {
  using V = ControlMsg::Verb;
  switch (v) {
    case V::Register: return 1;
    case V::RosterLine: return 2;  // interval + at least one address
    case V::UploadReq: return 3;
    case V::UploadGrant: return 2;
    case V::UploadDone: return 1;
    case V::Start:
    case V::Stop:
    case V::Ok:
    case V::Err: return 0;
  }
  return 0;
}

}  // namespace

std::string format_control(const ControlMsg& msg) {
  std::ostringstream out;
  out << verb_name(msg.verb);
  for (const auto& a : msg.args) out << ' ' << a;
  out << '\n';
  return out.str();
}

ControlMsg parse_control(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  if (!(in >> word)) throw std::runtime_error("control: empty line");
  auto verb = verb_of(word);
  if (!verb) throw std::runtime_error("control: unknown verb '" + word + "'");
  ControlMsg msg{*verb, {}};
  while (in >> word) msg.args.push_back(word);
  if (msg.args.size() < min_args(*verb))
    throw std::runtime_error(std::string("control: too few fields for ") +
                             verb_name(*verb));
  return msg;
}

}  // namespace twp
