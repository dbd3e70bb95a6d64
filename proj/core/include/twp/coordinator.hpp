#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "twp/wire.hpp"

namespace twp {

class CoordError : public std::runtime_error {
 public:
  enum class Kind { RegistrationClosed, NotClosed, Empty, UnknownNode, BadState };
  CoordError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// id -> address table distributed to every peer, plus the probe interval.
struct Roster {
  uint32_t interval_ms = 10000;
  std::vector<std::string> addresses;  // index is the NodeId

  std::size_t size() const { return addresses.size(); }
  std::string to_line() const;          // single ROSTER control line
  std::string to_file_text() const;     // roster file written next to logs
  static Roster from_file_text(const std::string& text);
};

enum class GrantResult { Granted, Queued };

// Registration, roster distribution and upload-slot scheduling.  Sessions
// may be concurrent but all calls here must be applied serially.
class Coordinator {
 public:
  enum class Phase { Registering, Running, Finalizing };

  explicit Coordinator(uint32_t interval_ms = 10000,
                       std::size_t max_concurrent_uploads = 4);

  // Idempotent per address.  The returned id is the address's rank in the
  // sorted registry and is only final once registration closes.
  NodeId register_address(const std::string& addr);

  void close_registration();  // Registering -> Running
  bool is_registered(const std::string& addr) const;
  std::optional<NodeId> id_of(const std::string& addr) const;

  Roster roster() const;  // throws NotClosed before close, Empty if no nodes

  GrantResult grant_upload(NodeId node);
  // Frees the node's slot; returns the queued node now granted, if any.
  std::optional<NodeId> release_upload(NodeId node);

  // Running -> Finalizing; returns the ids to send STOP to.  A second call
  // is a no-op returning nothing.
  std::vector<NodeId> finalize();

  void mark_done(NodeId node);
  bool all_done() const;

  Phase phase() const { return phase_; }
  std::size_t node_count() const { return addresses_.size(); }
  std::size_t active_uploads() const { return active_.size(); }
  std::size_t queued_uploads() const { return queue_.size(); }

 private:
  void check_node(NodeId node) const;

  uint32_t interval_ms_;
  std::size_t max_concurrent_;
  Phase phase_ = Phase::Registering;
  std::set<std::string> addresses_;  // sorted; rank is the id
  std::set<NodeId> active_;
  std::deque<NodeId> queue_;
  std::set<NodeId> done_;
};

// Line-oriented control protocol: one message per line, space-separated
// fields.  Verbs: REGISTER, ROSTER, START, UPLOAD-REQ, UPLOAD-GRANT,
// UPLOAD-DONE, STOP, plus OK/ERR replies.
struct ControlMsg {
  enum class Verb {
    Register,     // REGISTER <udp_addr>
    RosterLine,   // ROSTER <interval_ms> <addr0> <addr1> ...
    Start,        // START
    UploadReq,    // UPLOAD-REQ <node_id> <segment_index> <nbytes>
    UploadGrant,  // UPLOAD-GRANT <node_id> <segment_index>
    UploadDone,   // UPLOAD-DONE <node_id>
    Stop,         // STOP
    Ok,           // OK [detail...]
    Err,          // ERR <reason...>
  };

  Verb verb;
  std::vector<std::string> args;
};

std::string format_control(const ControlMsg& msg);   // includes trailing '\n'
ControlMsg parse_control(const std::string& line);   // throws on bad framing

}  // namespace twp
