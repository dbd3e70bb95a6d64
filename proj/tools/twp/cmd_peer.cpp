#include <poll.h>

#include <deque>
#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "io_util.hpp"
#include "net.hpp"
#include "twp/coordinator.hpp"
#include "twp/peer.hpp"

namespace twp::cli {

namespace fs = std::filesystem;

namespace {

struct PeerArgs {
  std::string coordinator;
  std::string listen;
  uint32_t interval_ms = 10000;
  std::string log_dir;
  uint32_t rotate_s = 3600;
  uint32_t expiry_ms = 60000;
};

class PeerRuntime {
 public:
  explicit PeerRuntime(const PeerArgs& args) : args_(args) {}

  int run() {
    udp_ = udp_bind(Endpoint::parse(args_.listen));
    control_ = tcp_connect(Endpoint::parse(args_.coordinator));
    control_reader_ = std::make_unique<StreamReader>(control_);

    send_line(control_, "REGISTER " + args_.listen);
    wait_for_start();

    PeerConfig cfg;
    cfg.self_id = self_id_;
    cfg.roster_size = roster_.size();
    cfg.probe_interval_ms = roster_.interval_ms;
    cfg.pending_expiry_ms = args_.expiry_ms;
    cfg.rotation_interval_s = args_.rotate_s;
    peer_ = std::make_unique<Peer>(cfg);

    fs::create_directories(fs::path(args_.log_dir) /
                           std::to_string(self_id_));
    std::cerr << "peer " << static_cast<int>(self_id_) << ": running, "
              << roster_.size() << " nodes, interval "
              << roster_.interval_ms << " ms\n";

    loop();

    seal(peer_->rotate_now());
    drain_uploads();
    send_line(control_, "UPLOAD-DONE " + std::to_string(self_id_));
    control_reader_->read_line();  // OK
    std::cerr << "peer " << static_cast<int>(self_id_) << ": done\n";
    return kExitOk;
  }

 private:
  void wait_for_start() {
    bool have_roster = false;
    for (;;) {
      auto line = control_reader_->read_line();
      if (!line) throw std::runtime_error("coordinator closed during setup");
      if (line->empty()) continue;
      ControlMsg msg = parse_control(*line);
      if (msg.verb == ControlMsg::Verb::Err)
        throw std::runtime_error("coordinator refused: " + *line);
      if (msg.verb == ControlMsg::Verb::RosterLine) {
        roster_.interval_ms = static_cast<uint32_t>(std::stoul(msg.args[0]));
        roster_.addresses.assign(msg.args.begin() + 1, msg.args.end());
        have_roster = true;
        bool found = false;
        for (std::size_t i = 0; i < roster_.addresses.size(); ++i) {
          if (roster_.addresses[i] == args_.listen) {
            self_id_ = static_cast<NodeId>(i);
            found = true;
          }
        }
        if (!found)
          throw std::runtime_error("own address " + args_.listen +
                                   " not in roster");
      } else if (msg.verb == ControlMsg::Verb::Start) {
        if (!have_roster)
          throw std::runtime_error("START before ROSTER");
        return;
      }
    }
  }

  void loop() {
    uint64_t next_tick = wall_clock_ms();
    while (!stopping_) {
      uint64_t now = wall_clock_ms();
      int timeout =
          now >= next_tick
              ? 0
              : static_cast<int>(std::min<uint64_t>(next_tick - now, 250));
      pollfd fds[2] = {{udp_.fd(), POLLIN, 0}, {control_.fd(), POLLIN, 0}};
      ::poll(fds, 2, timeout);

      if (fds[0].revents & POLLIN) on_udp();
      if (fds[1].revents & (POLLIN | POLLHUP | POLLERR)) on_control();

      now = wall_clock_ms();
      if (now >= next_tick) {
        perform(peer_->on_tick(now));
        if (auto segment = peer_->rotate_if_due(now)) seal(std::move(*segment));
        next_tick += roster_.interval_ms;
      }
      pump_uploads();
    }
  }

  void on_udp() {
    for (;;) {
      // Drain without blocking: poll said readable, read once then re-poll.
      auto packet = udp_recv(udp_);
      if (!packet) return;
      auto& [payload, sender] = *packet;
      TwpMessage msg;
      try {
        msg = decode_message(payload);
      } catch (const CodecError& e) {
        std::cerr << "peer: dropping datagram from " << sender.to_string()
                  << ": " << e.what() << '\n';
        return;
      }
      auto from = id_of(sender.to_string());
      if (!from) {
        std::cerr << "peer: datagram from unknown " << sender.to_string()
                  << '\n';
        return;
      }
      perform(peer_->on_message(msg, *from, wall_clock_ms()));
      return;
    }
  }

  void on_control() {
    if (!control_reader_->feed()) {
      std::cerr << "peer: coordinator connection closed\n";
      stopping_ = true;
      return;
    }
    while (auto line = control_reader_->take_line()) {
      if (line->empty()) continue;
      ControlMsg msg = parse_control(*line);
      if (msg.verb == ControlMsg::Verb::Stop) {
        stopping_ = true;
      } else if (msg.verb == ControlMsg::Verb::UploadGrant) {
        grant_open_ = true;
      } else if (msg.verb == ControlMsg::Verb::Ok) {
        // Ack of a finished upload.
      } else if (msg.verb == ControlMsg::Verb::Err) {
        std::cerr << "peer: coordinator error: " << *line << '\n';
      }
    }
  }

  std::optional<NodeId> id_of(const std::string& addr) const {
    for (std::size_t i = 0; i < roster_.addresses.size(); ++i)
      if (roster_.addresses[i] == addr) return static_cast<NodeId>(i);
    return std::nullopt;
  }

  void perform(const std::vector<SendAction>& actions) {
    for (const auto& action : actions) {
      auto bytes = encode_message(action.msg);
      udp_send(udp_, Endpoint::parse(roster_.addresses[action.to]), bytes);
    }
  }

  void seal(LogSegment segment) {
    std::vector<uint8_t> bytes;
    bytes.reserve(segment.records.size() * kRecordSize);
    for (const auto& rec : segment.records) append_record(bytes, rec);
    fs::path path = fs::path(args_.log_dir) / std::to_string(self_id_) /
                    (std::to_string(segment.index) + ".twplog");
    write_file_bytes(path, bytes);
    upload_queue_.push_back({segment.index, std::move(bytes)});
  }

  // One upload in flight at a time; GRANT arrives on the control stream.
  void pump_uploads() {
    if (upload_queue_.empty()) return;
    if (!awaiting_grant_ && !grant_open_) {
      const auto& [index, bytes] = upload_queue_.front();
      send_line(control_, "UPLOAD-REQ " + std::to_string(self_id_) + " " +
                              std::to_string(index) + " " +
                              std::to_string(bytes.size()));
      awaiting_grant_ = true;
    }
    if (grant_open_) {
      const auto& [index, bytes] = upload_queue_.front();
      send_all(control_, bytes);
      upload_queue_.pop_front();
      awaiting_grant_ = false;
      grant_open_ = false;
    }
  }

  void drain_uploads() {
    while (!upload_queue_.empty()) {
      if (!awaiting_grant_ && !grant_open_) {
        const auto& [index, bytes] = upload_queue_.front();
        send_line(control_, "UPLOAD-REQ " + std::to_string(self_id_) + " " +
                                std::to_string(index) + " " +
                                std::to_string(bytes.size()));
        awaiting_grant_ = true;
      }
      auto line = control_reader_->read_line();
      if (!line) throw std::runtime_error("coordinator closed during upload");
      if (line->empty()) continue;
      ControlMsg msg = parse_control(*line);
      if (msg.verb == ControlMsg::Verb::UploadGrant) {
        const auto& [index, bytes] = upload_queue_.front();
        send_all(control_, bytes);
        upload_queue_.pop_front();
        awaiting_grant_ = false;
      } else if (msg.verb == ControlMsg::Verb::Err) {
        throw std::runtime_error("upload refused: " + *line);
      }
      // OK lines and stray STOPs are fine here.
    }
  }

  PeerArgs args_;
  Socket udp_;
  Socket control_;
  std::unique_ptr<StreamReader> control_reader_;
  Roster roster_;
  NodeId self_id_ = 0;
  std::unique_ptr<Peer> peer_;
  std::deque<std::pair<uint64_t, std::vector<uint8_t>>> upload_queue_;
  bool awaiting_grant_ = false;
  bool grant_open_ = false;
  bool stopping_ = false;
};

}  // namespace

void setup_peer(CLI::App& app) {
  auto args = std::make_shared<PeerArgs>();
  CLI::App* cmd = app.add_subcommand("peer", "Run a measurement peer");
  cmd->add_option("--coordinator", args->coordinator,
                  "Coordinator TCP address host:port")
      ->required();
  cmd->add_option("--listen", args->listen,
                  "UDP probe address host:port; also the advertised identity")
      ->required();
  cmd->add_option("--interval-ms", args->interval_ms,
                  "Fallback probe interval; the roster's value wins");
  cmd->add_option("--log-dir", args->log_dir, "Local segment directory")
      ->required();
  cmd->add_option("--rotate-s", args->rotate_s, "Log rotation interval");
  cmd->add_option("--expiry-ms", args->expiry_ms,
                  "Pending-round expiry; late replies are dropped");
  cmd->callback([args]() {
    PeerRuntime runtime(*args);
    runtime.run();
  });
}

}  // namespace twp::cli
