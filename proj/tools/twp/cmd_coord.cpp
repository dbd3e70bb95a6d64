#include <poll.h>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "commands.hpp"
#include "io_util.hpp"
#include "net.hpp"
#include "twp/coordinator.hpp"

namespace twp::cli {

namespace fs = std::filesystem;

namespace {

struct CoordArgs {
  std::string listen;
  std::size_t max_uploads = 4;
  uint32_t duration_s = 60;
  std::string out_dir;
  std::size_t nodes = 0;
  uint32_t interval_ms = 10000;
};

struct Session {
  Socket sock;
  std::unique_ptr<StreamReader> reader;
  std::string udp_addr;  // empty until REGISTER
  // Upload in progress: bytes still expected, target path.
  std::size_t upload_remaining = 0;
  std::size_t pending_bytes = 0;  // announced size, counts down after grant
  fs::path upload_path;
  std::vector<uint8_t> upload_buf;
  std::optional<NodeId> uploading_node;
  uint64_t uploading_segment = 0;
  bool closed = false;
};

class CoordServer {
 public:
  explicit CoordServer(const CoordArgs& args)
      : args_(args), coord_(args.interval_ms, args.max_uploads) {}

  int run() {
    listener_ = tcp_listen(Endpoint::parse(args_.listen));
    std::cerr << "coord: listening on " << args_.listen << ", waiting for "
              << args_.nodes << " nodes\n";
    fs::create_directories(args_.out_dir);

    while (!(coord_.phase() == Coordinator::Phase::Finalizing &&
             coord_.all_done())) {
      pump();
    }
    std::cerr << "coord: all nodes done\n";
    return kExitOk;
  }

 private:
  void pump() {
    std::vector<pollfd> fds;
    fds.push_back({listener_.fd(), POLLIN, 0});
    for (auto& [fd, session] : sessions_)
      fds.push_back({fd, POLLIN, 0});

    uint64_t now = wall_clock_ms();
    int timeout = 250;
    if (started_ && coord_.phase() == Coordinator::Phase::Running) {
      uint64_t stop_at = start_ms_ + uint64_t{args_.duration_s} * 1000;
      timeout = now >= stop_at ? 0 : static_cast<int>(
          std::min<uint64_t>(stop_at - now, 250));
    }
    ::poll(fds.data(), fds.size(), timeout);

    if (fds[0].revents & POLLIN) accept_one();
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR))
        service(sessions_.at(fds[i].fd));
    }
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->second.closed)
        it = sessions_.erase(it);
      else
        ++it;
    }

    if (started_ && coord_.phase() == Coordinator::Phase::Running &&
        wall_clock_ms() >= start_ms_ + uint64_t{args_.duration_s} * 1000) {
      coord_.finalize();
      std::cerr << "coord: duration elapsed, stopping peers\n";
      for (auto& [fd, session] : sessions_)
        if (!session.udp_addr.empty()) send_line(session.sock, "STOP");
    }
  }

  void accept_one() {
    Socket sock = tcp_accept(listener_);
    int fd = sock.fd();
    Session session;
    session.sock = std::move(sock);
    session.reader = std::make_unique<StreamReader>(session.sock);
    sessions_.emplace(fd, std::move(session));
  }

  void service(Session& session) {
    if (!session.reader->feed()) {
      finish_connection(session);
      return;
    }
    for (;;) {
      if (session.upload_remaining > 0) {
        auto chunk = session.reader->take_bytes(session.upload_remaining);
        if (chunk.empty()) return;
        session.upload_buf.insert(session.upload_buf.end(), chunk.begin(),
                                  chunk.end());
        session.upload_remaining -= chunk.size();
        if (session.upload_remaining == 0) complete_upload(session);
        continue;
      }
      auto line = session.reader->take_line();
      if (!line) return;
      if (line->empty()) continue;
      handle_line(session, *line);
      if (session.closed) return;
    }
  }

  void handle_line(Session& session, const std::string& line) {
    ControlMsg msg;
    try {
      msg = parse_control(line);
    } catch (const std::exception& e) {
      send_line(session.sock, "ERR " + std::string(e.what()));
      return;
    }
    switch (msg.verb) {
      case ControlMsg::Verb::Register: return handle_register(session, msg);
      case ControlMsg::Verb::UploadReq: return handle_upload_req(session, msg);
      case ControlMsg::Verb::UploadDone: return handle_upload_done(session, msg);
      default:
        send_line(session.sock, "ERR unexpected verb");
    }
  }

  void handle_register(Session& session, const ControlMsg& msg) {
    const std::string& addr = msg.args[0];
    try {
      coord_.register_address(addr);
    } catch (const CoordError& e) {
      send_line(session.sock, "ERR " + std::string(e.what()));
      return;
    }
    session.udp_addr = addr;
    if (coord_.phase() == Coordinator::Phase::Registering &&
        coord_.node_count() >= args_.nodes) {
      coord_.close_registration();
      start_ms_ = wall_clock_ms();
      started_ = true;
      std::cerr << "coord: roster complete, starting\n";
      for (auto& [fd, other] : sessions_) {
        if (other.udp_addr.empty()) continue;
        send_line(other.sock, coord_.roster().to_line());
        send_line(other.sock, "START");
      }
      write_file_text(fs::path(args_.out_dir) / "roster.txt",
                      coord_.roster().to_file_text());
    } else if (coord_.phase() != Coordinator::Phase::Registering) {
      // Rejoin: replay the roster; a finalizing experiment also stops it.
      send_line(session.sock, coord_.roster().to_line());
      send_line(session.sock, "START");
      if (coord_.phase() == Coordinator::Phase::Finalizing)
        send_line(session.sock, "STOP");
    }
  }

  void handle_upload_req(Session& session, const ControlMsg& msg) {
    NodeId node = static_cast<NodeId>(std::stoul(msg.args[0]));
    uint64_t segment = std::stoull(msg.args[1]);
    std::size_t nbytes = std::stoull(msg.args[2]);
    GrantResult result;
    try {
      result = coord_.grant_upload(node);
    } catch (const CoordError& e) {
      send_line(session.sock, "ERR " + std::string(e.what()));
      return;
    }
    session.uploading_node = node;
    session.uploading_segment = segment;
    session.upload_path = fs::path(args_.out_dir) / std::to_string(node) /
                          (std::to_string(segment) + ".twplog");
    session.pending_bytes = nbytes;
    if (result == GrantResult::Granted)
      begin_upload(session);
    else
      waiting_.push_back(&session);
  }

  void begin_upload(Session& session) {
    session.upload_remaining = session.pending_bytes;
    session.upload_buf.clear();
    send_line(session.sock,
              "UPLOAD-GRANT " + std::to_string(*session.uploading_node) + " " +
                  std::to_string(session.uploading_segment));
    if (session.upload_remaining == 0) complete_upload(session);
  }

  void complete_upload(Session& session) {
    fs::create_directories(session.upload_path.parent_path());
    write_file_bytes(session.upload_path, session.upload_buf);
    session.upload_buf.clear();
    send_line(session.sock, "OK " + std::to_string(session.uploading_segment));
    NodeId node = *session.uploading_node;
    session.uploading_node.reset();
    release_and_grant_next(node);
  }

  void release_and_grant_next(NodeId node) {
    auto next = coord_.release_upload(node);
    if (!next) return;
    // The grant goes to the oldest waiting session of that node.
    for (auto it = waiting_.begin(); it != waiting_.end(); ++it) {
      Session* s = *it;
      if (s->uploading_node && *s->uploading_node == *next && !s->closed) {
        waiting_.erase(it);
        begin_upload(*s);
        return;
      }
    }
  }

  void handle_upload_done(Session& session, const ControlMsg& msg) {
    NodeId node = static_cast<NodeId>(std::stoul(msg.args[0]));
    try {
      coord_.mark_done(node);
    } catch (const CoordError& e) {
      send_line(session.sock, "ERR " + std::string(e.what()));
      return;
    }
    send_line(session.sock, "OK");
  }

  void finish_connection(Session& session) {
    if (session.uploading_node && session.upload_remaining > 0) {
      // Died mid-upload: free the slot, drop the partial segment.
      release_and_grant_next(*session.uploading_node);
    }
    std::erase(waiting_, &session);
    session.closed = true;
  }

  CoordArgs args_;
  Coordinator coord_;
  Socket listener_;
  std::map<int, Session> sessions_;
  std::vector<Session*> waiting_;
  uint64_t start_ms_ = 0;
  bool started_ = false;
};

}  // namespace

void setup_coord(CLI::App& app) {
  auto args = std::make_shared<CoordArgs>();
  CLI::App* cmd = app.add_subcommand(
      "coord", "Run the experiment coordinator");
  cmd->add_option("--listen", args->listen, "TCP listen address host:port")
      ->required();
  cmd->add_option("--max-uploads", args->max_uploads,
                  "Concurrent upload slots");
  cmd->add_option("--duration", args->duration_s,
                  "Measurement duration in seconds")
      ->required();
  cmd->add_option("--out-dir", args->out_dir,
                  "Directory for uploaded segments and the roster")
      ->required();
  cmd->add_option("--nodes", args->nodes,
                  "Close registration after this many peers")
      ->required();
  cmd->add_option("--interval-ms", args->interval_ms,
                  "Probe interval distributed in the roster");
  cmd->callback([args]() {
    CoordServer server(*args);
    server.run();
  });
}

}  // namespace twp::cli
