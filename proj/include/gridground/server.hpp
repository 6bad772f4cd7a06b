#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gridground/session.hpp"

namespace httplib {
class Server;
}

namespace gridground {

struct SessionEvent {
  std::int64_t seq = 0;
  std::string type;  // "snapshot" | "instruction"
  Json data;
};

/// Sessions behind the JSON API. Each session has its own lock; the map is
/// guarded separately so sessions do not block each other.
class SessionHub {
 public:
  SessionHub(Config config, ParamStore params);

  /// {"fixture": "showcase"} or {"seed": n}. Returns the new id.
  std::string create(const Json& request);
  Json state(const std::string& id);
  Json instruct(const std::string& id, const std::string& text);

  /// Events after `after` (exclusive). Blocks up to `wait_ms` when none are
  /// ready. Empty result on timeout.
  std::vector<SessionEvent> events_after(const std::string& id, std::int64_t after, int wait_ms);
  std::int64_t latest(const std::string& id);
  bool exists(const std::string& id);

 private:
  struct Entry {
    std::mutex mu;
    std::condition_variable cv;
    std::unique_ptr<Session> session;
    std::vector<SessionEvent> events;
  };
  std::shared_ptr<Entry> entry(const std::string& id);

  Config config_;
  ParamStore params_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  int next_id_ = 1;
};

/// HTTP front end:
///   POST /session                    -> {"id", "state"}
///   GET  /session/:id/state          -> state
///   POST /session/:id/instruction    {"text"} -> {"action", "graph", "executed", "posterior", "attention", "state"}
///   GET  /session/:id/events         server-sent events; Last-Event-ID resumes
class HttpServer {
 public:
  explicit HttpServer(SessionHub& hub);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free one. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool serve();
  void stop();

 private:
  SessionHub& hub_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace gridground
