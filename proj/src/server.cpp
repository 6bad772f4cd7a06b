#include "gridground/server.hpp"

#include <chrono>
#include <httplib.h>

#include "gridground/errors.hpp"

namespace gridground {

SessionHub::SessionHub(Config config, ParamStore params) : config_(std::move(config)), params_(std::move(params)) {}

std::shared_ptr<SessionHub::Entry> SessionHub::entry(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return it->second;
}

bool SessionHub::exists(const std::string& id) {
  std::lock_guard lock(mu_);
  return sessions_.count(id) > 0;
}

std::string SessionHub::create(const Json& request) {
  SessionSnapshot snap;
  if (request.contains("seed")) {
    snap = generated_snapshot(config_, request.at("seed").get<std::uint64_t>());
  } else {
    const std::string fixture = request.value("fixture", std::string("showcase"));
    if (fixture != "showcase") throw Error(ErrorCode::FormatError, "unknown fixture '" + fixture + "'");
    snap = showcase_snapshot(config_.grid);
  }
  auto e = std::make_shared<Entry>();
  e->session = std::make_unique<Session>(config_, params_, std::move(snap));
  e->events.push_back({0, "snapshot", snapshot_json(*e->session)});
  std::lock_guard lock(mu_);
  const std::string id = "s" + std::to_string(next_id_++);
  sessions_[id] = std::move(e);
  return id;
}

Json SessionHub::state(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mu);
  return snapshot_json(*e->session);
}

Json SessionHub::instruct(const std::string& id, const std::string& text) {
  auto e = entry(id);
  Json out;
  {
    std::lock_guard lock(e->mu);
    const InstructionResult r = e->session->submit(text);
    out = result_json(r);
    Json state = snapshot_json(*e->session);
    Json delta{{"entry", state["log"].back()},
               {"action", out["action"]},
               {"posterior", out["posterior"]},
               {"anchors", state["anchors"]},
               {"held", state["held"]},
               {"clock", state["clock"]}};
    out["state"] = std::move(state);
    e->events.push_back({static_cast<std::int64_t>(e->events.size()), "instruction", std::move(delta)});
  }
  e->cv.notify_all();
  return out;
}

std::int64_t SessionHub::latest(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->mu);
  return static_cast<std::int64_t>(e->events.size()) - 1;
}

std::vector<SessionEvent> SessionHub::events_after(const std::string& id, std::int64_t after, int wait_ms) {
  auto e = entry(id);
  std::unique_lock lock(e->mu);
  const auto ready = [&] { return static_cast<std::int64_t>(e->events.size()) - 1 > after; };
  if (!ready()) e->cv.wait_for(lock, std::chrono::milliseconds(wait_ms), ready);
  std::vector<SessionEvent> out;
  for (auto i = std::max<std::int64_t>(after + 1, 0); i < static_cast<std::int64_t>(e->events.size()); ++i) {
    out.push_back(e->events[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, Json{{"error", code}, {"message", message}}, status);
}

std::string sse_frame(const SessionEvent& ev) {
  return "id: " + std::to_string(ev.seq) + "\nevent: " + ev.type + "\ndata: " + ev.data.dump() + "\n\n";
}

}  // namespace

HttpServer::HttpServer(SessionHub& hub) : hub_(hub), http_(std::make_unique<httplib::Server>()) {
  auto& s = *http_;

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e.code() == ErrorCode::UnknownSession ? 404 : 400, std::string(to_string(e.code())), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "FormatError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  });

  s.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
    const std::string id = hub_.create(body);
    send_json(res, Json{{"id", id}, {"state", hub_.state(id)}}, 201);
  });

  s.Get(R"(/session/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, hub_.state(req.matches[1]));
  });

  s.Post(R"(/session/([^/]+)/instruction)", [this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body);
    send_json(res, hub_.instruct(req.matches[1], body.at("text").get<std::string>()));
  });

  s.Get(R"(/session/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!hub_.exists(id)) {
      send_error(res, 404, "UnknownSession", "no session '" + id + "'");
      return;
    }
    // a fresh subscriber gets the current state first; a resuming one gets
    // only what it missed
    std::int64_t cursor = -1;
    bool resume = false;
    if (req.has_header("Last-Event-ID")) {
      cursor = std::stoll(req.get_header_value("Last-Event-ID"));
      resume = true;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, id, cursor, resume, first = true](std::size_t, httplib::DataSink& sink) mutable {
          if (first) {
            first = false;
            if (!resume) {
              cursor = hub_.latest(id);
              const SessionEvent snap{cursor, "snapshot", hub_.state(id)};
              const std::string f = sse_frame(snap);
              return sink.write(f.data(), f.size());
            }
          }
          const auto events = hub_.events_after(id, cursor, 1000);
          if (events.empty()) {
            static const std::string ping = ": keepalive\n\n";
            return sink.write(ping.data(), ping.size());
          }
          for (const auto& ev : events) {
            const std::string f = sse_frame(ev);
            if (!sink.write(f.data(), f.size())) return false;
            cursor = ev.seq;
          }
          return true;
        });
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return http_->listen_after_bind(); }

void HttpServer::stop() { http_->stop(); }

}  // namespace gridground
