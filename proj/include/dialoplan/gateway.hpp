#pragma once

// JSON-over-HTTP front end for dialogue sessions. The handlers are plain
// functions from request body to (status, JSON) so they can be tested without
// a socket; mount() wires them into an httplib server.

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "dialoplan/orchestrator.hpp"
#include "dialoplan/runtime_fixtures.hpp"

namespace httplib {
class Server;
}

namespace dialoplan {

struct GatewayOptions {
  std::chrono::seconds idle_ttl{30 * 60};
  /// Accept `{"domain": ..., "problem": ...}` PDDL bodies on POST /sessions.
  bool allow_adhoc_problems = true;
  /// Extra fixtures: each subdirectory holding domain.pddl and problem.pddl
  /// becomes a fixture named after the directory, run with generic_binding.
  std::optional<std::string> fixtures_dir;
  fixtures::RuntimeOptions runtime;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

class Gateway {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  /// Solves every bundled fixture up front. Throws on unreadable extra
  /// fixtures.
  explicit Gateway(GatewayOptions options = {});

  /// POST /sessions: `{"fixture": name}` or `{"domain": pddl, "problem": pddl}`,
  /// optionally with `"context"` and `"max_loop_visits"`. 201 on success;
  /// 400 bad body, 404 unknown fixture, 422 unsolvable.
  HttpResponse create_session(const std::string& body);
  /// POST /sessions/{id}/message with `{"utterance": text}`. 404 unknown id,
  /// 410 expired, 409 not awaiting input or already handling a message.
  HttpResponse post_message(const std::string& id, const std::string& body);
  /// GET /sessions/{id}
  HttpResponse get_session(const std::string& id);
  /// GET /sessions/{id}/plan: the plan document plus a `cursor`.
  HttpResponse get_plan(const std::string& id);
  /// GET /fixtures
  HttpResponse list_fixtures() const;

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t sweep();
  void set_clock(Clock clock) { clock_ = std::move(clock); }

  const PlanLibrary& library() const { return *library_; }

  void mount(httplib::Server& server);

 private:
  struct Record {
    std::unique_ptr<Session> session;
    std::shared_ptr<PlanLibrary> adhoc;  // owns the plan of PDDL-bodied sessions
    std::mutex busy;
    std::chrono::steady_clock::time_point last_active;
  };

  /// Looks up a live record and refreshes its idle timer; fills `error`
  /// with 404 or 410 otherwise.
  std::shared_ptr<Record> lookup(const std::string& id, HttpResponse& error);

  GatewayOptions options_;
  std::shared_ptr<PlanLibrary> library_;
  Clock clock_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Record>> sessions_;
  std::set<std::string> expired_;
  std::atomic<std::uint64_t> next_id_{1};
};

/// Blocks serving on host:port until the server is stopped.
bool serve(Gateway& gateway, const std::string& host, int port);

}  // namespace dialoplan
