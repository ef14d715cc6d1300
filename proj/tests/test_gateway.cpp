#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "dialoplan/error.hpp"
#include "dialoplan/gateway.hpp"

using namespace dialoplan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

/// Gateway served on a random local port, with a hand-driven clock.
class Served {
 public:
  explicit Served(GatewayOptions options = {}) : gateway_(std::move(options)) {
    gateway_.set_clock([this] { return now_; });
    gateway_.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Served() {
    server_.stop();
    thread_.join();
  }

  HttpResponse post(const std::string& path, const std::string& body) {
    httplib::Client c("127.0.0.1", port_);
    auto res = c.Post(path, body, "application/json");
    REQUIRE(res);
    last_headers_ = res->headers;
    return {res->status, json::parse(res->body)};
  }
  HttpResponse post(const std::string& path, const json& body) { return post(path, body.dump()); }
  HttpResponse get(const std::string& path) {
    httplib::Client c("127.0.0.1", port_);
    auto res = c.Get(path);
    REQUIRE(res);
    last_headers_ = res->headers;
    return {res->status, json::parse(res->body)};
  }
  httplib::Result options(const std::string& path) {
    httplib::Client c("127.0.0.1", port_);
    return c.Options(path);
  }

  void advance(std::chrono::seconds s) { now_ += s; }
  const httplib::Headers& headers() const { return last_headers_; }
  Gateway& gateway() { return gateway_; }

 private:
  Gateway gateway_;
  Clock::time_point now_ = Clock::now();
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  httplib::Headers last_headers_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fixture_text(const std::string& name, const std::string& file) {
  return read_file(std::string(DIALOPLAN_SOURCE_DIR) + "/fixtures/" + name + "/" + file);
}

const char* kDeadEndDomain = R"(
(define (domain dead)
  (:requirements :strips :non-deterministic)
  (:predicates (g) (stuck))
  (:action try
    :parameters ()
    :precondition (and (not (stuck)))
    :effect (oneof (g) (stuck))))
)";

const char* kDeadEndProblem = "(define (problem p) (:domain dead) (:init) (:goal (g)))";

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("fixture listing") {
    Served s;
    const auto r = s.get("/fixtures");
    CHECK(r.status == 200);
    std::map<std::string, json> by_name;
    for (const auto& f : r.body["fixtures"]) by_name[f["name"]] = f;
    CHECK(by_name.size() == 5);
    CHECK(by_name.at("luggage")["plan_nodes"] == 5);
    CHECK(by_name.at("luggage")["intents"] == json::array({"check-in-luggage"}));
    CHECK(by_name.at("trip")["plan_nodes"] == 18);
  }

  TEST_CASE("luggage conversation over HTTP") {
    Served s;
    auto r = s.post("/sessions", json{{"fixture", "luggage"}});
    REQUIRE(r.status == 201);
    const std::string id = r.body["id"];
    CHECK(id == "s1");
    CHECK(r.body["status"] == "awaiting-user");
    CHECK(r.body["current_action"] == "ask-checkin-luggage");
    REQUIRE_FALSE(r.body["events"].empty());
    CHECK(r.body["events"][0]["text"] == "Would you like to check in any luggage?");

    auto plan = s.get("/sessions/" + id + "/plan");
    CHECK(plan.status == 200);
    CHECK(plan.body["version"] == "dialoplan-plan/1");
    CHECK(plan.body["cursor"]["action"] == "ask-checkin-luggage");
    CHECK(plan.body["cursor"]["node"] == plan.body["initial"]);

    r = s.post("/sessions/" + id + "/message", json{{"utterance", "yes"}});
    CHECK(r.status == 200);
    CHECK(r.body["status"] == "awaiting-user");
    CHECK(r.body["current_action"] == "ask-how-many");
    CHECK(r.body["branch_taken"] == "[ok-checkin]");
    plan = s.get("/sessions/" + id + "/plan");
    CHECK(plan.body["cursor"]["action"] == "ask-how-many");
    CHECK(plan.body["path"].size() == 2);

    r = s.post("/sessions/" + id + "/message", json{{"utterance", "2"}});
    CHECK(r.body["status"] == "done");
    CHECK(r.body["branch_taken"] == "[have-number]");

    const auto state = s.get("/sessions/" + id);
    CHECK(state.status == 200);
    CHECK(state.body["status"] == "done");
    CHECK(state.body["path"] ==
          json::array({"ask-checkin-luggage", "ask-how-many", "set-luggage-checkin", "Done"}));
    CHECK(state.body["current_node"] == r.body["current_node"]);

    r = s.post("/sessions/" + id + "/message", json{{"utterance", "3"}});
    CHECK(r.status == 409);
    CHECK(r.body["status"] == "done");
  }

  TEST_CASE("reject ends the session at once") {
    Served s;
    const std::string id = s.post("/sessions", json{{"fixture", "luggage"}}).body["id"];
    const auto r = s.post("/sessions/" + id + "/message", json{{"utterance", "no"}});
    CHECK(r.status == 200);
    CHECK(r.body["status"] == "done");
  }

  TEST_CASE("create errors") {
    Served s;
    CHECK(s.post("/sessions", json{{"fixture", "nope"}}).status == 404);
    CHECK(s.post("/sessions", std::string("{not json")).status == 400);
    CHECK(s.post("/sessions", json::array()).status == 400);
    CHECK(s.post("/sessions", json{{"fixture", 3}}).status == 400);
    CHECK(s.post("/sessions", json::object()).status == 400);
    CHECK(s.post("/sessions", json{{"fixture", "luggage"}, {"context", {{"ghost", 1}}}}).status == 400);
    CHECK(s.post("/sessions", json{{"fixture", "luggage"}, {"context", {{"checkin", {{"x", 1}}}}}}).status == 400);
    CHECK(s.post("/sessions", json{{"fixture", "luggage"}, {"max_loop_visits", "many"}}).status == 400);
    CHECK(s.post("/sessions", json{{"fixture", "luggage"}, {"max_loop_visits", 0}}).status == 400);

    const auto parse = s.post("/sessions", json{{"domain", "(define (domain x)\n  (:predicates (a)"}, {"problem", "()"}});
    CHECK(parse.status == 400);
    CHECK(parse.body["line"].get<int>() > 0);

    const auto dead = s.post("/sessions", json{{"domain", kDeadEndDomain}, {"problem", kDeadEndProblem}});
    CHECK(dead.status == 422);
  }

  TEST_CASE("context that already satisfies the goal") {
    Served s;
    const auto r = s.post("/sessions", json{{"fixture", "luggage"}, {"context", {{"checkin", false}}}});
    CHECK(r.status == 201);
    CHECK(r.body["status"] == "done");
    CHECK(r.body["current_action"] == "Done");
  }

  TEST_CASE("PDDL bodies run with the generic binding") {
    Served s;
    const auto r = s.post("/sessions", json{{"domain", fixture_text("luggage", "domain.pddl")},
                                            {"problem", fixture_text("luggage", "problem.pddl")}});
    REQUIRE(r.status == 201);
    CHECK(r.body["plan"] == "adhoc");
    const std::string id = r.body["id"];
    const auto m = s.post("/sessions/" + id + "/message", json{{"utterance", "[no-checkin]"}});
    CHECK(m.body["status"] == "done");

    GatewayOptions closed;
    closed.allow_adhoc_problems = false;
    Served t(closed);
    CHECK(t.post("/sessions", json{{"domain", "x"}, {"problem", "y"}}).status == 400);
  }

  TEST_CASE("unknown sessions and bad messages") {
    Served s;
    CHECK(s.get("/sessions/s99").status == 404);
    CHECK(s.get("/sessions/s99/plan").status == 404);
    CHECK(s.post("/sessions/s99/message", json{{"utterance", "hi"}}).status == 404);
    const std::string id = s.post("/sessions", json{{"fixture", "luggage"}}).body["id"];
    CHECK(s.post("/sessions/" + id + "/message", std::string("nope")).status == 400);
    CHECK(s.post("/sessions/" + id + "/message", json{{"text", "hi"}}).status == 400);
    CHECK(s.post("/sessions/" + id + "/message", json{{"utterance", 5}}).status == 400);
  }

  TEST_CASE("idle sessions expire with 410") {
    GatewayOptions opts;
    opts.idle_ttl = std::chrono::minutes(30);
    Served s(opts);
    const std::string a = s.post("/sessions", json{{"fixture", "luggage"}}).body["id"];
    const std::string b = s.post("/sessions", json{{"fixture", "luggage"}}).body["id"];
    s.advance(std::chrono::minutes(20));
    CHECK(s.get("/sessions/" + a).status == 200);  // refreshes a
    s.advance(std::chrono::minutes(20));
    CHECK(s.get("/sessions/" + a).status == 200);
    CHECK(s.get("/sessions/" + b).status == 410);
    CHECK(s.post("/sessions/" + b + "/message", json{{"utterance", "yes"}}).status == 410);
    s.advance(std::chrono::minutes(31));
    CHECK(s.gateway().sweep() == 1);
    CHECK(s.get("/sessions/" + a + "/plan").status == 410);
  }

  TEST_CASE("a busy session answers 409 with a retry hint") {
    std::promise<void> entered, release;
    std::shared_future<void> released = release.get_future().share();
    httplib::Server weather;
    weather.Post("/weather", [&](const httplib::Request&, httplib::Response& res) {
      entered.set_value();
      released.wait();
      res.set_content(R"({"weather-ok": true})", "application/json");
    });
    const int port = weather.bind_to_any_port("127.0.0.1");
    std::thread weather_thread([&] { weather.listen_after_bind(); });
    weather.wait_until_ready();

    GatewayOptions opts;
    opts.runtime.weather_url = "http://127.0.0.1:" + std::to_string(port) + "/weather";
    {
      Served s(opts);
      const std::string id = s.post("/sessions", json{{"fixture", "trip"}}).body["id"];
      const std::string msg = "/sessions/" + id + "/message";
      CHECK(s.post(msg, json{{"utterance", "from London"}}).status == 200);
      CHECK(s.post(msg, json{{"utterance", "yes"}}).status == 200);
      auto slow = std::async(std::launch::async, [&] { return s.gateway().post_message(id, R"({"utterance": "next friday"})"); });
      entered.get_future().wait();
      const auto busy = s.post(msg, json{{"utterance", "hello"}});
      CHECK(busy.status == 409);
      CHECK(busy.body["retry"] == true);
      release.set_value();
      const auto done = slow.get();
      CHECK(done.status == 200);
      CHECK(done.body["status"] == "done");
    }
    weather.stop();
    weather_thread.join();
  }

  TEST_CASE("CORS headers and preflight") {
    Served s;
    s.get("/fixtures");
    CHECK(s.headers().find("Access-Control-Allow-Origin") != s.headers().end());
    auto pre = s.options("/sessions");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
  }

  TEST_CASE("HTTP answers match direct handler calls") {
    Served s;
    Gateway direct;
    const std::vector<std::string> turns = {"asdfgh", "yes", "three"};
    auto over_http = s.post("/sessions", json{{"fixture", "luggage"}});
    auto in_process = direct.create_session(R"({"fixture": "luggage"})");
    CHECK(over_http.status == in_process.status);
    CHECK(over_http.body == in_process.body);
    const std::string id = over_http.body["id"];
    for (const auto& t : turns) {
      const json body{{"utterance", t}};
      over_http = s.post("/sessions/" + id + "/message", body);
      in_process = direct.post_message(id, body.dump());
      CHECK(over_http.status == in_process.status);
      CHECK(over_http.body == in_process.body);
    }
    CHECK(s.get("/sessions/" + id).body == direct.get_session(id).body);
    CHECK(s.get("/sessions/" + id + "/plan").body == direct.get_plan(id).body);
    CHECK(s.get("/fixtures").body == direct.list_fixtures().body);
  }

  TEST_CASE("extra fixtures directory") {
    const fs::path dir = fs::temp_directory_path() / ("dialoplan-gw-" + std::to_string(::getpid()));
    fs::create_directories(dir / "bags");
    fs::create_directories(dir / "empty");
    fs::copy_file(std::string(DIALOPLAN_SOURCE_DIR) + "/fixtures/luggage/domain.pddl", dir / "bags" / "domain.pddl");
    fs::copy_file(std::string(DIALOPLAN_SOURCE_DIR) + "/fixtures/luggage/problem.pddl", dir / "bags" / "problem.pddl");
    {
      GatewayOptions opts;
      opts.fixtures_dir = dir.string();
      Served s(opts);
      const auto list = s.get("/fixtures").body["fixtures"];
      CHECK(list.size() == 6);
      const auto r = s.post("/sessions", json{{"fixture", "bags"}});
      REQUIRE(r.status == 201);
      const auto m = s.post("/sessions/" + r.body["id"].get<std::string>() + "/message", json{{"utterance", "#0"}});
      CHECK(m.body["status"] == "done");
    }
    fs::remove_all(dir);
    GatewayOptions missing;
    missing.fixtures_dir = dir.string();
    CHECK_THROWS_AS(Gateway{missing}, ConfigError);
  }
}
