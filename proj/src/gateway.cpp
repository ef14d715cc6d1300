#include "dialoplan/gateway.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"

#include "dialoplan/error.hpp"
#include "dialoplan/pddl.hpp"

namespace dialoplan {

namespace {

HttpResponse error(int status, const std::string& message, nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PlanEntry pddl_entry(const std::string& name, const std::string& domain_text, const std::string& problem_text) {
  const pddl::LiftedDomain domain = pddl::parse_domain(domain_text);
  const pddl::LiftedProblem problem = pddl::parse_problem(problem_text, domain);
  PlanEntry e;
  e.name = name;
  e.problem = std::make_shared<const FondProblem>(pddl::ground(domain, problem));
  e.binding = fixtures::generic_binding(*e.problem);
  return e;
}

}  // namespace

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)),
      library_(std::make_shared<PlanLibrary>(fixtures::standard_library(options_.runtime))),
      clock_([] { return std::chrono::steady_clock::now(); }) {
  if (!options_.fixtures_dir) return;
  namespace fs = std::filesystem;
  const fs::path root(*options_.fixtures_dir);
  if (!fs::is_directory(root)) throw ConfigError("fixtures dir " + root.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(root))
    if (d.is_directory() && fs::exists(d.path() / "domain.pddl") && fs::exists(d.path() / "problem.pddl"))
      dirs.push_back(d.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    const std::string name = d.filename().string();
    if (library_->find(name)) continue;  // bundled fixtures keep their hand-written bindings
    library_->add(pddl_entry(name, slurp(d / "domain.pddl"), slurp(d / "problem.pddl")));
  }
}

std::shared_ptr<Gateway::Record> Gateway::lookup(const std::string& id, HttpResponse& err) {
  std::lock_guard lock(mutex_);
  if (expired_.count(id)) {
    err = error(410, "session expired");
    return nullptr;
  }
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    err = error(404, "no session '" + id + "'");
    return nullptr;
  }
  const auto now = clock_();
  if (now - it->second->last_active > options_.idle_ttl) {
    expired_.insert(id);
    sessions_.erase(it);
    err = error(410, "session expired");
    return nullptr;
  }
  it->second->last_active = now;
  return it->second;
}

std::size_t Gateway::sweep() {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  std::size_t n = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_active > options_.idle_ttl) {
      expired_.insert(it->first);
      it = sessions_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

HttpResponse Gateway::create_session(const std::string& body) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object()) return error(400, "body must be a JSON object");

  auto record = std::make_shared<Record>();
  const PlanLibrary* library = library_.get();
  std::string plan_name;
  try {
    if (req.contains("fixture")) {
      if (!req["fixture"].is_string()) return error(400, "'fixture' must be a string");
      plan_name = req["fixture"].get<std::string>();
      if (!library_->find(plan_name)) return error(404, "unknown fixture '" + plan_name + "'");
    } else if (req.contains("domain") && req.contains("problem")) {
      if (!options_.allow_adhoc_problems) return error(400, "PDDL bodies are disabled");
      if (!req["domain"].is_string() || !req["problem"].is_string())
        return error(400, "'domain' and 'problem' must be PDDL strings");
      record->adhoc = std::make_shared<PlanLibrary>(fixtures::demo_nlu());
      plan_name = "adhoc";
      record->adhoc->add(pddl_entry(plan_name, req["domain"].get<std::string>(), req["problem"].get<std::string>()));
      library = record->adhoc.get();
    } else {
      return error(400, "body needs 'fixture' or both 'domain' and 'problem'");
    }

    Context overrides;
    if (req.contains("context")) {
      if (!req["context"].is_object()) return error(400, "'context' must be an object");
      for (const auto& [k, v] : req["context"].items()) {
        overrides.declare(k);
        overrides.set(k, value_from_json(v));
      }
    }
    SessionOptions opts;
    if (req.contains("max_loop_visits")) {
      if (!req["max_loop_visits"].is_number_integer()) return error(400, "'max_loop_visits' must be an integer");
      opts.max_loop_visits = req["max_loop_visits"].get<int>();
    }

    const std::string id = "s" + std::to_string(next_id_.fetch_add(1));
    record->session = start_session(*library, plan_name, std::move(overrides), opts, id);
  } catch (const ParseError& e) {
    return error(400, e.what(), {{"line", e.line()}, {"column", e.column()}});
  } catch (const ConfigError& e) {
    return error(400, e.what());
  } catch (const StructuralError& e) {
    return error(400, e.what());
  } catch (const UnsolvableError& e) {
    return error(422, e.what());
  } catch (const ResourceError& e) {
    return error(422, e.what());
  }

  Session& s = *record->session;
  nlohmann::json out;
  if (s.status() == SessionStatus::kRunning) {
    out = to_json(s.step(), s.plan());
  } else {
    out = {{"status", to_string(s.status())}, {"current_node", s.current_node()},
           {"current_action", s.plan().nodes[s.current_node()].action}, {"events", nlohmann::json::array()},
           {"transitions", nlohmann::json::array()}, {"branch_taken", nullptr}};
  }
  out["id"] = s.id();
  out["plan"] = s.plan_name();
  record->last_active = clock_();
  {
    std::lock_guard lock(mutex_);
    sessions_[s.id()] = record;
  }
  return {201, out};
}

HttpResponse Gateway::post_message(const std::string& id, const std::string& body) {
  HttpResponse err;
  auto record = lookup(id, err);
  if (!record) return err;

  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("utterance") || !req["utterance"].is_string())
    return error(400, "body needs a string 'utterance'");

  std::unique_lock lock(record->busy, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "session is handling another message", {{"retry", true}});
  Session& s = *record->session;
  if (s.status() != SessionStatus::kAwaitingUser)
    return error(409, "session is " + std::string(to_string(s.status())), {{"status", to_string(s.status())}});
  nlohmann::json out = to_json(s.step(req["utterance"].get<std::string>()), s.plan());
  out["id"] = s.id();
  return {200, out};
}

HttpResponse Gateway::get_session(const std::string& id) {
  HttpResponse err;
  auto record = lookup(id, err);
  if (!record) return err;
  std::lock_guard lock(record->busy);
  return {200, record->session->to_json()};
}

HttpResponse Gateway::get_plan(const std::string& id) {
  HttpResponse err;
  auto record = lookup(id, err);
  if (!record) return err;
  std::lock_guard lock(record->busy);
  const Session& s = *record->session;
  nlohmann::json out = to_json(s.plan());
  out["cursor"] = {{"node", s.current_node()},
                   {"action", s.plan().nodes[s.current_node()].action},
                   {"status", to_string(s.status())}};
  out["path"] = s.path();
  return {200, out};
}

HttpResponse Gateway::list_fixtures() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& name : library_->names()) {
    const PlanEntry* e = library_->find(name);
    const auto plan = library_->plan(*e, e->problem->init);
    out.push_back({{"name", name},
                   {"intents", e->intents},
                   {"fluents", e->problem->fluents.size()},
                   {"actions", e->problem->actions.size()},
                   {"plan_nodes", plan->nodes.size()}});
  }
  return {200, {{"fixtures", out}}};
}

void Gateway::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    sweep();
    reply(res, create_session(req.body));
  });
  server.Post(R"(/sessions/([^/]+)/message)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_message(req.matches[1], req.body));
  });
  server.Get(R"(/sessions/([^/]+)/plan)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_plan(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_session(req.matches[1]));
  });
  server.Get("/fixtures", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, list_fixtures());
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
  });
}

bool serve(Gateway& gateway, const std::string& host, int port) {
  httplib::Server server;
  gateway.mount(server);
  return server.listen(host, port);
}

}  // namespace dialoplan
