// Copyright 2026 The Harvest Sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "harvest/harvest_sim.hpp"
#include "json.hpp"

namespace harvest::cli {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class BadFrame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Init {
  std::optional<std::uint64_t> seed;
  std::optional<Strategy> strategy;
};
struct Start {};
struct Stop {};
struct Estop {};
struct SetStrategy {
  Strategy strategy;
};
struct ManualMove {
  int arm;
  CartesianPoint delta;
};
struct Inject {
  int arm;
  InjectedFailure kind;
};
struct Reposition {
  double dx, dz;
};
using Action = std::variant<Init, Start, Stop, Estop, SetStrategy, ManualMove, Inject, Reposition>;

struct Session {
  explicit Session(int fd) : fd(fd) {}
  ~Session() { ::close(fd); }
  int fd;
  bool alive = true;  // guarded by the server mutex
  std::thread reader;
};

struct Command {
  std::shared_ptr<Session> origin;
  json id;
  std::string name;
  Action action;
};

// ---------------------------------------------------------------------------
// Frame validation

void only_keys(const json& args, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : args.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw BadFrame("unknown argument '" + key + "'");
  }
}

double number(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_number()) {
    throw BadFrame(std::string("argument '") + key + "' must be a number");
  }
  return args.at(key).get<double>();
}

std::string text(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_string()) {
    throw BadFrame(std::string("argument '") + key + "' must be a string");
  }
  return args.at(key).get<std::string>();
}

int arm_arg(const json& args) {
  if (!args.contains("arm") || !args.at("arm").is_number_integer() || (args.at("arm") != 1 && args.at("arm") != 2)) {
    throw BadFrame("argument 'arm' must be 1 or 2");
  }
  return args.at("arm").get<int>();
}

Strategy strategy_arg(const json& args) {
  const std::string name = text(args, "strategy");
  const auto s = strategy_from_string(name);
  if (!s) throw BadFrame("unknown strategy '" + name + "'");
  return *s;
}

Action parse_action(const std::string& name, const json& args) {
  if (name == "init") {
    only_keys(args, {"seed", "strategy"});
    Init init;
    if (args.contains("seed")) {
      if (!args.at("seed").is_number_unsigned()) throw BadFrame("argument 'seed' must be a non-negative integer");
      init.seed = args.at("seed").get<std::uint64_t>();
    }
    if (args.contains("strategy")) init.strategy = strategy_arg(args);
    return init;
  }
  if (name == "set_strategy") {
    only_keys(args, {"strategy"});
    return SetStrategy{strategy_arg(args)};
  }
  if (name == "manual_move") {
    only_keys(args, {"arm", "dx", "dy", "dz"});
    return ManualMove{arm_arg(args), {number(args, "dx"), number(args, "dy"), number(args, "dz")}};
  }
  if (name == "inject_failure") {
    only_keys(args, {"arm", "kind"});
    const int arm = arm_arg(args);
    const std::string kind = text(args, "kind");
    const auto failure = injected_failure_from_string(kind);
    if (!failure) throw BadFrame("unknown failure kind '" + kind + "'");
    return Inject{arm, *failure};
  }
  if (name == "reposition_platform") {
    only_keys(args, {"dx", "dz"});
    return Reposition{number(args, "dx"), number(args, "dz")};
  }
  if (name != "start" && name != "stop" && name != "estop") throw BadFrame("unknown command '" + name + "'");
  only_keys(args, {});
  if (name == "start") return Start{};
  if (name == "stop") return Stop{};
  return Estop{};
}

json error_frame(const json& id, const std::string& message) {
  return json{{"kind", "error"}, {"id", id}, {"message", message}};
}

}  // namespace

std::string tick_frame(const TraceRecord& record) {
  return R"({"kind":"tick","record":)" + to_json_line(record) + "}";
}

struct Server::Impl {
  ScenarioConfig config;
  ConfigOverrides overrides;
  ServeOptions options;

  std::mutex mu;
  std::condition_variable cv;
  std::optional<HarvestEngine> engine;
  Scenario scenario;
  std::string status = "ready";  // ready, running, stopped, finished, defect
  std::deque<Command> queue;
  std::vector<std::shared_ptr<Session>> sessions;
  bool stopping = false;

  int listen_fd = -1;
  int bound_port = 0;
  std::thread acceptor, simulator;

  Impl(ScenarioConfig c, ConfigOverrides o, ServeOptions opts)
      : config(std::move(c)), overrides(std::move(o)), options(std::move(opts)) {
    reset_engine();
    if (options.autostart) status = "running";
  }

  void reset_engine() {
    scenario = config.build(overrides);
    engine.emplace(scenario);
    status = "ready";
  }

  // All writes happen with mu held, so frames from different threads never
  // interleave on one socket.
  void send(const std::shared_ptr<Session>& s, const std::string& frame) {
    if (!s->alive) return;
    const std::string line = frame + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(s->fd, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        s->alive = false;
        ::shutdown(s->fd, SHUT_RDWR);
        return;
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  void broadcast(const std::string& frame) {
    for (const auto& s : sessions) send(s, frame);
  }

  json snapshot() const {
    const TraceRecord* last = engine->last_record();
    json ee = json::array();
    for (int arm = 1; arm <= 2; ++arm) {
      const CartesianPoint p = engine->end_effector(arm);
      ee.push_back({p.x, p.y, p.z});
    }
    return json{{"kind", "snapshot"},
                {"status", status},
                {"mode", engine->mode()},
                {"tick", engine->tick()},
                {"tick_s", scenario.tick},
                {"realtime_factor", options.realtime_factor},
                {"seed", scenario.seed},
                {"strategy", last != nullptr ? last->strategy : std::string(to_string(scenario.strategy))},
                {"config_hash", hash_hex(config.hash(overrides))},
                {"apples", scenario.apples.size()},
                {"stations", scenario.station_count()},
                {"end_effectors", ee},
                {"record", last != nullptr ? json::parse(to_json_line(*last)) : json(nullptr)},
                {"report", json::parse(report_to_json(engine->report()))}};
  }

  json hello() const {
    return json{{"kind", "hello"},
                {"protocol", "harvest-serve/1"},
                {"commands",
                 {"init", "start", "stop", "estop", "set_strategy", "manual_move", "inject_failure",
                  "reposition_platform"}}};
  }

  // -------------------------------------------------------------------------
  // Simulation thread

  void apply(const Action& action) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Init>) {
            if (a.seed) overrides.seed = a.seed;
            if (a.strategy) overrides.strategy = a.strategy;
            reset_engine();
          } else if constexpr (std::is_same_v<T, Start>) {
            if (status == "finished" || status == "defect") throw CommandRejected("episode is over; send init first");
            status = "running";
          } else if constexpr (std::is_same_v<T, Stop>) {
            if (status == "running") status = "stopped";
          } else if constexpr (std::is_same_v<T, Estop>) {
            engine->estop();
          } else if constexpr (std::is_same_v<T, SetStrategy>) {
            engine->set_strategy(a.strategy);
          } else if constexpr (std::is_same_v<T, ManualMove>) {
            engine->manual_move(a.arm, a.delta);
          } else if constexpr (std::is_same_v<T, Inject>) {
            engine->inject_failure(a.arm, a.kind);
          } else {
            engine->reposition(a.dx, a.dz);
          }
        },
        action);
  }

  void drain() {
    while (!queue.empty()) {
      Command c = std::move(queue.front());
      queue.pop_front();
      const std::int64_t at = engine->tick();
      try {
        apply(c.action);
        send(c.origin, json{{"kind", "command_ack"},
                            {"id", c.id},
                            {"name", c.name},
                            {"tick", at},
                            {"status", status},
                            {"mode", engine->mode()}}
                           .dump());
        if (c.name == "init") broadcast(snapshot().dump());
      } catch (const std::exception& e) {
        send(c.origin, error_frame(c.id, e.what()).dump());
      }
    }
  }

  void step_once() {
    try {
      const TraceRecord& r = engine->step();
      broadcast(tick_frame(r));
      if (engine->finished()) {
        status = "finished";
        broadcast(snapshot().dump());
      }
    } catch (const MonitorDefect& e) {
      status = "defect";
      broadcast(error_frame(nullptr, std::string("monitor defect: ") + e.what()).dump());
      broadcast(snapshot().dump());
    }
  }

  void simulate() {
    std::unique_lock lock(mu);
    auto next_due = Clock::now();
    while (!stopping) {
      const bool running = status == "running";
      if (queue.empty()) {
        if (!running) {
          cv.wait(lock, [&] { return stopping || !queue.empty() || status == "running"; });
          next_due = Clock::now();
          continue;
        }
        if (options.realtime_factor > 0.0 &&
            cv.wait_until(lock, next_due, [&] { return stopping || !queue.empty(); })) {
          continue;
        }
      }
      if (stopping) break;
      drain();
      if (status != "running" || Clock::now() < next_due) continue;
      step_once();
      if (options.realtime_factor > 0.0) {
        next_due += std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(scenario.tick / options.realtime_factor));
      } else {
        // Unthrottled: let session threads queue commands between ticks.
        lock.unlock();
        std::this_thread::yield();
        lock.lock();
      }
    }
  }

  // -------------------------------------------------------------------------
  // Sessions

  void handle_line(const std::shared_ptr<Session>& s, const std::string& line) {
    json id = nullptr;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        throw BadFrame("frame is not valid JSON");
      }
      if (!j.is_object()) throw BadFrame("frame must be a JSON object");
      if (j.contains("id")) id = j.at("id");
      if (!j.contains("kind") || j.at("kind") != "command") throw BadFrame("clients may only send command frames");
      for (const auto& [key, value] : j.items()) {
        if (key != "kind" && key != "id" && key != "name" && key != "args") throw BadFrame("unknown field '" + key + "'");
      }
      if (!j.contains("name") || !j.at("name").is_string()) throw BadFrame("command frame needs a string 'name'");
      const std::string name = j.at("name").get<std::string>();
      const json args = j.value("args", json::object());
      if (!args.is_object()) throw BadFrame("'args' must be an object");
      Action action = parse_action(name, args);
      std::lock_guard lock(mu);
      Command c{s, id, name, std::move(action)};
      if (name == "estop") {
        queue.push_front(std::move(c));
      } else {
        queue.push_back(std::move(c));
      }
      cv.notify_all();
    } catch (const BadFrame& e) {
      std::lock_guard lock(mu);
      send(s, error_frame(id, e.what()).dump());
    }
  }

  void read_session(std::shared_ptr<Session> s) {
    std::string buffer;
    char chunk[4096];
    while (true) {
      const ssize_t n = ::recv(s->fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        handle_line(s, line);
      }
      if (buffer.size() > (1u << 20)) {
        std::lock_guard lock(mu);
        send(s, error_frame(nullptr, "frame exceeds 1 MiB").dump());
        buffer.clear();
      }
    }
    std::lock_guard lock(mu);
    s->alive = false;
  }

  void accept_loop() {
    while (true) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;  // listening socket shut down
      }
      auto s = std::make_shared<Session>(fd);
      std::lock_guard lock(mu);
      if (stopping) return;
      std::erase_if(sessions, [](const auto& old) {
        if (old->alive) return false;
        if (old->reader.joinable()) old->reader.join();
        return true;
      });
      sessions.push_back(s);
      send(s, hello().dump());
      send(s, snapshot().dump());
      s->reader = std::thread([this, s] { read_session(s); });
    }
  }

  int start() {
    listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(options.port));
    if (::inet_pton(AF_INET, options.host.c_str(), &addr.sin_addr) != 1) {
      throw std::runtime_error("invalid host address " + options.host);
    }
    if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd, 8) != 0) {
      const std::string why = std::strerror(errno);
      ::close(listen_fd);
      listen_fd = -1;
      throw std::runtime_error("cannot listen on " + options.host + ":" + std::to_string(options.port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    bound_port = ntohs(addr.sin_port);
    simulator = std::thread([this] { simulate(); });
    acceptor = std::thread([this] { accept_loop(); });
    return bound_port;
  }

  void stop() {
    std::vector<std::shared_ptr<Session>> closing;
    {
      std::lock_guard lock(mu);
      if (stopping) return;
      stopping = true;
      closing = sessions;
      for (const auto& s : sessions) ::shutdown(s->fd, SHUT_RDWR);
      cv.notify_all();
    }
    if (listen_fd >= 0) ::shutdown(listen_fd, SHUT_RDWR);
    if (acceptor.joinable()) acceptor.join();
    if (simulator.joinable()) simulator.join();
    for (const auto& s : closing) {
      if (s->reader.joinable()) s->reader.join();
    }
    if (listen_fd >= 0) ::close(listen_fd);
    listen_fd = -1;
  }
};

Server::Server(ScenarioConfig config, ConfigOverrides overrides, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(overrides), std::move(options))) {}

Server::~Server() { impl_->stop(); }

int Server::start() { return impl_->start(); }
void Server::stop() { impl_->stop(); }
int Server::port() const { return impl_->bound_port; }

}  // namespace harvest::cli
