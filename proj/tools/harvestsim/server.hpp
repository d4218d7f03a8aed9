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

#pragma once

#include <memory>
#include <string>

#include "harvest/config.hpp"
#include "harvest/trace.hpp"

namespace harvest::cli {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7878;  // 0 picks a free port
  /// Simulated seconds per wall second; 0 steps as fast as possible.
  double realtime_factor = 1.0;
  bool autostart = false;
};

/// Interactive simulator behind a newline-delimited JSON socket protocol.
/// One simulation thread owns the engine; each client gets a reader thread
/// that validates command frames and queues them for the next tick
/// boundary. Frame layouts are documented in docs/serve-protocol.md.
class Server {
 public:
  Server(ScenarioConfig config, ConfigOverrides overrides, ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds, listens and starts the threads. Returns the bound port. Throws
  /// std::runtime_error when the address is unavailable.
  int start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// The frame written for one tick: the batch trace line wrapped verbatim.
std::string tick_frame(const TraceRecord& record);

}  // namespace harvest::cli
