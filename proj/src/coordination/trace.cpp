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

#include "harvest/trace.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

namespace harvest {

using nlohmann::json;

namespace {

const char* arm_key(int i) { return i == 0 ? "arm1" : "arm2"; }

json props_json(const ArmProps& p) {
  return {{"detected", p.detected}, {"attached", p.attached},     {"approach", p.approach},
          {"retract", p.retract},   {"open_valve", p.open_valve}, {"attaching", p.attaching}};
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw MalformedTrace(where + " is not an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw MalformedTrace("missing field " + where + "." + key);
  return *it;
}

bool get_bool(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_boolean()) throw MalformedTrace(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw MalformedTrace(where + "." + key + " must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw MalformedTrace(where + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw MalformedTrace(where + "." + key + " must be a string");
  return v.get<std::string>();
}

ArmProps parse_props(const json& obj, const std::string& where) {
  ArmProps p;
  p.detected = get_bool(obj, "detected", where);
  p.attached = get_bool(obj, "attached", where);
  p.approach = get_bool(obj, "approach", where);
  p.retract = get_bool(obj, "retract", where);
  p.open_valve = get_bool(obj, "open_valve", where);
  p.attaching = get_bool(obj, "attaching", where);
  return p;
}

}  // namespace

std::string to_json_line(const TraceRecord& r) {
  json props = json::object(), phases = json::object(), actions = json::object(), targets = json::object();
  for (int i = 0; i < 2; ++i) {
    const ArmTrace& a = r.arms[i];
    props[arm_key(i)] = props_json(a.props);
    phases[arm_key(i)] = to_string(a.phase);
    actions[arm_key(i)] = a.actions;
    targets[arm_key(i)] = a.target < 0 ? json(nullptr) : json(a.target);
  }
  json events = json::array();
  for (const TraceEvent& e : r.events) {
    events.push_back({{"arm", e.arm}, {"apple", e.apple}, {"kind", e.kind}, {"cause", e.cause}});
  }
  json j = {
      {"tick", r.tick},
      {"t", r.t},
      {"mode", r.mode},
      {"strategy", r.strategy},
      {"props", props},
      {"phases", phases},
      {"actions", actions},
      {"targets", targets},
      {"pressure", {{"arm1", r.pressure.p_arm1}, {"arm2", r.pressure.p_arm2}, {"source", r.pressure.p_source}}},
      {"valves", {{"v1", r.valves.v1}, {"v2", r.valves.v2}, {"v3", r.valves.v3}, {"v4", r.valves.v4}}},
      {"events", events},
      {"stats",
       {{"attempted", r.stats.attempted},
        {"succeeded", r.stats.succeeded},
        {"failed", r.stats.failed},
        {"remaining", r.stats.remaining}}},
  };
  return j.dump();
}

TraceRecord parse_trace_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedTrace(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedTrace("record is not an object");

  TraceRecord r;
  r.tick = get_int(j, "tick", "record");
  r.t = get_number(j, "t", "record");
  r.mode = get_string(j, "mode", "record");
  r.strategy = get_string(j, "strategy", "record");
  const json& props = field(j, "props", "record");
  const json& phases = field(j, "phases", "record");
  const json& actions = field(j, "actions", "record");
  const json& targets = field(j, "targets", "record");
  for (int i = 0; i < 2; ++i) {
    ArmTrace& a = r.arms[i];
    const std::string key = arm_key(i);
    a.props = parse_props(field(props, key.c_str(), "props"), "props." + key);
    const auto phase = phase_from_string(get_string(phases, key.c_str(), "phases"));
    if (!phase) throw MalformedTrace("unknown phase in phases." + key);
    a.phase = *phase;
    const json& acts = field(actions, key.c_str(), "actions");
    if (!acts.is_array()) throw MalformedTrace("actions." + key + " must be an array");
    for (const json& s : acts) {
      if (!s.is_string()) throw MalformedTrace("actions." + key + " entries must be strings");
      a.actions.push_back(s.get<std::string>());
    }
    const json& tgt = field(targets, key.c_str(), "targets");
    if (tgt.is_null()) {
      a.target = -1;
    } else if (tgt.is_number_integer()) {
      a.target = tgt.get<int>();
    } else {
      throw MalformedTrace("targets." + key + " must be an integer or null");
    }
  }

  // Optional plant and bookkeeping fields.
  if (j.contains("pressure")) {
    const json& p = j["pressure"];
    r.pressure = {get_number(p, "arm1", "pressure"), get_number(p, "arm2", "pressure"),
                  get_number(p, "source", "pressure")};
  }
  if (j.contains("valves")) {
    const json& v = j["valves"];
    r.valves.v1 = get_bool(v, "v1", "valves");
    r.valves.v2 = get_bool(v, "v2", "valves");
    r.valves.v3 = get_bool(v, "v3", "valves");
    r.valves.v4 = get_bool(v, "v4", "valves");
  }
  if (j.contains("events")) {
    const json& ev = j["events"];
    if (!ev.is_array()) throw MalformedTrace("events must be an array");
    for (const json& e : ev) {
      TraceEvent out;
      out.arm = static_cast<int>(get_int(e, "arm", "events[]"));
      out.apple = static_cast<int>(get_int(e, "apple", "events[]"));
      out.kind = get_string(e, "kind", "events[]");
      if (e.contains("cause")) out.cause = get_string(e, "cause", "events[]");
      r.events.push_back(std::move(out));
    }
  }
  if (j.contains("stats")) {
    const json& s = j["stats"];
    r.stats.attempted = static_cast<int>(get_int(s, "attempted", "stats"));
    r.stats.succeeded = static_cast<int>(get_int(s, "succeeded", "stats"));
    r.stats.failed = static_cast<int>(get_int(s, "failed", "stats"));
    r.stats.remaining = static_cast<int>(get_int(s, "remaining", "stats"));
  }
  return r;
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_trace_line(line));
    } catch (const MalformedTrace& e) {
      throw MalformedTrace("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const TraceRecord& r : records) out << to_json_line(r) << '\n';
}

}  // namespace harvest
