#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "regiosim/errors.hpp"
#include "regiosim/hash.hpp"
#include "regiosim/version.hpp"

namespace regiosim {

/// Reproducibility record written on every successful CLI run. Output hashes
/// are 64-bit FNV-1a over file bytes; re-running with identical config,
/// inputs and seed must reproduce every output hash (timestamps aside).
struct RunManifest {
  std::string tool_version = kVersion;
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::map<std::string, std::string> output_hashes;

  static std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }

  void add_output(const std::string& path) { output_hashes[path] = file_hash_hex(path); }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["input_hashes"] = input_hashes;
    j["seed"] = seed;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = output_hashes;
    std::ofstream out(path);
    detail::require(out.good(), ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << '\n';
  }

  static RunManifest load(const std::string& path) {
    std::ifstream in(path);
    detail::require(in.good(), ErrorCode::IoError, "cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.input_hashes = j.at("input_hashes").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.output_hashes = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  }
};

}  // namespace regiosim
