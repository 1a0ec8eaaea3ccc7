#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace tanova {

// Manifest written by every CLI run.  Object keys serialize alphabetically,
// so the numeric payload of a run is byte-stable; timings are the only
// run-dependent section.
struct RunReport {
    std::string command;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();
    std::string version;

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);
};

// Writes <dir>/report.json (creating the directory) and returns its path.
std::string write_report(const RunReport& rep, const std::string& dir);
RunReport read_report(const std::string& path);

std::string version_string();

}  // namespace tanova
