#include "tanova/report.hpp"

#include <filesystem>
#include <fstream>

#include "tanova/error.hpp"

namespace tanova {

std::string version_string() { return "0.1.0"; }

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["results"] = results;
    j["timings"] = timings;
    j["version"] = version;
    return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
    RunReport rep;
    try {
        rep.command = j.at("command").get<std::string>();
        rep.seed = j.at("seed").get<std::uint64_t>();
        rep.config = j.at("config");
        rep.results = j.at("results");
        rep.timings = j.at("timings");
        rep.version = j.at("version").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what(), 0);
    }
    return rep;
}

std::string write_report(const RunReport& rep, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory '" + dir + "': " + ec.message());
    }
    const std::string path = (std::filesystem::path(dir) / "report.json").string();
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << rep.to_json().dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
    return path;
}

RunReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
    return RunReport::from_json(j);
}

}  // namespace tanova
