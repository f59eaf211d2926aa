#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cema::cli {

inline constexpr const char* tool_version = "0.1.0";

struct InputDigest {
    std::string path;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Written as manifest.json next to the outputs of every run.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv; // arguments after the program name
    nlohmann::json params = nlohmann::json::object();
    std::vector<InputDigest> inputs;
    std::optional<std::uint64_t> seed;
    std::string version = tool_version;
    std::string timestamp;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Lower-case hex SHA-256 of a file's bytes. DataError when unreadable.
std::string sha256_file(const std::filesystem::path& path);
InputDigest digest(const std::filesystem::path& path);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& path);

/// UTC, ISO-8601.
std::string utc_timestamp();

} // namespace cema::cli
