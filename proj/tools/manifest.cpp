#include "manifest.hpp"

#include <cema/error.hpp>

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

namespace cema::cli {

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json j;
    j["format"] = "cema-manifest";
    j["subcommand"] = subcommand;
    j["argv"] = argv;
    j["params"] = params;
    auto in = nlohmann::json::array();
    for (const auto& d : inputs)
        in.push_back({{"path", d.path}, {"sha256", d.sha256}, {"bytes", d.bytes}});
    j["inputs"] = in;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["version"] = version;
    j["timestamp"] = timestamp;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format") != "cema-manifest")
            throw DataError("not a run manifest");
        RunManifest m;
        m.subcommand = j.at("subcommand").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.params = j.value("params", nlohmann::json::object());
        for (const auto& d : j.at("inputs"))
            m.inputs.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>(),
                                d.at("bytes").get<std::uintmax_t>()});
        if (!j.at("seed").is_null())
            m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.timestamp = j.value("timestamp", "");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 unavailable");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", md[i]);
    return hex;
}

InputDigest digest(const std::filesystem::path& path)
{
    InputDigest d{path.string(), sha256_file(path), 0};
    std::error_code ec;
    d.bytes = std::filesystem::file_size(path, ec);
    return d;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir)
{
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out)
        throw DataError("cannot write manifest in " + dir.string());
    out << manifest.to_json().dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    try {
        return RunManifest::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace cema::cli
