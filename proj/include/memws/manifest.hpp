#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "memws/errors.hpp"
#include "memws/version.hpp"

namespace memws {

/// FNV-1a 64-bit digest, hex-encoded. Stable across runs for identical bytes.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file for digest: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

/// Provenance record emitted next to every subcommand's outputs. Two runs
/// on identical inputs differ only in the timing field.
struct RunManifest {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> input_digests;  // path -> digest
    std::string config_digest;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["toolkit_version"] = version_string;
        nlohmann::json inputs = nlohmann::json::object();
        for (const auto& [path, digest] : input_digests) inputs[path] = digest;
        j["inputs"] = inputs;
        j["config_digest"] = config_digest;
        j["seed"] = seed;
        j["wall_ms"] = wall_ms;
        j["outputs"] = outputs;
        j["warnings"] = warnings;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw validation_error("cannot write manifest: " + path);
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace memws
