#pragma once

#include <map>
#include <string>

namespace sleepssl {

// Flattened "section.key" -> raw value view of a run's settings. std::map
// keeps entries sorted, so the digest is independent of input key order.
struct RunConfig {
    std::map<std::string, std::string> values;

    // FNV-1a over the sorted flattened entries, hex encoded.
    std::string hash() const;
    std::string to_toml() const;
};

// Minimal TOML subset: [section] headers, key = value lines, # comments,
// quoted or bare scalar values. Arrays/tables beyond one level are rejected.
RunConfig parse_toml_text(const std::string& text);
RunConfig parse_toml_file(const std::string& path);

void write_effective_config(const RunConfig& cfg, const std::string& path);

}  // namespace sleepssl
