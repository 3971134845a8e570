#include "sleepssl/cli/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sleepssl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

std::string RunConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    for (const auto& [k, v] : values) {
        mix(k);
        mix(v);
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string RunConfig::to_toml() const {
    std::ostringstream os;
    std::string section;
    // top-level keys first, then one block per section
    for (const auto& [k, v] : values)
        if (k.find('.') == std::string::npos)
            os << k << " = " << v << "\n";
    for (const auto& [k, v] : values) {
        const auto dot = k.find('.');
        if (dot == std::string::npos) continue;
        const std::string sec = k.substr(0, dot);
        if (sec != section) {
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << k.substr(dot + 1) << " = " << v << "\n";
    }
    return os.str();
}

RunConfig parse_toml_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos &&
            line.find('"') == std::string::npos)
            line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument(
                    "config line " + std::to_string(lineno) +
                    ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty() || section.find('.') != std::string::npos)
                throw std::invalid_argument(
                    "config line " + std::to_string(lineno) +
                    ": only one section level is supported");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = unquote(trim(line.substr(eq + 1)));
        if (key.empty())
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": empty key");
        if (!val.empty() && val.front() == '[')
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": arrays are not supported");
        cfg.values[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
}

RunConfig parse_toml_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_toml_text(buf.str());
}

void write_effective_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write config file " + path);
    os << "# effective configuration (hash " << cfg.hash() << ")\n"
       << cfg.to_toml();
}

}  // namespace sleepssl
