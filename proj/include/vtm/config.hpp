#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace vtm {

// Parsed "key = value" text. One pair per line; '#' starts a comment that
// runs to the end of the line; blank lines are ignored; keys are unique.
// Typed getters fall back to the given default when the key is absent and
// throw ConfigError when a present value does not parse.
struct Config {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
};

// Throws SyntaxError naming the offending line.
Config parse_config(const std::string& text);

// Reads the file (IoError when unreadable) and parses it.
Config load_config(const std::string& path);

} // namespace vtm
