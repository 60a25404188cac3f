#include "vtm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "vtm/errors.hpp"

namespace vtm {

namespace {

std::string trim(const std::string& s) {
    const size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_line(int line_no, const std::string& what) {
    throw SyntaxError("config line " + std::to_string(line_no) + ": " + what);
}

const std::string* find(const std::map<std::string, std::string>& values,
                        const std::string& key) {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected +
                      ", got '" + value + "'");
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

} // namespace

bool Config::has(const std::string& key) const {
    return values.find(key) != values.end();
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    const std::string* v = find(values, key);
    return v ? *v : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const std::string* v = find(values, key);
    if (!v) {
        return fallback;
    }
    long long out = 0;
    if (!parse_number(*v, out)) {
        bad_value(key, *v, "an integer");
    }
    return out;
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
    const std::string* v = find(values, key);
    if (!v) {
        return fallback;
    }
    std::uint64_t out = 0;
    if (!parse_number(*v, out)) {
        bad_value(key, *v, "an unsigned integer");
    }
    return out;
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(values, key);
    if (!v) {
        return fallback;
    }
    double out = 0.0;
    if (!parse_number(*v, out)) {
        bad_value(key, *v, "a number");
    }
    return out;
}

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            bad_line(line_no, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            bad_line(line_no, "empty key");
        }
        if (key.find_first_of(" \t") != std::string::npos) {
            bad_line(line_no, "key '" + key + "' contains whitespace");
        }
        if (value.empty()) {
            bad_line(line_no, "empty value for key '" + key + "'");
        }
        if (!cfg.values.emplace(key, value).second) {
            bad_line(line_no, "duplicate key '" + key + "'");
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace vtm
