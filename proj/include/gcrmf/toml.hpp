// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gcrmf/errors.hpp"

namespace gcrmf {

// Minimal TOML subset: [section] headers, key = value lines, # comments,
// values of type string, integer, float, bool, and flat array. That covers
// every run-config need here without pulling in a full parser.
struct TomlValue {
    enum class Kind { String, Int, Float, Bool, Array };
    Kind kind = Kind::String;
    std::string s;
    std::int64_t i = 0;
    double f = 0.0;
    bool b = false;
    std::vector<TomlValue> arr;

    const std::string& as_string(const std::string& ctx) const {
        if (kind != Kind::String) throw ConfigError(ctx + ": expected a string");
        return s;
    }
    std::int64_t as_int(const std::string& ctx) const {
        if (kind != Kind::Int) throw ConfigError(ctx + ": expected an integer");
        return i;
    }
    double as_double(const std::string& ctx) const {
        if (kind == Kind::Float) return f;
        if (kind == Kind::Int) return static_cast<double>(i);
        throw ConfigError(ctx + ": expected a number");
    }
    bool as_bool(const std::string& ctx) const {
        if (kind != Kind::Bool) throw ConfigError(ctx + ": expected true or false");
        return b;
    }
    const std::vector<TomlValue>& as_array(const std::string& ctx) const {
        if (kind != Kind::Array) throw ConfigError(ctx + ": expected an array");
        return arr;
    }
};

class TomlTable {
public:
    bool has(const std::string& dotted_key) const { return values_.count(dotted_key) != 0; }

    const TomlValue& get(const std::string& dotted_key) const {
        auto it = values_.find(dotted_key);
        if (it == values_.end()) throw ConfigError("config: missing key '" + dotted_key + "'");
        return it->second;
    }

    void put(const std::string& dotted_key, TomlValue v, int line) {
        if (values_.count(dotted_key))
            throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" +
                              dotted_key + "'");
        values_.emplace(dotted_key, std::move(v));
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        out.reserve(values_.size());
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, TomlValue> values_;
};

namespace detail {

inline std::string toml_trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips a trailing comment that is not inside a quoted string
inline std::string toml_strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char c = s[k];
        if (c == '"' && (k == 0 || s[k - 1] != '\\')) quoted = !quoted;
        if (c == '#' && !quoted) return s.substr(0, k);
    }
    return s;
}

inline bool toml_valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

inline TomlValue toml_parse_value(const std::string& raw, int line);

inline TomlValue toml_parse_array(const std::string& body, int line) {
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    std::string cur;
    int depth = 0;
    bool quoted = false;
    auto flush = [&]() {
        const std::string t = toml_trim(cur);
        if (!t.empty()) v.arr.push_back(toml_parse_value(t, line));
        cur.clear();
    };
    for (std::size_t k = 0; k < body.size(); ++k) {
        const char c = body[k];
        if (c == '"' && (k == 0 || body[k - 1] != '\\')) quoted = !quoted;
        if (!quoted) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                flush();
                continue;
            }
        }
        cur.push_back(c);
    }
    if (quoted || depth != 0)
        throw ConfigError("config line " + std::to_string(line) + ": malformed array");
    flush(); // tolerate a trailing comma
    return v;
}

inline TomlValue toml_parse_value(const std::string& raw, int line) {
    TomlValue v;
    if (raw.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw ConfigError("config line " + std::to_string(line) + ": unterminated string");
        v.kind = TomlValue::Kind::String;
        for (std::size_t k = 1; k + 1 < raw.size(); ++k) {
            if (raw[k] == '\\') {
                if (k + 2 >= raw.size())
                    throw ConfigError("config line " + std::to_string(line) + ": bad escape");
                const char e = raw[++k];
                if (e == '"' || e == '\\')
                    v.s.push_back(e);
                else if (e == 'n')
                    v.s.push_back('\n');
                else if (e == 't')
                    v.s.push_back('\t');
                else
                    throw ConfigError("config line " + std::to_string(line) + ": bad escape");
            } else if (raw[k] == '"') {
                throw ConfigError("config line " + std::to_string(line) +
                                  ": stray quote inside string");
            } else {
                v.s.push_back(raw[k]);
            }
        }
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']')
            throw ConfigError("config line " + std::to_string(line) + ": malformed array");
        return toml_parse_array(raw.substr(1, raw.size() - 2), line);
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::Bool;
        v.b = (raw == "true");
        return v;
    }
    // integer first, then float; both must consume the whole token
    {
        std::int64_t iv = 0;
        const auto r = std::from_chars(raw.data(), raw.data() + raw.size(), iv);
        if (r.ec == std::errc{} && r.ptr == raw.data() + raw.size()) {
            v.kind = TomlValue::Kind::Int;
            v.i = iv;
            return v;
        }
    }
    {
        double fv = 0.0;
        const auto r = std::from_chars(raw.data(), raw.data() + raw.size(), fv);
        if (r.ec == std::errc{} && r.ptr == raw.data() + raw.size()) {
            v.kind = TomlValue::Kind::Float;
            v.f = fv;
            return v;
        }
    }
    throw ConfigError("config line " + std::to_string(line) + ": cannot parse value '" + raw +
                      "'");
}

} // namespace detail

inline TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string rawline;
    std::string section;
    int line = 0;
    while (std::getline(in, rawline)) {
        ++line;
        const std::string stripped = detail::toml_trim(detail::toml_strip_comment(rawline));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw ConfigError("config line " + std::to_string(line) +
                                  ": malformed section header");
            section = detail::toml_trim(stripped.substr(1, stripped.size() - 2));
            if (!detail::toml_valid_key(section))
                throw ConfigError("config line " + std::to_string(line) +
                                  ": invalid section name");
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::toml_trim(stripped.substr(0, eq));
        const std::string val = detail::toml_trim(stripped.substr(eq + 1));
        if (!detail::toml_valid_key(key))
            throw ConfigError("config line " + std::to_string(line) + ": invalid key '" + key +
                              "'");
        const std::string dotted = section.empty() ? key : section + "." + key;
        table.put(dotted, detail::toml_parse_value(val, line), line);
    }
    return table;
}

inline TomlTable load_toml(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("config: cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toml(ss.str());
}

} // namespace gcrmf
