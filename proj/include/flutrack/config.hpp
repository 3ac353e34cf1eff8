#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flutrack/common.hpp"

namespace flutrack::io {

// Flat "key = value" configuration, '#' comments. Validation is total: every
// problem is collected and reported in one pass rather than one at a time.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text, const std::string& source_name) {
        Config cfg;
        cfg.name_ = source_name;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw config_error(source_name + ":" + std::to_string(lineno) +
                                   ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw config_error(source_name + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw config_error("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

    // Typed getters record problems instead of throwing, so validation can
    // report everything at once; call check() when done.
    std::string get_string(const std::string& key, const std::string& fallback = "") {
        touched_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) {
            missing_.push_back(key);
            return "";
        }
        return it->second;
    }

    std::string require_path(const std::string& key) {
        const std::string p = require_string(key);
        if (!p.empty() && !std::filesystem::exists(p))
            problems_.push_back(key + ": file does not exist: " + p);
        return p;
    }

    std::string optional_path(const std::string& key) {
        const std::string p = get_string(key);
        if (!p.empty() && !std::filesystem::exists(p))
            problems_.push_back(key + ": file does not exist: " + p);
        return p;
    }

    double get_double(const std::string& key, double fallback) {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double v = 0.0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size()) {
            problems_.push_back(key + ": expected a number, got '" + it->second + "'");
            return fallback;
        }
        return v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size()) {
            problems_.push_back(key + ": expected an integer, got '" + it->second + "'");
            return fallback;
        }
        return v;
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<int> out;
        std::istringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            int v = 0;
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || p != item.data() + item.size()) {
                problems_.push_back(key + ": expected integers, got '" + item + "'");
                return fallback;
            }
            out.push_back(v);
        }
        if (out.empty()) {
            problems_.push_back(key + ": empty list");
            return fallback;
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::istringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        if (out.empty()) {
            problems_.push_back(key + ": empty list");
            return fallback;
        }
        return out;
    }

    void add_problem(const std::string& msg) { problems_.push_back(msg); }

    // Throws one config_error listing every missing key and every problem.
    void check() const {
        if (missing_.empty() && problems_.empty()) return;
        std::string msg = name_.empty() ? "configuration invalid:" : name_ + ": configuration invalid:";
        if (!missing_.empty()) {
            msg += "\n  missing keys:";
            for (const auto& k : missing_) msg += " " + k;
        }
        for (const auto& p : problems_) msg += "\n  " + p;
        throw config_error(msg);
    }

    // Keys present in the file but never consumed; surfaced as a warning so
    // typos do not silently change nothing.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!touched_.count(k)) out.push_back(k);
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    }

    std::string name_;
    std::map<std::string, std::string> values_;
    std::vector<std::string> missing_;
    std::vector<std::string> problems_;
    std::set<std::string> touched_;
};

} // namespace flutrack::io
