#include "gateseed/common/kv_config.hpp"

#include <fstream>
#include <sstream>

#include "gateseed/common/errors.hpp"
#include "json.hpp"

namespace gateseed {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
    KeyValueConfig cfg;
    cfg.source_ = source;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, 1, e.what());
        }
        if (!j.is_object()) throw ParseError(source, 1, "expected a JSON object");
        auto scalar = [&](const std::string& key, const nlohmann::json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_primitive() && !v.is_null()) return v.dump();
            throw ParseError(source, 1, "value of '" + key + "' is not a scalar");
        };
        for (const auto& [key, value] : j.items()) {
            if (value.is_array()) {
                cfg.lists_[key];  // an empty array still marks the key as present
                for (const auto& v : value) cfg.append(key, scalar(key, v));
            } else {
                cfg.append(key, scalar(key, value));
            }
        }
        return cfg;
    }

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find_first_of("=:");
        if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(source, lineno, "empty key");
        cfg.append(key, trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(key);
        return d;
    } catch (const std::exception&) {
        throw InvalidArgument(source_ + ": '" + key + "' is not a number: " + *v);
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        long long i = std::stoll(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(key);
        return i;
    } catch (const std::exception&) {
        throw InvalidArgument(source_ + ": '" + key + "' is not an integer: " + *v);
    }
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    auto it = lists_.find(key);
    return it == lists_.end() ? std::vector<std::string>{} : it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

}  // namespace gateseed
