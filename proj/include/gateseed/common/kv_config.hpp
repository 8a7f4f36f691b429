#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gateseed {

// Flat string-keyed settings read from either `key = value` text (with `#`
// comments) or a JSON object of scalars and scalar arrays. A repeated text key
// or a JSON array gives a list; scalar getters return its last element.
class KeyValueConfig {
public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig parse(const std::string& text, const std::string& source = "<string>");

    bool contains(const std::string& key) const { return lists_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;

    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) {
        values_[key] = value;
        lists_[key] = {value};
    }
    const std::map<std::string, std::string>& values() const { return values_; }
    const std::map<std::string, std::vector<std::string>>& lists() const { return lists_; }

private:
    void append(const std::string& key, const std::string& value) {
        values_[key] = value;
        lists_[key].push_back(value);
    }

    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> lists_;
    std::string source_;
};

}  // namespace gateseed
