#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace gateseed::cli {

// Options of one subcommand bound to variables, remembered so the merged
// values (defaults < config file < flags) can be echoed back as JSON.
class Knobs {
public:
    explicit Knobs(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* option(const std::string& name, T& var, const std::string& desc) {
        CLI::Option* opt = app_->add_option(name, var, desc)->capture_default_str();
        entries_.emplace_back(opt->get_lnames().front(), [&var] { return nlohmann::json(var); });
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
        CLI::Option* opt = app_->add_flag(name, var, desc);
        entries_.emplace_back(opt->get_lnames().front(), [&var] { return nlohmann::json(var); });
        return opt;
    }

    CLI::App* app() const { return app_; }

    nlohmann::json echo() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [key, value] : entries_) j[key] = value();
        return j;
    }

    // Writes effective_config.json into `dir` (created if needed).
    void write(const std::filesystem::path& dir) const;

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<nlohmann::json()>>> entries_;
};

}  // namespace gateseed::cli
