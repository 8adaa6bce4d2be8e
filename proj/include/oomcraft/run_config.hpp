#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "oomcraft/analysis.hpp"

namespace oomcraft {

/// Layered run configuration: INI-style file values under [sim], [learner]
/// and [plan], overridden by CLI flags via set(). Unknown sections or keys
/// are errors, never ignored.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::filesystem::path& path);

    /// CLI override; validates the key like the file parser does.
    void set(const std::string& section, const std::string& key, const std::string& value);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_real(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;

private:
    static void validate_key(const std::string& section, const std::string& key);
    std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Benchmark system selector for simulate/reproduce.
enum class SystemId { Wells1D, Mixture2D };
SystemId system_from_name(const std::string& name);

SimConfig build_sim_config(const RunConfig& cfg, SystemId system);
LearnerConfig build_learner_config(const RunConfig& cfg);
ExperimentPlan build_plan(const RunConfig& cfg, const std::string& figure);

} // namespace oomcraft
