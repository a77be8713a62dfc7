#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nanotherm::cli {

/// Flat `section.key -> value` settings with every key known in advance.
class Settings {
public:
    /// All keys at their defaults.
    Settings();

    /// Merges an INI file. Unknown sections or keys are ConfigErrors naming them.
    void load_file(const std::filesystem::path& path);
    /// `section.key=value`; ConfigError for unknown keys or missing '='.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    /// Hash of the sorted `key=value` lines except the output directory.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    /// Fully commented reference configuration with all defaults.
    static std::string default_config_text();

private:
    std::map<std::string, std::string> values_;
};

}  // namespace nanotherm::cli
