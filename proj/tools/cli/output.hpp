#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "nanotherm/cylinder_fed.hpp"

namespace nanotherm::cli {

struct Column {
    std::string name;
    std::string unit;
};

struct CacheSettings {
    std::filesystem::path directory;
    bool enabled = true;
};

/// Cache directory from NANOTHERM_CACHE_DIR, else XDG_CACHE_HOME/nanotherm, else ~/.cache/nanotherm.
std::filesystem::path default_cache_directory();

/// Shared state of one subcommand invocation: output files, datasets and the emissivity store.
class Run {
public:
    Run(std::string subcommand, const Settings& settings, int threads, CacheSettings cache);

    const Settings& settings() const { return settings_; }
    int threads() const { return threads_; }
    const std::filesystem::path& output_dir() const { return out_dir_; }

    /// Opens `name` in the output directory and writes the comment block and, unless disabled, the header row.
    std::ofstream table(const std::string& name, const std::vector<Column>& columns,
                        const std::vector<std::string>& notes = {}, bool header_row = true);
    void dataset(const std::string& label, const std::string& path, std::uint64_t hash);
    fed::EmissivityStore& store() { return *store_; }

    /// Writes manifest.json with hashes, cache use, outputs and timing.
    void finish(int exit_code);

private:
    std::string subcommand_;
    const Settings& settings_;
    int threads_;
    CacheSettings cache_;
    std::filesystem::path out_dir_;
    std::unique_ptr<fed::EmissivityStore> store_;
    std::vector<std::string> outputs_;
    std::vector<std::pair<std::string, std::pair<std::string, std::uint64_t>>> datasets_;
    std::chrono::steady_clock::time_point start_;
    std::string started_utc_;
};

}  // namespace nanotherm::cli
