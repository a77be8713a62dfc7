#include "output.hpp"

#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"
#include "nanotherm/version.hpp"

namespace nanotherm::cli {

std::filesystem::path default_cache_directory() {
    if (const char* dir = std::getenv("NANOTHERM_CACHE_DIR"); dir && *dir) return dir;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "nanotherm";
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "nanotherm";
    return ".nanotherm-cache";
}

Run::Run(std::string subcommand, const Settings& settings, int threads, CacheSettings cache)
    : subcommand_(std::move(subcommand)),
      settings_(settings),
      threads_(threads),
      cache_(std::move(cache)),
      out_dir_(settings.text("output.dir")),
      start_(std::chrono::steady_clock::now()) {
    if (threads_ < 1) throw ConfigError("--threads must be at least 1");
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    if (ec) throw ConfigError("output.dir: cannot create '" + out_dir_.string() + "': " + ec.message());
    if (cache_.enabled) {
        std::filesystem::create_directories(cache_.directory, ec);
        if (ec) throw ConfigError("cache directory '" + cache_.directory.string() + "': " + ec.message());
        store_ = std::make_unique<fed::EmissivityStore>(cache_.directory);
    } else {
        store_ = std::make_unique<fed::EmissivityStore>(std::nullopt, false, false);
    }
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream s;
    s << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    started_utc_ = s.str();
}

std::ofstream Run::table(const std::string& name, const std::vector<Column>& columns,
                         const std::vector<std::string>& notes, bool header_row) {
    const auto path = out_dir_ / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("output.dir: cannot write '" + path.string() + "'");
    out << "# nanotherm " << kVersion << " " << subcommand_ << "\n";
    out << "# config_hash: " << settings_.hash_hex() << "\n";
    out << "# columns:";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "; " : " ") << columns[i].name << " [" << columns[i].unit << "]";
    out << "\n";
    for (const auto& n : notes) out << "# " << n << "\n";
    if (header_row) {
        for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i].name;
        out << "\n";
    }
    outputs_.push_back(path.string());
    return out;
}

void Run::dataset(const std::string& label, const std::string& path, std::uint64_t hash) {
    datasets_.push_back({label, {path, hash}});
}

void Run::finish(int exit_code) {
    nlohmann::ordered_json m;
    m["tool"] = "nanotherm";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["config_hash"] = settings_.hash_hex();
    m["threads"] = threads_;
    m["exit_code"] = exit_code;
    auto& ds = m["datasets"] = nlohmann::ordered_json::object();
    for (const auto& [label, info] : datasets_) ds[label] = {{"path", info.first}, {"hash", numerics::hex64(info.second)}};
    m["cache"] = {{"enabled", cache_.enabled},
                  {"directory", cache_.enabled ? cache_.directory.string() : std::string()},
                  {"computed", store_->computed()},
                  {"loaded", store_->loaded()}};
    auto files = nlohmann::ordered_json::array();
    for (const auto& f : store_->files_used()) files.push_back(f.string());
    m["cache"]["files"] = files;
    m["outputs"] = outputs_;
    m["started_utc"] = started_utc_;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(out_dir_ / "manifest.json");
    out << m.dump(2) << "\n";
}

}  // namespace nanotherm::cli
