#pragma once

// Service configuration.
//
// File format: one `key = value` per line; blank lines and lines starting
// with '#' are ignored. Keys:
//
//   bind_address      listen address                  (127.0.0.1)
//   port              TCP port                        (8080)
//   cache_dir         tile cache / survey store root  (carpetlab-cache)
//   tile_budget       max pixel*iteration per tile    (2e9)
//   survey_budget     max cell*iteration per survey   (4e11)
//   default_n_max     render step budget              (100)
//   classify_n_max    classification step budget      (1000)
//   audit_every       re-render every Nth cache hit   (64, 0 disables)
//   threads           worker threads per request      (hardware)
//   max_inflight      concurrent render requests      (8)
//
// Every key can be overridden by the environment variable CARPETLAB_<KEY>
// (upper case). Precedence, lowest to highest: built-in defaults, config
// file, environment, command-line flags.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace carpetlab::atlas {

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8080;
    std::filesystem::path cache_dir = "carpetlab-cache";
    std::uint64_t tile_budget = 2'000'000'000ULL;
    std::uint64_t survey_budget = 400'000'000'000ULL;
    int default_n_max = 100;
    int classify_n_max = 1000;
    int audit_every = 64;
    int threads = 0;  ///< 0 = hardware concurrency
    int max_inflight = 8;

    /// Sets one key; throws InvalidParameter for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
};

/// Applies `key = value` lines. Throws InvalidParameter with the line number on errors.
void apply_config_text(ServiceConfig& config, std::string_view text);

/// Reads and applies a config file. Throws DataError if it cannot be read.
void apply_config_file(ServiceConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Applies CARPETLAB_<KEY> overrides; the default lookup reads the process environment.
void apply_environment(ServiceConfig& config, const EnvLookup& lookup = {});

}  // namespace carpetlab::atlas
