#include "carpetlab/atlas/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"

namespace carpetlab::atlas {

namespace {

constexpr std::string_view kKeys[] = {"bind_address", "port",           "cache_dir",   "tile_budget",
                                      "survey_budget", "default_n_max", "classify_n_max", "audit_every",
                                      "threads",       "max_inflight"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value, T lo, T hi) {
    // accept scientific notation for budgets ("2e9")
    std::string buf(value);
    char* end = nullptr;
    const long double v = std::strtold(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || v != static_cast<long double>(static_cast<T>(v)) ||
        static_cast<T>(v) < lo || static_cast<T>(v) > hi) {
        throw InvalidParameter(fmt::format("config key '{}': invalid value '{}'", key, value));
    }
    return static_cast<T>(v);
}

}  // namespace

void ServiceConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "bind_address") {
        if (value.empty()) throw InvalidParameter("config key 'bind_address' is empty");
        bind_address = std::string(value);
    } else if (key == "port") {
        port = parse_number<int>(key, value, 0, 65535);
    } else if (key == "cache_dir") {
        if (value.empty()) throw InvalidParameter("config key 'cache_dir' is empty");
        cache_dir = std::string(value);
    } else if (key == "tile_budget") {
        tile_budget = parse_number<std::uint64_t>(key, value, 1, UINT64_MAX / 2);
    } else if (key == "survey_budget") {
        survey_budget = parse_number<std::uint64_t>(key, value, 1, UINT64_MAX / 2);
    } else if (key == "default_n_max") {
        default_n_max = parse_number<int>(key, value, 1, 1'000'000);
    } else if (key == "classify_n_max") {
        classify_n_max = parse_number<int>(key, value, 1, 10'000'000);
    } else if (key == "audit_every") {
        audit_every = parse_number<int>(key, value, 0, 1'000'000'000);
    } else if (key == "threads") {
        threads = parse_number<int>(key, value, 0, 4096);
    } else if (key == "max_inflight") {
        max_inflight = parse_number<int>(key, value, 1, 100'000);
    } else {
        throw InvalidParameter(fmt::format("unknown config key '{}'", key));
    }
}

void apply_config_text(ServiceConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw InvalidParameter(fmt::format("config line {}: expected key = value", number));
        try {
            config.set(trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const InvalidParameter& e) {
            throw InvalidParameter(fmt::format("config line {}: {}", number, e.what()));
        }
    }
}

void apply_config_file(ServiceConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

void apply_environment(ServiceConfig& config, const EnvLookup& lookup) {
    for (std::string_view key : kKeys) {
        std::string name = "CARPETLAB_";
        for (char ch : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        std::optional<std::string> value;
        if (lookup) {
            value = lookup(name);
        } else if (const char* env = std::getenv(name.c_str())) {
            value = env;
        }
        if (value) {
            try {
                config.set(key, *value);
            } catch (const InvalidParameter& e) {
                throw InvalidParameter(fmt::format("environment {}: {}", name, e.what()));
            }
        }
    }
}

}  // namespace carpetlab::atlas
