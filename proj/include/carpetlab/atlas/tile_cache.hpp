#pragma once

// Content-addressed tile store.
//
// Layout under the root directory:
//   objects/<first two hex>/<key digest>.png   tile bytes
//   objects/<first two hex>/<key digest>.json  tile metadata
//   index.tsv                                  "<key digest>\t<content sha256>\t<bytes>" per line
//
// Files are published by writing a temporary file and renaming it into place.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "carpetlab/image_io.hpp"

namespace carpetlab::atlas {

struct CachedTile {
    Bytes data;
    std::string metadata;  ///< opaque JSON stored beside the tile
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t audits = 0;
    std::uint64_t audit_failures = 0;
};

class TileCache {
public:
    /// audit_every = N re-renders every Nth hit and compares digests (0 disables).
    explicit TileCache(std::filesystem::path root, int audit_every = 0);

    std::optional<CachedTile> get(const std::string& key) const;
    void put(const std::string& key, const CachedTile& tile);

    struct Lookup {
        CachedTile tile;
        bool hit = false;
    };

    /// Returns the cached tile or renders, stores and returns a fresh one.
    /// Concurrent requests for one key render once.
    Lookup fetch(const std::string& key, const std::function<CachedTile()>& render);

    CacheStats stats() const;
    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path object_path(const std::string& key, const char* ext) const;
    std::shared_ptr<std::mutex> key_lock(const std::string& key);

    std::filesystem::path root_;
    int audit_every_;
    mutable std::shared_mutex index_mutex_;
    std::mutex locks_mutex_;
    std::map<std::string, std::weak_ptr<std::mutex>> key_locks_;
    std::atomic<std::uint64_t> hits_{0}, misses_{0}, audits_{0}, audit_failures_{0};
};

/// Writes data to path via a sibling temporary file and an atomic rename.
void atomic_write(const std::filesystem::path& path, const void* data, std::size_t size);

}  // namespace carpetlab::atlas
