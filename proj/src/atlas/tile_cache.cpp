#include "carpetlab/atlas/tile_cache.hpp"

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"
#include "carpetlab/report.hpp"

namespace carpetlab::atlas {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string content_digest(const Bytes& data) {
    return sha256_hex(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

}  // namespace

void atomic_write(const fs::path& path, const void* data, std::size_t size) {
    fs::create_directories(path.parent_path());
    thread_local std::mt19937_64 rng{std::random_device{}()};
    const fs::path tmp = path.parent_path() / fmt::format(".{}.{:016x}.tmp", path.filename().string(), rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write cache file: " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw DataError("cannot write cache file: " + tmp.string());
    }
    fs::rename(tmp, path);
}

TileCache::TileCache(fs::path root, int audit_every) : root_(std::move(root)), audit_every_(audit_every) {
    fs::create_directories(root_ / "objects");
}

fs::path TileCache::object_path(const std::string& key, const char* ext) const {
    if (key.size() < 2 || key.find_first_not_of("0123456789abcdef") != std::string::npos) {
        throw InvalidParameter("cache keys are lowercase hex digests");
    }
    return root_ / "objects" / key.substr(0, 2) / (key + ext);
}

std::optional<CachedTile> TileCache::get(const std::string& key) const {
    std::shared_lock lock(index_mutex_);
    auto data = slurp(object_path(key, ".png"));
    if (!data) return std::nullopt;
    CachedTile tile;
    tile.data.assign(data->begin(), data->end());
    tile.metadata = slurp(object_path(key, ".json")).value_or("{}");
    return tile;
}

void TileCache::put(const std::string& key, const CachedTile& tile) {
    // metadata first so a visible tile always has its metadata
    atomic_write(object_path(key, ".json"), tile.metadata.data(), tile.metadata.size());
    atomic_write(object_path(key, ".png"), tile.data.data(), tile.data.size());
    std::unique_lock lock(index_mutex_);
    std::ofstream index(root_ / "index.tsv", std::ios::app);
    index << key << '\t' << content_digest(tile.data) << '\t' << tile.data.size() << '\n';
}

std::shared_ptr<std::mutex> TileCache::key_lock(const std::string& key) {
    std::lock_guard guard(locks_mutex_);
    auto& weak = key_locks_[key];
    auto lock = weak.lock();
    if (!lock) {
        lock = std::make_shared<std::mutex>();
        weak = lock;
    }
    // drop expired entries now and then
    if (key_locks_.size() > 1024) {
        std::erase_if(key_locks_, [](const auto& kv) { return kv.second.expired(); });
    }
    return lock;
}

TileCache::Lookup TileCache::fetch(const std::string& key, const std::function<CachedTile()>& render) {
    if (auto cached = get(key)) {
        const std::uint64_t hit_number = ++hits_;
        if (audit_every_ > 0 && hit_number % static_cast<std::uint64_t>(audit_every_) == 0) {
            ++audits_;
            CachedTile fresh = render();
            if (content_digest(fresh.data) != content_digest(cached->data)) {
                ++audit_failures_;
                put(key, fresh);
                return {std::move(fresh), true};
            }
        }
        return {std::move(*cached), true};
    }
    auto lock = key_lock(key);
    std::lock_guard guard(*lock);
    if (auto cached = get(key)) {
        ++hits_;
        return {std::move(*cached), true};
    }
    ++misses_;
    CachedTile fresh = render();
    put(key, fresh);
    return {std::move(fresh), false};
}

CacheStats TileCache::stats() const {
    return CacheStats{hits_.load(), misses_.load(), audits_.load(), audit_failures_.load()};
}

}  // namespace carpetlab::atlas
