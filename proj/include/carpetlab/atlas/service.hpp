#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "carpetlab/atlas/config.hpp"
#include "carpetlab/atlas/survey.hpp"
#include "carpetlab/atlas/tile.hpp"
#include "carpetlab/atlas/tile_cache.hpp"

namespace httplib {
class Server;
}

namespace carpetlab::atlas {

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

/// Request handlers of the atlas service, independent of the HTTP transport.
class AtlasService {
public:
    explicit AtlasService(ServiceConfig config);
    ~AtlasService();

    AtlasService(const AtlasService&) = delete;
    AtlasService& operator=(const AtlasService&) = delete;

    /// GET /tile
    Response tile(const std::map<std::string, std::string>& query);
    /// GET /classify?n=3&lambda=a+bi[&n_max=..]
    Response classify(const std::map<std::string, std::string>& query);
    /// POST /survey with a JSON body; ?wait=1 runs to completion before replying.
    Response submit_survey(const std::string& body, bool wait);
    /// GET /survey/{digest}
    Response survey(const std::string& digest);

    /// Registers the endpoints on an httplib server.
    void mount(httplib::Server& server);

    /// Blocks serving on the configured address and port.
    bool listen();
    void stop();

    const ServiceConfig& config() const noexcept { return config_; }
    CacheStats cache_stats() const { return cache_.stats(); }
    /// Waits for background survey jobs.
    void join_jobs();

private:
    struct Job;
    int threads() const noexcept;

    ServiceConfig config_;
    TileCache cache_;
    SurveyStore surveys_;
    std::atomic<int> inflight_{0};
    std::mutex jobs_mutex_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::unique_ptr<httplib::Server> server_;
};

/// Parses a survey request body:
/// {"region": [re_min, re_max, im_min, im_max], "grid": [w, h], "n": 3, "n_max": 1000}.
SurveyRequest parse_survey_request(const std::string& body, int default_steps);

}  // namespace carpetlab::atlas
