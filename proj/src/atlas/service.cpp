#include "carpetlab/atlas/service.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include "carpetlab/errors.hpp"
#include "carpetlab/parallel.hpp"
#include "carpetlab/report.hpp"

namespace carpetlab::atlas {

struct AtlasService::Job {
    std::atomic<int> rows{0};
    std::atomic<bool> done{false};
    std::mutex error_mutex;
    std::string error;
    std::jthread worker;
};

namespace {

Response json_response(int status, const Json& doc) {
    Response r;
    r.status = status;
    r.body = dump_json(doc);
    return r;
}

Response error_response(int status, const std::string& message, Json extra = Json::object()) {
    Json doc;
    doc["error"] = message;
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
    return json_response(status, doc);
}

Response field_errors(const RequestError& e) {
    Json fields = Json::array();
    for (const auto& f : e.errors()) fields.push_back({{"field", f.field}, {"message", f.message}});
    return error_response(400, "malformed request", {{"fields", fields}});
}

Response budget_error(std::uint64_t required, std::uint64_t budget) {
    return error_response(429, "work budget exceeded", {{"required", required}, {"budget", budget}});
}

class InflightGuard {
public:
    InflightGuard(std::atomic<int>& counter, int limit) : counter_(counter), admitted_(++counter_ <= limit) {}
    ~InflightGuard() { --counter_; }
    bool admitted() const noexcept { return admitted_; }

private:
    std::atomic<int>& counter_;
    bool admitted_;
};

}  // namespace

AtlasService::AtlasService(ServiceConfig config)
    : config_(std::move(config)),
      cache_(config_.cache_dir / "tiles", config_.audit_every),
      surveys_(config_.cache_dir / "surveys") {}

AtlasService::~AtlasService() {
    stop();
    join_jobs();
}

int AtlasService::threads() const noexcept { return config_.threads > 0 ? config_.threads : default_threads(); }

Response AtlasService::tile(const std::map<std::string, std::string>& query) {
    TileRequest request;
    try {
        request = parse_tile_request(query, config_.default_n_max);
    } catch (const RequestError& e) {
        return field_errors(e);
    }
    if (tile_work(request) > config_.tile_budget) return budget_error(tile_work(request), config_.tile_budget);
    InflightGuard guard(inflight_, config_.max_inflight);
    if (!guard.admitted()) return error_response(429, "too many concurrent requests");

    const std::string digest = request_digest(request);
    const auto lookup = cache_.fetch(digest, [&] {
        RenderedTile rendered = render_tile(request, threads());
        Json meta;
        meta["digest"] = digest;
        meta["histogram"] = Json::object();
        for (const auto& [label, count] : rendered.histogram) meta["histogram"][label] = count;
        return CachedTile{std::move(rendered.png), dump_json(meta)};
    });

    Response r;
    r.content_type = "image/png";
    r.body.assign(lookup.tile.data.begin(), lookup.tile.data.end());
    r.headers["X-Cache"] = lookup.hit ? "hit" : "miss";
    r.headers["X-Input-Digest"] = digest;
    const Json meta = Json::parse(lookup.tile.metadata, nullptr, false);
    if (!meta.is_discarded() && meta.contains("histogram") && !meta["histogram"].empty()) {
        r.headers["X-Histogram"] = dump_json(meta["histogram"]);
    }
    return r;
}

Response AtlasService::classify(const std::map<std::string, std::string>& query) {
    std::vector<FieldError> errors;
    int n = 3;
    int steps = config_.classify_n_max;
    std::optional<ComplexPoint> lambda;
    for (const auto& [key, value] : query) {
        if (key == "n") {
            try {
                std::size_t used = 0;
                n = std::stoi(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                errors.push_back({"n", "expected an integer"});
            }
        } else if (key == "n_max") {
            try {
                std::size_t used = 0;
                steps = std::stoi(value, &used);
                if (used != value.size() || steps < 1) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                errors.push_back({"n_max", "expected a positive integer"});
            }
        } else if (key == "lambda") {
            lambda = parse_complex(value);
            if (!lambda) errors.push_back({"lambda", "expected a complex literal a+bi"});
        } else {
            errors.push_back({key, "unknown parameter"});
        }
    }
    if (!lambda && std::none_of(errors.begin(), errors.end(), [](const FieldError& f) { return f.field == "lambda"; })) {
        errors.push_back({"lambda", "required"});
    }
    if (n < 3) errors.push_back({"n", "McMullen degree must be >= 3"});
    if (lambda && lambda->is_zero()) errors.push_back({"lambda", "lambda must be nonzero"});
    if (!errors.empty()) return field_errors(RequestError(std::move(errors)));

    const std::uint64_t work = static_cast<std::uint64_t>(steps) * 5;
    if (work > config_.tile_budget) return budget_error(work, config_.tile_budget);
    try {
        const Classification c = classify_parameter(n, *lambda, ClassifyOptions{steps, 1.0, true});
        Json doc = classification_json(n, *lambda, c);
        doc["input_digest"] = sha256_hex(dump_json(Json{{"n", n}, {"lambda", {lambda->re, lambda->im}}, {"n_max", steps}}));
        return json_response(200, doc);
    } catch (const InvalidParameter& e) {
        return error_response(400, e.what());
    }
}

SurveyRequest parse_survey_request(const std::string& body, int default_steps) {
    const Json doc = Json::parse(body, nullptr, false);
    std::vector<FieldError> errors;
    if (doc.is_discarded() || !doc.is_object()) throw RequestError(std::vector<FieldError>{{"body", "expected a JSON object"}});
    SurveyRequest r;
    r.max_steps = default_steps;
    try {
        const auto& region = doc.at("region");
        if (!region.is_array() || region.size() != 4) throw std::invalid_argument("region");
        r.region = {region[0].get<double>(), region[1].get<double>(), region[2].get<double>(), region[3].get<double>()};
    } catch (const std::exception&) {
        errors.push_back({"region", "expected [re_min, re_max, im_min, im_max]"});
    }
    try {
        const auto& grid = doc.at("grid");
        if (grid.is_number_integer()) {
            r.width = r.height = grid.get<int>();
        } else if (grid.is_array() && grid.size() == 2) {
            r.width = grid[0].get<int>();
            r.height = grid[1].get<int>();
        } else {
            throw std::invalid_argument("grid");
        }
    } catch (const std::exception&) {
        errors.push_back({"grid", "expected [width, height] or a side length"});
    }
    if (doc.contains("n")) {
        if (doc["n"].is_number_integer()) r.n = doc["n"].get<int>();
        else errors.push_back({"n", "expected an integer"});
    }
    if (doc.contains("n_max")) {
        if (doc["n_max"].is_number_integer()) r.max_steps = doc["n_max"].get<int>();
        else errors.push_back({"n_max", "expected an integer"});
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "region" && it.key() != "grid" && it.key() != "n" && it.key() != "n_max") {
            errors.push_back({it.key(), "unknown field"});
        }
    }
    if (errors.empty()) {
        try {
            validate(r);
        } catch (const InvalidParameter& e) {
            errors.push_back({"request", e.what()});
        }
    }
    if (!errors.empty()) throw RequestError(std::move(errors));
    return r;
}

Response AtlasService::submit_survey(const std::string& body, bool wait) {
    SurveyRequest request;
    try {
        request = parse_survey_request(body, config_.classify_n_max);
    } catch (const RequestError& e) {
        return field_errors(e);
    }
    if (survey_work(request) > config_.survey_budget) return budget_error(survey_work(request), config_.survey_budget);
    const std::string digest = request_digest(request);
    if (auto done = surveys_.load(digest)) return json_response(200, done->to_json());
    if (wait) {
        InflightGuard guard(inflight_, config_.max_inflight);
        if (!guard.admitted()) return error_response(429, "too many concurrent requests");
        return json_response(200, surveys_.run_or_resume(request, threads()).to_json());
    }

    std::lock_guard lock(jobs_mutex_);
    auto& job = jobs_[digest];
    if (!job) {
        job = std::make_shared<Job>();
        job->worker = std::jthread([this, request, j = job.get()] {
            try {
                surveys_.run_or_resume(request, threads(), [j](int rows) { j->rows = rows; });
            } catch (const std::exception& e) {
                std::lock_guard g(j->error_mutex);
                j->error = e.what();
            }
            j->done = true;
        });
    }
    return json_response(202, Json{{"digest", digest}, {"status", "running"}, {"rows_done", job->rows.load()},
                                   {"rows", request.height}});
}

Response AtlasService::survey(const std::string& digest) {
    if (auto done = surveys_.load(digest)) return json_response(200, done->to_json());
    std::shared_ptr<Job> job;
    {
        std::lock_guard lock(jobs_mutex_);
        if (auto it = jobs_.find(digest); it != jobs_.end()) job = it->second;
    }
    if (job) {
        {
            std::lock_guard g(job->error_mutex);
            if (!job->error.empty()) return error_response(500, job->error);
        }
        if (job->done) {
            if (auto done = surveys_.load(digest)) return json_response(200, done->to_json());
        }
        return json_response(202, Json{{"digest", digest}, {"status", "running"}, {"rows_done", job->rows.load()}});
    }
    if (auto rows = surveys_.checkpoint_rows(digest)) {
        return json_response(202, Json{{"digest", digest}, {"status", "suspended"}, {"rows_done", *rows}});
    }
    return error_response(404, "unknown survey digest");
}

void AtlasService::join_jobs() {
    std::map<std::string, std::shared_ptr<Job>> jobs;
    {
        std::lock_guard lock(jobs_mutex_);
        jobs = jobs_;
    }
    for (auto& [digest, job] : jobs) {
        if (job->worker.joinable()) job->worker.join();
    }
}

namespace {

std::map<std::string, std::string> query_of(const httplib::Request& req) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : req.params) out.emplace(k, v);
    return out;
}

void send(httplib::Response& res, const Response& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
}

}  // namespace

void AtlasService::mount(httplib::Server& server) {
    server.Get("/tile", [this](const httplib::Request& req, httplib::Response& res) { send(res, tile(query_of(req))); });
    server.Get("/classify", [this](const httplib::Request& req, httplib::Response& res) {
        send(res, classify(query_of(req)));
    });
    server.Post("/survey", [this](const httplib::Request& req, httplib::Response& res) {
        const bool wait = req.has_param("wait") && req.get_param_value("wait") != "0";
        send(res, submit_survey(req.body, wait));
    });
    server.Get(R"(/survey/([0-9a-f]{64}))", [this](const httplib::Request& req, httplib::Response& res) {
        send(res, survey(req.matches[1].str()));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, error_response(500, what));
    });
}

bool AtlasService::listen() {
    server_ = std::make_unique<httplib::Server>();
    mount(*server_);
    return server_->listen(config_.bind_address, config_.port);
}

void AtlasService::stop() {
    if (server_) server_->stop();
}

}  // namespace carpetlab::atlas
