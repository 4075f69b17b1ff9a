#include "carpetlab/atlas/survey.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "carpetlab/atlas/tile.hpp"
#include "carpetlab/atlas/tile_cache.hpp"
#include "carpetlab/dynamics.hpp"
#include "carpetlab/errors.hpp"
#include "carpetlab/parallel.hpp"

namespace carpetlab::atlas {

namespace fs = std::filesystem;

namespace {

constexpr int kRowBlock = 16;
constexpr char kCheckpointMagic[8] = {'C', 'L', 'S', 'V', 'C', 'K', '1', '\n'};

}  // namespace

ComplexPoint SurveyRequest::cell_center(int i, int j) const noexcept {
    return {region.re_min + (i + 0.5) * ((region.re_max - region.re_min) / width),
            region.im_max - (j + 0.5) * ((region.im_max - region.im_min) / height)};
}

void validate(const SurveyRequest& r) {
    const Region& g = r.region;
    for (double v : {g.re_min, g.re_max, g.im_min, g.im_max}) {
        if (!std::isfinite(v)) throw InvalidParameter("survey region bounds must be finite");
    }
    if (g.re_max < g.re_min || g.im_max < g.im_min) throw InvalidParameter("survey region is inverted");
    if (r.width < 1 || r.height < 1 || r.width > kMaxSurveySide || r.height > kMaxSurveySide) {
        throw InvalidParameter(fmt::format("survey grid must lie within 1..{} per side, got {}x{}", kMaxSurveySide, r.width, r.height));
    }
    if (r.n < 3) throw InvalidParameter("McMullen degree n must be >= 3");
    if (r.max_steps < 1) throw InvalidParameter("n_max must be >= 1");
}

std::string canonical_json(const SurveyRequest& r) {
    Json doc;
    doc["region"] = Json::array({r.region.re_min, r.region.re_max, r.region.im_min, r.region.im_max});
    doc["grid"] = Json::array({r.width, r.height});
    doc["n"] = r.n;
    doc["n_max"] = r.max_steps;
    return dump_json(doc);
}

std::string request_digest(const SurveyRequest& request) { return sha256_hex(canonical_json(request)); }

std::uint64_t survey_work(const SurveyRequest& r) {
    return static_cast<std::uint64_t>(r.width) * static_cast<std::uint64_t>(r.height) *
           static_cast<std::uint64_t>(r.max_steps) * 5;
}

Json SurveyResult::to_json() const {
    Json doc;
    doc["digest"] = digest;
    doc["region"] = Json::array({request.region.re_min, request.region.re_max, request.region.im_min, request.region.im_max});
    doc["grid"] = Json::array({request.width, request.height});
    doc["n"] = request.n;
    doc["n_max"] = request.max_steps;
    Json hist = Json::object();
    for (const auto& [label, count] : histogram) hist[label] = count;
    doc["histogram"] = std::move(hist);
    doc["cells"] = codes;
    return doc;
}

SurveyResult SurveyResult::from_json(const Json& doc) {
    SurveyResult r;
    const auto& region = doc.at("region");
    r.request.region = {region.at(0).get<double>(), region.at(1).get<double>(), region.at(2).get<double>(),
                        region.at(3).get<double>()};
    r.request.width = doc.at("grid").at(0).get<int>();
    r.request.height = doc.at("grid").at(1).get<int>();
    r.request.n = doc.at("n").get<int>();
    r.request.max_steps = doc.at("n_max").get<int>();
    r.digest = doc.at("digest").get<std::string>();
    r.codes = doc.at("cells").get<std::vector<int>>();
    for (auto it = doc.at("histogram").begin(); it != doc.at("histogram").end(); ++it) {
        r.histogram[it.key()] = it.value().get<std::uint64_t>();
    }
    if (r.codes.size() != static_cast<std::size_t>(r.request.width) * static_cast<std::size_t>(r.request.height)) {
        throw DataError("survey document has the wrong number of cells");
    }
    return r;
}

SurveyResult run_survey(const SurveyRequest& request, int threads, const std::vector<int>& resume_codes, int resume_rows,
                        const std::function<void(int, const std::vector<int>&)>& on_rows) {
    validate(request);
    SurveyResult result;
    result.request = request;
    result.digest = request_digest(request);
    const auto w = static_cast<std::size_t>(request.width);
    result.codes.assign(w * static_cast<std::size_t>(request.height), -2);
    resume_rows = std::clamp(resume_rows, 0, request.height);
    if (resume_codes.size() >= w * static_cast<std::size_t>(resume_rows)) {
        std::copy_n(resume_codes.begin(), w * static_cast<std::size_t>(resume_rows), result.codes.begin());
    } else {
        resume_rows = 0;
    }

    const ClassifyOptions opts{request.max_steps, 1.0, true};
    for (int start = resume_rows; start < request.height; start += kRowBlock) {
        const int rows = std::min(kRowBlock, request.height - start);
        parallel_rows(rows, threads, [&](int r) {
            const int j = start + r;
            for (int i = 0; i < request.width; ++i) {
                const ComplexPoint lambda = request.cell_center(i, j);
                int code = -2;
                if (!lambda.is_zero()) {
                    const Classification c = classify_parameter(request.n, lambda, opts);
                    code = tag_code(c.tag, c.k);
                }
                result.codes[static_cast<std::size_t>(j) * w + static_cast<std::size_t>(i)] = code;
            }
        });
        if (on_rows) on_rows(start + rows, result.codes);
    }
    for (int code : result.codes) ++result.histogram[code_label(code)];
    return result;
}

SurveyStore::SurveyStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path SurveyStore::result_path(const std::string& digest) const { return root_ / (digest + ".json"); }
fs::path SurveyStore::checkpoint_path(const std::string& digest) const { return root_ / (digest + ".partial"); }

std::optional<SurveyResult> SurveyStore::load(const std::string& digest) const {
    if (digest.find_first_not_of("0123456789abcdef") != std::string::npos || digest.size() != 64) return std::nullopt;
    std::ifstream in(result_path(digest));
    if (!in) return std::nullopt;
    const Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    return SurveyResult::from_json(doc);
}

void SurveyStore::save(const SurveyResult& result) const {
    const std::string text = dump_json(result.to_json());
    atomic_write(result_path(result.digest), text.data(), text.size());
    std::error_code ec;
    fs::remove(checkpoint_path(result.digest), ec);
}

namespace {

struct Checkpoint {
    int rows = 0;
    std::vector<int> codes;
};

std::optional<Checkpoint> read_checkpoint(const fs::path& path, const SurveyRequest& r) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::int32_t header[3];
    if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(header), sizeof header)) return std::nullopt;
    if (header[1] != r.width || header[2] != r.height || header[0] < 0 || header[0] > r.height) return std::nullopt;
    Checkpoint cp;
    cp.rows = header[0];
    cp.codes.resize(static_cast<std::size_t>(cp.rows) * static_cast<std::size_t>(r.width));
    if (!in.read(reinterpret_cast<char*>(cp.codes.data()), static_cast<std::streamsize>(cp.codes.size() * sizeof(int)))) {
        return std::nullopt;
    }
    return cp;
}

void write_checkpoint(const fs::path& path, const SurveyRequest& r, int rows, const std::vector<int>& codes) {
    std::string buf(kCheckpointMagic, 8);
    const std::int32_t header[3] = {rows, r.width, r.height};
    buf.append(reinterpret_cast<const char*>(header), sizeof header);
    buf.append(reinterpret_cast<const char*>(codes.data()), static_cast<std::size_t>(rows) * static_cast<std::size_t>(r.width) * sizeof(int));
    atomic_write(path, buf.data(), buf.size());
}

}  // namespace

std::optional<int> SurveyStore::checkpoint_rows(const std::string& digest) const {
    std::ifstream in(checkpoint_path(digest), std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::int32_t rows = 0;
    if (!in.read(magic, 8) || !in.read(reinterpret_cast<char*>(&rows), sizeof rows)) return std::nullopt;
    return rows;
}

SurveyResult SurveyStore::run_or_resume(const SurveyRequest& request, int threads,
                                        const std::function<void(int)>& progress) const {
    validate(request);
    const std::string digest = request_digest(request);
    if (auto done = load(digest)) return *done;
    Checkpoint cp;
    if (auto existing = read_checkpoint(checkpoint_path(digest), request)) cp = std::move(*existing);
    SurveyResult result = run_survey(request, threads, cp.codes, cp.rows, [&](int rows, const std::vector<int>& codes) {
        write_checkpoint(checkpoint_path(digest), request, rows, codes);
        if (progress) progress(rows);
    });
    save(result);
    return result;
}

}  // namespace carpetlab::atlas
