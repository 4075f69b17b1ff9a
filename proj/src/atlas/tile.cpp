#include "carpetlab/atlas/tile.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"
#include "carpetlab/parallel.hpp"
#include "carpetlab/report.hpp"

namespace carpetlab::atlas {

namespace {

std::string join_errors(const std::vector<FieldError>& errors) {
    std::string out = "malformed tile request:";
    for (const auto& e : errors) out += fmt::format(" {}: {};", e.field, e.message);
    return out;
}

constexpr Rgb kCarpetLow{0xd6, 0x27, 0x28};
constexpr Rgb kCarpetHigh{0xff, 0x98, 0x96};
constexpr int kCarpetRampSpan = 12;

}  // namespace

RequestError::RequestError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

TileRequest parse_tile_request(const std::map<std::string, std::string>& query, int default_steps) {
    TileRequest req;
    req.max_steps = default_steps;
    std::vector<FieldError> errors;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = query.find(key);
        return it == query.end() ? nullptr : &it->second;
    };
    auto parse_int = [&](const std::string& key, int lo, int hi, int& out) {
        const std::string* v = get(key);
        if (!v) return;
        try {
            std::size_t used = 0;
            const long x = std::stol(*v, &used);
            if (used != v->size() || x < lo || x > hi) throw std::out_of_range("range");
            out = static_cast<int>(x);
        } catch (const std::exception&) {
            errors.push_back({key, fmt::format("expected an integer in [{}, {}], got '{}'", lo, hi, *v)});
        }
    };
    auto parse_point = [&](const std::string& key, ComplexPoint& out) {
        const std::string* v = get(key);
        if (!v) return false;
        if (auto z = parse_complex(*v)) {
            out = *z;
        } else {
            errors.push_back({key, fmt::format("expected a complex literal a+bi, got '{}'", *v)});
        }
        return true;
    };

    for (const auto& [key, value] : query) {
        static const char* known[] = {"plane", "n", "lambda", "center", "scale", "size", "n_max", "coloring"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
            errors.push_back({key, "unknown parameter"});
        }
    }

    if (const std::string* p = get("plane")) {
        if (*p == "parameter") {
            req.plane = Plane::Parameter;
        } else if (*p == "dynamical") {
            req.plane = Plane::Dynamical;
        } else {
            errors.push_back({"plane", "expected 'parameter' or 'dynamical'"});
        }
    }
    req.coloring = req.plane == Plane::Parameter ? Coloring::Classification : Coloring::EscapeTime;
    if (const std::string* c = get("coloring")) {
        if (*c == "classification") {
            req.coloring = Coloring::Classification;
        } else if (*c == "escape_time") {
            req.coloring = Coloring::EscapeTime;
        } else {
            errors.push_back({"coloring", "expected 'classification' or 'escape_time'"});
        }
    }
    if (req.plane == Plane::Dynamical && req.coloring == Coloring::Classification) {
        errors.push_back({"coloring", "classification coloring needs plane=parameter"});
    }
    parse_int("n", 3, 64, req.n);
    parse_int("size", 1, 1 << 20, req.size);
    if (req.size != 128 && req.size != 256 && req.size != 512) errors.push_back({"size", "expected 128, 256 or 512"});
    parse_int("n_max", 1, 1'000'000, req.max_steps);
    parse_point("center", req.center);
    const bool has_lambda = parse_point("lambda", req.lambda);
    if (req.plane == Plane::Dynamical) {
        if (!has_lambda) errors.push_back({"lambda", "required for dynamical tiles"});
        else if (req.lambda.is_zero()) errors.push_back({"lambda", "lambda must be nonzero"});
    } else {
        req.lambda = ComplexPoint{};
    }
    if (const std::string* s = get("scale")) {
        char* end = nullptr;
        const double v = std::strtod(s->c_str(), &end);
        if (end != s->c_str() + s->size() || !(v > 0) || !std::isfinite(v)) {
            errors.push_back({"scale", "expected a positive number"});
        } else {
            req.scale = v;
        }
    } else {
        errors.push_back({"scale", "required"});
    }
    if (!errors.empty()) throw RequestError(std::move(errors));
    return req;
}

std::string canonical_json(const TileRequest& r) {
    Json doc;
    doc["plane"] = r.plane == Plane::Parameter ? "parameter" : "dynamical";
    doc["n"] = r.n;
    doc["lambda"] = r.plane == Plane::Dynamical ? Json::array({r.lambda.re, r.lambda.im}) : Json(nullptr);
    doc["center"] = Json::array({r.center.re, r.center.im});
    doc["scale"] = r.scale;
    doc["size"] = r.size;
    doc["n_max"] = r.max_steps;
    doc["coloring"] = r.coloring == Coloring::Classification ? "classification" : "escape_time";
    return dump_json(doc);
}

std::string request_digest(const TileRequest& request) { return sha256_hex(canonical_json(request)); }

std::uint64_t tile_work(const TileRequest& r) {
    const std::uint64_t pixels = static_cast<std::uint64_t>(r.size) * static_cast<std::uint64_t>(r.size);
    // classification re-runs the orbit three times, once at twice the steps
    const std::uint64_t factor = r.plane == Plane::Parameter && r.coloring == Coloring::Classification ? 5 : 1;
    return pixels * static_cast<std::uint64_t>(r.max_steps) * factor;
}

Rgb tag_color(int code) noexcept {
    const auto [tag, k] = decode_tag(code);
    switch (tag) {
    case Tag::Cantor: return {0x40, 0x40, 0x40};
    case Tag::CantorCircles: return {0x1f, 0x77, 0xb4};
    case Tag::NonEscaping: return {0x00, 0x00, 0x00};
    case Tag::Undetermined: return {0xff, 0xff, 0xff};
    case Tag::Carpet: {
        const int t = std::min(k - 3, kCarpetRampSpan);
        auto lerp = [t](int a, int b) { return static_cast<std::uint8_t>(a + (b - a) * t / kCarpetRampSpan); };
        return {lerp(kCarpetLow.r, kCarpetHigh.r), lerp(kCarpetLow.g, kCarpetHigh.g), lerp(kCarpetLow.b, kCarpetHigh.b)};
    }
    }
    return {0xff, 0xff, 0xff};
}

Rgb escape_color(std::int32_t escape_index) noexcept {
    if (escape_index < 0) return {0, 0, 0};
    const int v = std::max(32, 255 - 12 * std::max(0, escape_index - 1));
    const auto g = static_cast<std::uint8_t>(v);
    return {g, g, g};
}

std::string code_label(int code) {
    const auto [tag, k] = decode_tag(code);
    if (tag == Tag::Carpet) return fmt::format("Carpet({})", k);
    return std::string(tag_name(tag));
}

RenderedTile render_tile(const TileRequest& request, int threads) {
    const PlaneGrid grid = request.grid();
    const std::size_t pixels = static_cast<std::size_t>(request.size) * static_cast<std::size_t>(request.size);
    std::vector<std::uint8_t> rgb(3 * pixels);
    RenderedTile out;
    auto put = [&](std::size_t i, Rgb c) {
        rgb[3 * i] = c.r;
        rgb[3 * i + 1] = c.g;
        rgb[3 * i + 2] = c.b;
    };

    if (request.plane == Plane::Parameter && request.coloring == Coloring::Classification) {
        const auto codes = parameter_tags(request.n, grid, ClassifyOptions{request.max_steps, 1.0, true}, threads);
        for (std::size_t i = 0; i < pixels; ++i) {
            put(i, tag_color(codes[i]));
            ++out.histogram[code_label(codes[i])];
        }
    } else if (request.plane == Plane::Parameter) {
        std::vector<std::int32_t> escape(pixels, -1);
        parallel_rows(grid.height, threads, [&](int y) {
            for (int x = 0; x < grid.width; ++x) {
                const ComplexPoint lambda = grid.at(x, y);
                if (lambda.is_zero()) continue;
                const auto c = classify_parameter(request.n, lambda, ClassifyOptions{request.max_steps, 1.0, false});
                escape[static_cast<std::size_t>(y) * static_cast<std::size_t>(grid.width) + static_cast<std::size_t>(x)] =
                    c.orbit.escape_index ? *c.orbit.escape_index : -1;
            }
        });
        for (std::size_t i = 0; i < pixels; ++i) put(i, escape_color(escape[i]));
    } else {
        const auto field = escape_time_field(MapFamily::mcmullen(request.n, request.lambda), grid, request.max_steps, threads);
        for (std::size_t i = 0; i < pixels; ++i) put(i, escape_color(field.values[i]));
    }
    out.png = encode_png_rgb(request.size, request.size, rgb);
    return out;
}

}  // namespace carpetlab::atlas
