#include "carpetlab/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "carpetlab/atlas/config.hpp"
#include "carpetlab/atlas/service.hpp"
#include "carpetlab/atlas/survey.hpp"
#include "carpetlab/atlas/tile.hpp"
#include "carpetlab/carpet.hpp"
#include "carpetlab/dynamics.hpp"
#include "carpetlab/errors.hpp"
#include "carpetlab/image_io.hpp"
#include "carpetlab/metrics.hpp"
#include "carpetlab/parallel.hpp"
#include "carpetlab/render.hpp"
#include "carpetlab/report.hpp"

namespace carpetlab {

namespace {

/// Bad flag values detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ComplexPoint complex_flag(const std::string& flag, const std::string& text) {
    if (auto z = parse_complex(text)) return *z;
    throw UsageError(fmt::format("{}: expected a complex literal such as 1+0i or -0.5-2e-3i, got '{}'", flag, text));
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

double number_flag(const std::string& flag, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(fmt::format("{}: expected a number, got '{}'", flag, text));
}

std::vector<double> number_list(const std::string& flag, const std::string& text) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) values.push_back(number_flag(flag, part));
    if (values.empty()) throw UsageError(flag + ": expected a comma-separated list of numbers");
    return values;
}

void write_json(std::ostream& out, const Json& doc) { out << dump_json(doc) << '\n'; }

std::string digest_of(const Json& parameters) { return sha256_hex(dump_json(parameters)); }

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("-"); }

/// Where a raster comes from: a file, or a generated carpet.
struct RasterSource {
    std::string input;
    int carpet_k = 0;
    bool standard = false;
    int depth = -1;
    int resolution = 729;

    void add_to(CLI::App* app) {
        app->add_option("--input", input, "PGM or PNG image (pixels >= 128 are occupied)");
        app->add_option("--carpet-k", carpet_k, "generate F_m(k) instead of reading an image")->check(CLI::Range(3, 1000));
        app->add_flag("--standard", standard, "generate the middle-ninths carpet instead of reading an image");
        app->add_option("--depth", depth, "carpet depth m")->check(CLI::Range(0, 62));
        app->add_option("--resolution", resolution, "generated raster side in pixels")->check(CLI::Range(1, 16384));
    }

    void validate() const {
        const int chosen = (input.empty() ? 0 : 1) + (carpet_k > 0 ? 1 : 0) + (standard ? 1 : 0);
        if (chosen != 1) throw UsageError("give exactly one of --input, --carpet-k or --standard");
        if (input.empty() && depth < 0) throw UsageError("--depth is required for a generated carpet");
    }

    std::pair<Raster, std::string> load() const {
        if (!input.empty()) {
            std::ifstream in(input, std::ios::binary);
            if (!in) throw DataError("cannot read input: " + input);
            Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            Raster r;
            try {
                r = decode_raster(data);
            } catch (const DataError& e) {
                throw DataError(fmt::format("cannot read input: {}: {}", input, e.what()));
            }
            return {std::move(r), sha256_hex(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()))};
        }
        Json p = {{"carpet", standard ? "middle-ninths" : "dimension-one"}, {"k", standard ? 3 : carpet_k},
                  {"m", depth}, {"resolution", resolution}};
        Raster r = standard ? standard_carpet(depth, resolution) : rasterize_carpet(carpet_k, depth, resolution);
        return {std::move(r), digest_of(p)};
    }

    Json parameters() const {
        if (!input.empty()) return {{"input", input}};
        return {{"carpet", standard ? "middle-ninths" : "dimension-one"}, {"k", standard ? 3 : carpet_k},
                {"m", depth}, {"resolution", resolution}};
    }
};

struct FamilyFlags {
    std::string family = "mcmullen";
    int n = 3;
    std::string lambda = "1+0i";
    std::string c = "0+0i";

    void add_to(CLI::App* app) {
        app->add_option("--family", family, "mcmullen or quadratic")->check(CLI::IsMember({"mcmullen", "quadratic"}));
        app->add_option("--n", n, "degree n of z^n + lambda/z^n")->check(CLI::Range(3, 64));
        app->add_option("--lambda", lambda, "McMullen parameter a+bi");
        app->add_option("--c", c, "quadratic parameter a+bi");
    }

    MapFamily build() const {
        if (family == "quadratic") return MapFamily::quadratic(complex_flag("--c", c));
        const ComplexPoint l = complex_flag("--lambda", lambda);
        if (l.is_zero()) throw UsageError("--lambda: lambda must be nonzero");
        return MapFamily::mcmullen(n, l);
    }

    Json parameters() const {
        if (family == "quadratic") return {{"family", family}, {"c", c}};
        return {{"family", family}, {"n", n}, {"lambda", lambda}};
    }
};

struct ViewFlags {
    std::string center = "0+0i";
    double scale = 4.0;
    int size = 512;

    void add_to(CLI::App* app, double default_scale) {
        scale = default_scale;
        app->add_option("--center", center, "view centre a+bi");
        app->add_option("--scale", scale, "plane units across the image")->check(CLI::PositiveNumber);
        app->add_option("--size", size, "image side in pixels")->check(CLI::Range(1, 8192));
    }

    PlaneGrid grid() const { return PlaneGrid::square(complex_flag("--center", center), scale, size); }
};

std::uint8_t luma(atlas::Rgb c) { return c.r; }

void check_format(const std::string& format) {
    if (format != "png" && format != "pgm") throw UsageError("--format: expected png or pgm");
}

Json image_summary(const std::string& path, const std::string& format, int w, int h, const Bytes& bytes) {
    return {{"output", path},
            {"format", format},
            {"width", w},
            {"height", h},
            {"sha256", sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()))}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"McMullen-map classification, nested-square carpets and fractal measurements", "carpetlab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "carpetlab 0.1.0");
    app.option_defaults()->always_capture_default();

    int threads = 0;
    bool json = false;
    app.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--json", json, "print machine-readable JSON on stdout");

    // classify
    auto* classify = app.add_subcommand("classify", "classify a McMullen parameter by its critical orbit");
    int cl_n = 3;
    std::string cl_lambda;
    int cl_steps = 1000;
    bool cl_no_stability = false;
    classify->add_option("--n", cl_n, "degree n")->check(CLI::Range(3, 64));
    classify->add_option("--lambda", cl_lambda, "parameter a+bi (use --lambda=-1-2i for a leading minus)")->required();
    classify->add_option("--n-max", cl_steps, "iteration budget")->check(CLI::Range(1, 100'000'000));
    classify->add_flag("--no-stability", cl_no_stability, "skip the rho / N_max stability re-runs");

    // julia
    auto* julia = app.add_subcommand("julia", "render a dynamical plane");
    FamilyFlags ju_family;
    ViewFlags ju_view;
    int ju_steps = 100;
    std::string ju_mode = "set";
    std::string ju_output;
    std::string ju_format = "png";
    ju_family.add_to(julia);
    ju_view.add_to(julia, 4.0);
    julia->add_option("--n-max", ju_steps, "iteration budget per pixel")->check(CLI::Range(1, 1'000'000));
    julia->add_option("--mode", ju_mode, "set (Julia set occupancy) or escape (escape-time gray)")
        ->check(CLI::IsMember({"set", "escape"}));
    julia->add_option("--output,-o", ju_output, "output image path")->required();
    julia->add_option("--format", ju_format, "png or pgm");

    // atlas
    auto* atlas_cmd = app.add_subcommand("atlas", "render a parameter-plane atlas image (PNG, RGB)");
    int at_n = 3;
    ViewFlags at_view;
    int at_steps = 100;
    std::string at_coloring = "classification";
    std::string at_output;
    std::string at_format = "png";
    atlas_cmd->add_option("--n", at_n, "degree n")->check(CLI::Range(3, 64));
    at_view.add_to(atlas_cmd, 0.6);
    atlas_cmd->add_option("--n-max", at_steps, "iteration budget per pixel")->check(CLI::Range(1, 1'000'000));
    atlas_cmd->add_option("--coloring", at_coloring, "classification or escape_time")
        ->check(CLI::IsMember({"classification", "escape_time"}));
    atlas_cmd->add_option("--output,-o", at_output, "output image path")->required();
    atlas_cmd->add_option("--format", at_format, "png (colour atlases have no PGM form)");

    // survey
    auto* survey = app.add_subcommand("survey", "classify every cell centre of a parameter region");
    std::string sv_region = "-1,1,-1,1";
    std::string sv_grid = "64";
    int sv_n = 3;
    int sv_steps = 1000;
    std::string sv_store;
    std::string sv_output;
    survey->add_option("--region", sv_region, "re_min,re_max,im_min,im_max (use --region=-a,... for a leading minus)");
    survey->add_option("--grid", sv_grid, "cells per side, or WxH");
    survey->add_option("--n", sv_n, "degree n")->check(CLI::Range(3, 64));
    survey->add_option("--n-max", sv_steps, "iteration budget per cell")->check(CLI::Range(1, 100'000'000));
    survey->add_option("--store", sv_store, "directory for persisted, resumable results");
    survey->add_option("--output,-o", sv_output, "write the full result JSON here");

    // carpet
    auto* carpet = app.add_subcommand("carpet", "nested-square carpet counts, cover bounds and rasters");
    int ca_k = 3;
    bool ca_standard = false;
    int ca_depth = 0;
    bool ca_counts = false;
    bool ca_squares = false;
    std::vector<double> ca_cover;
    int ca_resolution = 729;
    std::string ca_output;
    std::string ca_format = "png";
    carpet->add_option("--k", ca_k, "grid base k")->check(CLI::Range(3, 1000));
    carpet->add_flag("--standard", ca_standard, "middle-ninths carpet instead of F_m(k)");
    carpet->add_option("--depth,--m", ca_depth, "depth m")->required()->check(CLI::Range(0, 1000));
    carpet->add_flag("--counts", ca_counts, "print b_m and l_m");
    carpet->add_flag("--squares", ca_squares, "list every square in the JSON output");
    carpet->add_option("--cover", ca_cover, "exponents s for the log cover bound")->delimiter(',')->check(CLI::PositiveNumber);
    carpet->add_option("--resolution", ca_resolution, "raster side in pixels")->check(CLI::Range(1, 16384));
    carpet->add_option("--output,-o", ca_output, "write a raster image here");
    carpet->add_option("--format", ca_format, "png or pgm");

    // boxdim
    auto* boxdim = app.add_subcommand("boxdim", "box-counting dimension of a raster");
    RasterSource bd_source;
    int bd_levels = 0;
    std::vector<int> bd_window;
    bd_source.add_to(boxdim);
    boxdim->add_option("--levels", bd_levels, "dyadic levels (default: all)")->check(CLI::Range(2, 30));
    boxdim->add_option("--window", bd_window, "first,last scale index of the fit")->delimiter(',')->expected(2);

    // area
    auto* area = app.add_subcommand("area", "non-escaping area fractions along an iteration schedule");
    FamilyFlags ar_family;
    ViewFlags ar_view;
    std::string ar_schedule = "50,100,200";
    ar_family.add_to(area);
    ar_view.add_to(area, 4.0);
    area->add_option("--schedule", ar_schedule, "strictly increasing N_max values");

    // whyburn
    auto* whyburn = app.add_subcommand("whyburn", "complement components, diameter profile and boundary gaps");
    RasterSource wb_source;
    std::string wb_eps = "0.5,0.4,0.3,0.2,0.1,0.05";
    bool wb_sphere = false;
    wb_source.add_to(whyburn);
    whyburn->add_option("--eps", wb_eps, "diameter thresholds");
    whyburn->add_flag("--sphere", wb_sphere, "measure diameters in the chordal metric");

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP atlas service");
    std::string sv_config;
    std::optional<std::string> sv_bind;
    std::optional<int> sv_port;
    std::optional<std::string> sv_cache;
    serve->add_option("--config", sv_config, "key = value configuration file");
    serve->add_option("--bind", sv_bind, "listen address");
    serve->add_option("--port", sv_port, "TCP port")->check(CLI::Range(0, 65535));
    serve->add_option("--cache-dir", sv_cache, "tile cache and survey store directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "carpetlab 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "carpetlab: " << e.what() << '\n';
        return 2;
    }

    const int workers = threads > 0 ? threads : default_threads();

    try {
        if (classify->parsed()) {
            const ComplexPoint lambda = complex_flag("--lambda", cl_lambda);
            if (lambda.is_zero()) throw UsageError("--lambda: lambda must be nonzero");
            const Classification c = classify_parameter(cl_n, lambda, ClassifyOptions{cl_steps, 1.0, !cl_no_stability});
            if (json) {
                write_json(out, classification_json(cl_n, lambda, c));
            } else {
                out << c.label() << '\n';
                out << fmt::format("escape_index={} min_central_index={} steps={} R={} rho={} N_max={} {}\n",
                                   opt_int(c.orbit.escape_index), opt_int(c.orbit.min_central_index),
                                   c.orbit.steps_computed, c.escape_r, c.central_r, c.max_steps,
                                   !c.stability.checked ? "unchecked" : (c.stability.stable ? "stable" : "unstable"));
            }
            return 0;
        }

        if (julia->parsed()) {
            check_format(ju_format);
            const MapFamily family = ju_family.build();
            const PlaneGrid grid = ju_view.grid();
            Bytes bytes;
            Json extra = Json::object();
            if (ju_mode == "set") {
                const Raster r = julia_raster(family, grid, ju_steps, workers);
                bytes = encode_raster(r, ju_format);
                extra["occupied_fraction"] = r.occupied_fraction();
            } else {
                const ScalarField field = escape_time_field(family, grid, ju_steps, workers);
                std::vector<std::uint8_t> gray(field.values.size());
                for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = luma(atlas::escape_color(field.values[i]));
                bytes = encode_gray(grid.width, grid.height, gray, ju_format);
            }
            write_bytes(ju_output, bytes);
            if (json) {
                Json doc = image_summary(ju_output, ju_format, grid.width, grid.height, bytes);
                for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
                write_json(out, doc);
            } else {
                out << "wrote " << ju_output << '\n';
            }
            return 0;
        }

        if (atlas_cmd->parsed()) {
            if (at_format != "png") throw UsageError("--format: atlas images are colour and are written as png only");
            atlas::TileRequest request;
            request.plane = atlas::Plane::Parameter;
            request.n = at_n;
            request.center = complex_flag("--center", at_view.center);
            request.scale = at_view.scale;
            request.size = at_view.size;
            request.max_steps = at_steps;
            request.coloring = at_coloring == "classification" ? atlas::Coloring::Classification : atlas::Coloring::EscapeTime;
            const atlas::RenderedTile tile = atlas::render_tile(request, workers);
            write_bytes(at_output, tile.png);
            if (json) {
                Json doc = image_summary(at_output, at_format, request.size, request.size, tile.png);
                doc["input_digest"] = atlas::request_digest(request);
                doc["histogram"] = Json::object();
                for (const auto& [label, count] : tile.histogram) doc["histogram"][label] = count;
                write_json(out, doc);
            } else {
                out << "wrote " << at_output << '\n';
                for (const auto& [label, count] : tile.histogram) out << label << ' ' << count << '\n';
            }
            return 0;
        }

        if (survey->parsed()) {
            const auto region = number_list("--region", sv_region);
            if (region.size() != 4) throw UsageError("--region: expected re_min,re_max,im_min,im_max");
            atlas::SurveyRequest request;
            request.region = {region[0], region[1], region[2], region[3]};
            const auto dims = split(sv_grid, 'x');
            if (dims.empty() || dims.size() > 2) throw UsageError("--grid: expected N or WxH");
            request.width = static_cast<int>(number_flag("--grid", dims[0]));
            request.height = dims.size() == 2 ? static_cast<int>(number_flag("--grid", dims[1])) : request.width;
            request.n = sv_n;
            request.max_steps = sv_steps;
            try {
                atlas::validate(request);
            } catch (const InvalidParameter& e) {
                throw UsageError(e.what());
            }
            const atlas::SurveyResult result = sv_store.empty()
                                                   ? atlas::run_survey(request, workers)
                                                   : atlas::SurveyStore(sv_store).run_or_resume(request, workers);
            if (!sv_output.empty()) {
                const std::string text = dump_json(result.to_json()) + "\n";
                write_bytes(sv_output, Bytes(text.begin(), text.end()));
            }
            if (json) {
                write_json(out, result.to_json());
            } else {
                out << "digest " << result.digest << '\n';
                for (const auto& [label, count] : result.histogram) out << label << ' ' << count << '\n';
            }
            return 0;
        }

        if (carpet->parsed()) {
            if (!ca_output.empty()) check_format(ca_format);
            const CarpetLevel level = ca_standard ? standard_counts(ca_depth) : carpet_counts(ca_k, ca_depth);
            std::vector<CoverBound> bounds;
            for (double s : ca_cover) {
                if (ca_depth < 1) throw UsageError("--cover needs --depth >= 1");
                if (ca_standard) throw UsageError("--cover applies to F_m(k), not the middle-ninths carpet");
                bounds.push_back(cover_bound(ca_k, ca_depth, s));
            }
            Bytes image;
            if (!ca_output.empty()) {
                const Raster r = ca_standard ? standard_carpet(ca_depth, ca_resolution)
                                             : rasterize_carpet(ca_k, ca_depth, ca_resolution);
                image = encode_raster(r, ca_format);
                write_bytes(ca_output, image);
            }
            if (json) {
                Json doc = Json::parse(carpet_level_json(level, ca_squares));
                if (!bounds.empty()) {
                    doc["cover_bounds"] = Json::array();
                    for (const auto& b : bounds) doc["cover_bounds"].push_back({{"s", b.s}, {"log_value", b.log_value}});
                }
                if (!ca_output.empty()) doc["image"] = image_summary(ca_output, ca_format, ca_resolution, ca_resolution, image);
                write_json(out, doc);
            } else {
                const bool counts = ca_counts || (bounds.empty() && ca_output.empty() && !ca_squares);
                if (counts) {
                    out << fmt::format("b_{}={}\n", ca_depth, level.count.str());
                    out << fmt::format("l_{}=1/{}\n", ca_depth, level.side_denominator().str());
                }
                for (const auto& b : bounds) out << fmt::format("log_cover(s={})={}\n", b.s, b.log_value);
                if (ca_squares) {
                    for (const auto& sq : ca_standard ? standard_squares(ca_depth) : carpet_squares(ca_k, ca_depth)) {
                        out << fmt::format("{}/{} {}/{} side 1/{}\n", sq.x_num, sq.den, sq.y_num, sq.den, sq.den);
                    }
                }
                if (!ca_output.empty()) out << "wrote " << ca_output << '\n';
            }
            return 0;
        }

        if (boxdim->parsed()) {
            bd_source.validate();
            auto [raster, digest] = bd_source.load();
            int padded = 1;
            int log2p = 0;
            while (padded < std::max(raster.width(), raster.height())) {
                padded *= 2;
                ++log2p;
            }
            const int levels = bd_levels > 0 ? bd_levels : log2p;
            if (levels < 2 || levels > log2p) {
                throw UsageError(fmt::format("--levels: must lie in [2, {}] for a {}x{} raster", log2p, raster.width(),
                                             raster.height()));
            }
            std::optional<IndexRange> window;
            if (!bd_window.empty()) window = IndexRange{bd_window[0], bd_window[1]};
            const BoxCountSeries series = box_counts(raster, levels);
            const DimensionFit fit = fit_dimension(series, window);
            if (json) {
                Json params = bd_source.parameters();
                params["levels"] = levels;
                Json payload = {{"scales", series.scales}, {"counts", series.counts}, {"box_pixels", series.box_pixels},
                                {"padded_side", series.padded_side}};
                Json doc = make_report(digest, params, "series", payload);
                doc["fit"] = {{"slope", fit.slope},
                              {"intercept", fit.intercept},
                              {"r2", fit.r2},
                              {"window", {fit.window.first, fit.window.last}},
                              {"clamped", fit.clamped}};
                if (fit.clamped) doc["warnings"].push_back("slope left [0, 2] and was clamped");
                write_json(out, doc);
            } else {
                for (std::size_t i = 0; i < series.scales.size(); ++i) {
                    out << fmt::format("{} {}\n", series.scales[i], series.counts[i]);
                }
                out << fmt::format("dimension {:.6f} (r2 {:.6f}, window {}..{}{})\n", fit.slope, fit.r2, fit.window.first,
                                   fit.window.last, fit.clamped ? ", clamped" : "");
            }
            return 0;
        }

        if (area->parsed()) {
            const MapFamily family = ar_family.build();
            const PlaneGrid grid = ar_view.grid();
            std::vector<int> schedule;
            for (double v : number_list("--schedule", ar_schedule)) {
                if (v < 1 || v != std::floor(v)) throw UsageError("--schedule: entries must be positive integers");
                if (!schedule.empty() && v <= schedule.back()) throw UsageError("--schedule: must be strictly increasing");
                schedule.push_back(static_cast<int>(v));
            }
            const auto samples = estimate_area(
                [&](int steps) { return non_escaping_raster(escape_time_field(family, grid, steps, workers)); }, schedule);
            if (json) {
                Json params = ar_family.parameters();
                params["center"] = ar_view.center;
                params["scale"] = ar_view.scale;
                params["size"] = ar_view.size;
                params["schedule"] = schedule;
                Json fractions = Json::array();
                for (const auto& s : samples) fractions.push_back({{"n_max", s.max_steps}, {"fraction", s.fraction}});
                write_json(out, make_report(digest_of(params), params, "fractions", fractions));
            } else {
                for (const auto& s : samples) out << fmt::format("{} {}\n", s.max_steps, s.fraction);
            }
            return 0;
        }

        if (whyburn->parsed()) {
            wb_source.validate();
            const auto eps = number_list("--eps", wb_eps);
            for (double e : eps) {
                if (!(e > 0)) throw UsageError("--eps: thresholds must be positive");
            }
            auto [raster, digest] = wb_source.load();
            raster.set_sphere(wb_sphere);
            const ComponentProfile profile = complement_components(raster);
            const CarpetConsistency verdict = carpet_consistency(profile, raster, eps);
            std::optional<BoundaryReport> gaps;
            if (profile.components.size() >= 2) gaps = boundary_disjointness(profile, raster);
            if (json) {
                Json params = wb_source.parameters();
                params["eps"] = eps;
                params["sphere"] = wb_sphere;
                Json comps = Json::array();
                for (const auto& c : profile.components) {
                    comps.push_back({{"id", c.id},
                                     {"pixels", c.pixel_count},
                                     {"diameter", c.diameter},
                                     {"unbounded", c.unbounded},
                                     {"diameter_exact", c.diameter_exact},
                                     {"boundary_pixels", c.boundary.size()},
                                     {"bbox", {c.bbox_min.x, c.bbox_min.y, c.bbox_max.x, c.bbox_max.y}}});
                }
                Json doc = make_report(digest, params, "components", comps);
                Json counts = Json::array();
                for (const auto& [e, n] : verdict.counts) counts.push_back({{"eps", e}, {"count", n}});
                doc["epsilon_counts"] = counts;
                if (gaps) {
                    Json touching = Json::array();
                    for (const auto& [a, b] : gaps->touching_pairs) touching.push_back({a, b});
                    doc["boundary"] = {{"min_gap", gaps->min_gap},
                                       {"closest_pair", {gaps->closest_pair.first, gaps->closest_pair.second}},
                                       {"touch_threshold", gaps->touch_threshold},
                                       {"touching_pairs", touching}};
                } else {
                    doc["warnings"].push_back("fewer than two complement components; no boundary gaps to measure");
                }
                doc["verdict"] = verdict.verdict;
                write_json(out, doc);
            } else {
                out << "components " << profile.components.size() << '\n';
                for (const auto& [e, n] : verdict.counts) out << fmt::format("eps {} count {}\n", e, n);
                if (gaps) {
                    out << fmt::format("min_gap {} touching_pairs {}\n", gaps->min_gap, gaps->touching_pairs.size());
                }
                out << verdict.verdict << '\n';
            }
            return 0;
        }

        if (serve->parsed()) {
            atlas::ServiceConfig config;
            if (!sv_config.empty()) apply_config_file(config, sv_config);
            atlas::apply_environment(config);
            if (sv_bind) config.bind_address = *sv_bind;
            if (sv_port) config.port = *sv_port;
            if (sv_cache) config.cache_dir = *sv_cache;
            if (threads > 0) config.threads = threads;
            atlas::AtlasService service(config);
            err << fmt::format("carpetlab: serving on http://{}:{}\n", config.bind_address, config.port);
            if (!service.listen()) {
                err << fmt::format("carpetlab: cannot listen on {}:{}\n", config.bind_address, config.port);
                return 1;
            }
            return 0;
        }
    } catch (const UsageError& e) {
        err << "carpetlab: " << e.what() << '\n';
        return 2;
    } catch (const InvalidParameter& e) {
        err << "carpetlab: " << e.what() << '\n';
        return 2;
    } catch (const atlas::RequestError& e) {
        err << "carpetlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "carpetlab: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace carpetlab
