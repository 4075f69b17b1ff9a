#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carpetlab/complex_point.hpp"
#include "carpetlab/image_io.hpp"
#include "carpetlab/render.hpp"

namespace carpetlab::atlas {

enum class Plane { Parameter, Dynamical };
enum class Coloring { Classification, EscapeTime };

struct TileRequest {
    Plane plane = Plane::Parameter;
    int n = 3;
    ComplexPoint lambda{1.0, 0.0};  ///< used by dynamical tiles only
    ComplexPoint center;
    double scale = 1.0;  ///< plane units per tile width
    int size = 256;      ///< 128, 256 or 512
    int max_steps = 100;
    Coloring coloring = Coloring::Classification;

    PlaneGrid grid() const { return PlaneGrid::square(center, scale, size); }
};

struct FieldError {
    std::string field;
    std::string message;
};

/// A malformed request, with one diagnostic per offending field.
class RequestError : public std::runtime_error {
public:
    explicit RequestError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

/// Builds a request from query parameters (plane, n, lambda, center, scale,
/// size, n_max, coloring). Throws RequestError listing every bad field.
TileRequest parse_tile_request(const std::map<std::string, std::string>& query, int default_steps);

/// Canonical serialization: fixed key order, floats at 17 significant digits.
std::string canonical_json(const TileRequest& request);
std::string request_digest(const TileRequest& request);

/// Pixel-iteration product charged against the tile budget.
std::uint64_t tile_work(const TileRequest& request);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(Rgb, Rgb) = default;
};

/// Cantor #404040, CantorCircles #1f77b4, NonEscaping #000000,
/// Undetermined #ffffff, Carpet(k) a ramp from #d62728 (k = 3) towards
/// #ff9896 (k >= 15).
Rgb tag_color(int code) noexcept;

/// Grayscale escape-time ramp: bounded orbits black, escape index j mapped
/// to max(32, 255 - 12 (j - 1)).
Rgb escape_color(std::int32_t escape_index) noexcept;

/// "Cantor", "CantorCircles", "Carpet(k)", "NonEscaping", "Undetermined".
std::string code_label(int code);

struct RenderedTile {
    Bytes png;
    std::map<std::string, std::uint64_t> histogram;  ///< per-label pixel counts (classification tiles)
};

/// Deterministic render of a validated request.
RenderedTile render_tile(const TileRequest& request, int threads);

}  // namespace carpetlab::atlas
