#pragma once

// Measurements on rasters: box counting, log-log dimension fits, the
// non-escaping area probe, and complement-component diagnostics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "carpetlab/raster.hpp"

namespace carpetlab {

struct BoxCountSeries {
    std::vector<double> scales;         ///< box sizes in plane units, strictly decreasing
    std::vector<std::uint64_t> counts;  ///< occupied boxes per scale
    std::vector<int> box_pixels;        ///< box side in pixels per scale
    int padded_side = 0;                ///< power-of-two grid the raster was padded to
};

/// Occupied-box counts for boxes of side P/2, P/4, ..., P/2^levels pixels,
/// where P is the raster side padded up to a power of two. The box grid is
/// anchored at the top-left viewport corner. Throws DataError on an empty
/// raster and InvalidParameter when levels is outside [2, log2 P].
BoxCountSeries box_counts(const Raster& raster, int levels);

struct IndexRange {
    int first = 0;
    int last = 0;  ///< inclusive
};

struct DimensionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    IndexRange window;
    bool clamped = false;  ///< slope left [0, 2] and was clamped
};

/// Least squares of ln N against ln(1/eps). The default window drops the
/// coarsest scale and the two finest ones.
DimensionFit fit_dimension(const BoxCountSeries& series, std::optional<IndexRange> window = std::nullopt);

struct AreaSample {
    int max_steps = 0;
    double fraction = 0.0;  ///< occupied (non-escaped) pixel fraction, an upper bound
};

using RasterBuilder = std::function<Raster(int max_steps)>;

/// Calls the builder once per schedule entry. The schedule must be strictly increasing.
std::vector<AreaSample> estimate_area(const RasterBuilder& builder, std::span<const int> schedule);

struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(PixelCoord, PixelCoord) = default;
};

struct Component {
    int id = 0;
    std::size_t pixel_count = 0;  ///< pixels inside the raster
    double diameter = 0.0;        ///< +inf for the unbounded plane component
    bool unbounded = false;       ///< the component reaching past the raster edge
    bool diameter_exact = true;
    std::vector<PixelCoord> boundary;  ///< pixels 8-adjacent to the occupied set
    PixelCoord bbox_min;
    PixelCoord bbox_max;
};

/// Complement components of a raster. The raster is framed by a one-pixel ring
/// of empty pixels standing for the rest of the plane, so component 0 is
/// always the outer (unbounded) region, even when it has no pixels inside.
struct ComponentProfile {
    int width = 0;
    int height = 0;
    bool sphere = false;
    std::vector<Component> components;
    std::map<double, std::size_t> epsilon_counts;

    std::size_t count_larger_than(double eps) const noexcept;
};

/// Unoccupied pixels under 4-connectivity (the occupied set is read as
/// 8-connected). Diameters are Euclidean, or chordal when the raster's sphere
/// flag is set; exact up to 10^4 pixels and from the convex hull above.
ComponentProfile complement_components(const Raster& raster);

/// Number of components with diameter > eps for each eps.
std::map<double, std::size_t> whyburn_profile(const ComponentProfile& profile, std::span<const double> epsilons);

struct BoundaryReport {
    double min_gap = 0.0;  ///< plane units between the closest pair of boundaries
    std::pair<int, int> closest_pair{-1, -1};
    double touch_threshold = 0.0;  ///< two pixel diagonals
    std::vector<std::pair<int, int>> touching_pairs;
};

/// Closest pixel-centre distances between the boundary sets of distinct
/// components. Throws InvalidParameter with fewer than two components.
BoundaryReport boundary_disjointness(const ComponentProfile& profile, const Raster& raster);

struct CarpetConsistency {
    std::map<double, std::size_t> counts;
    bool decays = true;    ///< counts nonincreasing in eps
    bool disjoint = true;  ///< no touching boundary pairs
    bool consistent = false;
    std::string verdict;
};

/// Resolution-relative Whyburn check: counts finite and decaying in eps and
/// no touching complementary boundaries.
CarpetConsistency carpet_consistency(const ComponentProfile& profile, const Raster& raster,
                                     std::span<const double> epsilons);

}  // namespace carpetlab
