#pragma once

// Pixel-grid evaluation of escape times, Julia-set occupancy and parameter
// classifications. Output is independent of the thread count.

#include <cstdint>
#include <vector>

#include "carpetlab/dynamics.hpp"
#include "carpetlab/raster.hpp"

namespace carpetlab {

/// A w x h grid of sample points centred on `center`. Row 0 is the top edge.
/// Pixel centres of the grid at conj(center) are the exact conjugates of the
/// vertically mirrored grid.
struct PlaneGrid {
    ComplexPoint center;
    double span_x = 4.0;
    double span_y = 4.0;
    int width = 256;
    int height = 256;

    static PlaneGrid square(ComplexPoint center, double span, int size) { return {center, span, span, size, size}; }

    ComplexPoint at(int x, int y) const noexcept {
        return {center.re + ((x + 0.5) / width - 0.5) * span_x, center.im + (0.5 - (y + 0.5) / height) * span_y};
    }
    Viewport viewport() const noexcept { return Viewport::centered(center, span_x, span_y); }
};

/// Escape index of every pixel centre under the family (0 when the centre
/// already lies outside the escape radius).
ScalarField escape_time_field(const MapFamily& family, const PlaneGrid& grid, int max_steps, int threads);

/// Julia-set occupancy: a pixel is set when its orbit stays bounded or its
/// distance estimate |z| ln|z| / |dz/dz0| is below half a pixel.
Raster julia_raster(const MapFamily& family, const PlaneGrid& grid, int max_steps, int threads);

/// Parameter-plane classification codes (see tag_code) for z^n + lambda / z^n
/// at every pixel centre lambda. lambda = 0 is reported as Undetermined.
std::vector<int> parameter_tags(int n, const PlaneGrid& grid, const ClassifyOptions& opts, int threads);

}  // namespace carpetlab
