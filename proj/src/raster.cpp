#include "carpetlab/raster.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"

namespace carpetlab {

Raster::Raster(int width, int height, Viewport viewport, bool sphere)
    : width_(width), height_(height), viewport_(viewport), sphere_(sphere) {
    if (width < 1 || height < 1) throw InvalidParameter(fmt::format("raster dimensions must be >= 1, got {}x{}", width, height));
    if (viewport.degenerate()) throw InvalidParameter("raster viewport is degenerate");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Raster::occupied_count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Raster non_escaping_raster(const ScalarField& field) {
    Raster out(field.width, field.height, field.viewport);
    auto& bits = out.bits();
    for (std::size_t i = 0; i < field.values.size(); ++i) bits[i] = field.values[i] == ScalarField::kNotEscaped ? 1 : 0;
    return out;
}

}  // namespace carpetlab
