#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "carpetlab/complex_point.hpp"

namespace carpetlab {

/// Axis-aligned rectangle of the plane. Row 0 of a raster is the top (y_max) edge.
struct Viewport {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    bool degenerate() const noexcept { return !(x_max > x_min) || !(y_max > y_min); }

    static Viewport centered(ComplexPoint center, double span_x, double span_y) noexcept {
        return {center.re - span_x / 2, center.re + span_x / 2, center.im - span_y / 2,
                center.im + span_y / 2};
    }
};

/// Pixel grid over a viewport with one occupancy bit per pixel.
class Raster {
public:
    Raster() = default;
    /// Throws InvalidParameter for non-positive dimensions or a degenerate viewport.
    Raster(int width, int height, Viewport viewport = {}, bool sphere = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const Viewport& viewport() const noexcept { return viewport_; }
    bool sphere() const noexcept { return sphere_; }
    void set_sphere(bool s) noexcept { sphere_ = s; }

    bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v = true) noexcept { bits_[index(x, y)] = v ? 1 : 0; }

    std::size_t occupied_count() const noexcept;
    double occupied_fraction() const noexcept {
        return static_cast<double>(occupied_count()) / (static_cast<double>(width_) * height_);
    }

    double pixel_width() const noexcept { return viewport_.width() / width_; }
    double pixel_height() const noexcept { return viewport_.height() / height_; }
    ComplexPoint pixel_center(double x, double y) const noexcept {
        return {viewport_.x_min + (x + 0.5) * pixel_width(), viewport_.y_max - (y + 0.5) * pixel_height()};
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    std::vector<std::uint8_t>& bits() noexcept { return bits_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    Viewport viewport_;
    bool sphere_ = false;
    std::vector<std::uint8_t> bits_;
};

/// Escape index per pixel; kNotEscaped where the orbit stayed bounded.
struct ScalarField {
    static constexpr std::int32_t kNotEscaped = -1;

    int width = 0;
    int height = 0;
    Viewport viewport;
    int max_steps = 0;
    std::vector<std::int32_t> values;

    std::int32_t at(int x, int y) const noexcept {
        return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
};

/// Occupied where the orbit did not escape within the field's step budget.
Raster non_escaping_raster(const ScalarField& field);

}  // namespace carpetlab
