#include "carpetlab/render.hpp"

#include <cmath>
#include <numbers>

#include "carpetlab/errors.hpp"
#include "carpetlab/parallel.hpp"

namespace carpetlab {

namespace {

void check_grid(const PlaneGrid& grid) {
    if (grid.width < 1 || grid.height < 1) throw InvalidParameter("grid dimensions must be >= 1");
    if (!(grid.span_x > 0) || !(grid.span_y > 0)) throw InvalidParameter("grid span must be positive");
}

std::size_t cell(const PlaneGrid& g, int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(g.width) + static_cast<std::size_t>(x);
}

// Image and derivative of one step; false when not representable.
bool step_with_derivative(const MapFamily& family, ComplexPoint& z, ComplexPoint& dz) {
    ComplexPoint next, deriv;
    if (const auto* m = std::get_if<McMullen>(&family.variant())) {
        if (z.is_zero()) return false;
        const ComplexPoint w = ipow(z, m->n);
        if (w.is_zero()) return false;
        const ComplexPoint q = divide(m->lambda, w);
        next = w + q;
        deriv = static_cast<double>(m->n) * divide(w - q, z);
    } else if (const auto* q = std::get_if<Quadratic>(&family.variant())) {
        next = z * z + q->c;
        deriv = 2.0 * z;
    } else {
        const double alpha = std::get<SiegelQuadratic>(family.variant()).alpha;
        const ComplexPoint rot = from_polar(1.0, 2.0 * std::numbers::pi * alpha);
        next = rot * z + z * z;
        deriv = rot + 2.0 * z;
    }
    const ComplexPoint ndz = deriv * dz;
    if (!std::isfinite(next.norm()) || !std::isfinite(ndz.norm())) return false;
    z = next;
    dz = ndz;
    return true;
}

}  // namespace

ScalarField escape_time_field(const MapFamily& family, const PlaneGrid& grid, int max_steps, int threads) {
    check_grid(grid);
    if (max_steps < 1) throw InvalidParameter("max_steps must be >= 1");
    const double escape_r = family.escape_radius();
    // rho only feeds the central-visit bookkeeping, which escape times ignore
    const double central_r = escape_r / 4.0;
    ScalarField field;
    field.width = grid.width;
    field.height = grid.height;
    field.viewport = grid.viewport();
    field.max_steps = max_steps;
    field.values.assign(static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height), ScalarField::kNotEscaped);
    parallel_rows(grid.height, threads, [&](int y) {
        for (int x = 0; x < grid.width; ++x) {
            const ComplexPoint z0 = grid.at(x, y);
            std::int32_t value = 0;
            if (z0.abs() <= escape_r) {
                const OrbitRecord rec = iterate_orbit(family, z0, escape_r, central_r, max_steps);
                value = rec.escape_index ? *rec.escape_index : ScalarField::kNotEscaped;
            }
            field.values[cell(grid, x, y)] = value;
        }
    });
    return field;
}

Raster julia_raster(const MapFamily& family, const PlaneGrid& grid, int max_steps, int threads) {
    check_grid(grid);
    if (max_steps < 1) throw InvalidParameter("max_steps must be >= 1");
    const double escape_r = family.escape_radius();
    const double bailout2 = 1e16;
    const double half_pixel = 0.5 * std::min(grid.span_x / grid.width, grid.span_y / grid.height);
    Raster raster(grid.width, grid.height, grid.viewport());
    parallel_rows(grid.height, threads, [&](int y) {
        for (int x = 0; x < grid.width; ++x) {
            ComplexPoint z = grid.at(x, y);
            ComplexPoint dz{1.0, 0.0};
            bool escaped = false;
            int j = 0;
            for (; j < max_steps; ++j) {
                if (z.norm() > escape_r * escape_r) {
                    escaped = true;
                    break;
                }
                if (!step_with_derivative(family, z, dz)) {
                    escaped = true;
                    break;
                }
            }
            bool occupied = !escaped;
            if (escaped) {
                // push further out so the Green-function asymptotics apply
                for (int extra = 0; extra < 64 && z.norm() < bailout2; ++extra) {
                    ComplexPoint zn = z, dn = dz;
                    if (!step_with_derivative(family, zn, dn)) break;
                    z = zn;
                    dz = dn;
                }
                const double r = z.abs();
                const double d = dz.abs();
                if (std::isfinite(d) && d > 0 && r > 1.0) occupied = r * std::log(r) / d < half_pixel;
            }
            raster.set(x, y, occupied);
        }
    });
    return raster;
}

std::vector<int> parameter_tags(int n, const PlaneGrid& grid, const ClassifyOptions& opts, int threads) {
    check_grid(grid);
    if (n < 3) throw InvalidParameter("McMullen degree n must be >= 3");
    std::vector<int> codes(static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height), -2);
    parallel_rows(grid.height, threads, [&](int y) {
        for (int x = 0; x < grid.width; ++x) {
            const ComplexPoint lambda = grid.at(x, y);
            if (lambda.is_zero()) continue;
            const Classification c = classify_parameter(n, lambda, opts);
            codes[cell(grid, x, y)] = tag_code(c.tag, c.k);
        }
    });
    return codes;
}

}  // namespace carpetlab
