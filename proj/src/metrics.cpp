#include "carpetlab/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"

namespace carpetlab {

BoxCountSeries box_counts(const Raster& raster, int levels) {
    const int w = raster.width();
    const int h = raster.height();
    const auto side = std::bit_ceil(static_cast<unsigned>(std::max(w, h)));
    const int max_levels = std::countr_zero(side);
    if (levels < 2 || levels > max_levels) {
        throw InvalidParameter(fmt::format("levels must lie in [2, {}] for a {}x{} raster, got {}", max_levels, w, h, levels));
    }
    if (raster.occupied_count() == 0) throw DataError("empty set has no dimension");

    // grid[i] holds the occupancy of boxes of side 2^t pixels
    std::size_t n = side;
    std::vector<std::uint8_t> grid(n * n, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)] = raster.at(x, y) ? 1 : 0;
    }

    BoxCountSeries series;
    series.padded_side = static_cast<int>(side);
    const int finest_box_log = max_levels - levels;
    std::vector<std::uint64_t> counts_by_log(static_cast<std::size_t>(max_levels) + 1, 0);
    for (int t = 0;; ++t) {
        if (t >= finest_box_log) {
            counts_by_log[static_cast<std::size_t>(t)] =
                static_cast<std::uint64_t>(std::count(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(n * n), std::uint8_t{1}));
        }
        if (t == max_levels - 1) break;
        const std::size_t half = n / 2;
        for (std::size_t y = 0; y < half; ++y) {
            for (std::size_t x = 0; x < half; ++x) {
                const std::size_t a = (2 * y) * n + 2 * x;
                const std::size_t b = a + n;
                grid[y * half + x] = grid[a] | grid[a + 1] | grid[b] | grid[b + 1];
            }
        }
        n = half;
    }
    const double pixel = raster.pixel_width();
    for (int j = 1; j <= levels; ++j) {
        const int box_log = max_levels - j;
        const int box = 1 << box_log;
        series.box_pixels.push_back(box);
        series.scales.push_back(box * pixel);
        series.counts.push_back(counts_by_log[static_cast<std::size_t>(box_log)]);
    }
    return series;
}

DimensionFit fit_dimension(const BoxCountSeries& series, std::optional<IndexRange> window) {
    const int n = static_cast<int>(series.scales.size());
    if (series.counts.size() != series.scales.size()) throw InvalidParameter("series scales and counts differ in length");
    const IndexRange win = window.value_or(IndexRange{1, n - 3});
    if (win.first < 0 || win.last >= n || win.last - win.first + 1 < 3) {
        throw InvalidParameter(fmt::format("degenerate fit window [{}, {}] for {} scales", win.first, win.last, n));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double m = win.last - win.first + 1;
    for (int i = win.first; i <= win.last; ++i) {
        if (series.counts[static_cast<std::size_t>(i)] == 0 || !(series.scales[static_cast<std::size_t>(i)] > 0)) {
            throw InvalidParameter("fit window contains an empty or non-positive scale");
        }
        const double x = -std::log(series.scales[static_cast<std::size_t>(i)]);
        const double y = std::log(static_cast<double>(series.counts[static_cast<std::size_t>(i)]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double vxx = sxx - sx * sx / m;
    const double vxy = sxy - sx * sy / m;
    const double vyy = syy - sy * sy / m;
    if (!(vxx > 0)) throw InvalidParameter("fit window has no spread in scale");
    DimensionFit fit;
    fit.window = win;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.r2 = vyy > 0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    if (fit.slope < 0.0 || fit.slope > 2.0) {
        fit.clamped = true;
        fit.slope = std::clamp(fit.slope, 0.0, 2.0);
    }
    return fit;
}

std::vector<AreaSample> estimate_area(const RasterBuilder& builder, std::span<const int> schedule) {
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i] <= schedule[i - 1]) throw InvalidParameter("area schedule must be strictly increasing");
    }
    std::vector<AreaSample> out;
    out.reserve(schedule.size());
    for (int steps : schedule) {
        if (steps < 1) throw InvalidParameter("area schedule entries must be >= 1");
        out.push_back({steps, builder(steps).occupied_fraction()});
    }
    return out;
}

std::size_t ComponentProfile::count_larger_than(double eps) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(components.begin(), components.end(), [eps](const Component& c) { return c.diameter > eps; }));
}

namespace {

struct Pt {
    double x;
    double y;
};

double cross(Pt o, Pt a, Pt b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }
double dist2(Pt a, Pt b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end(), [](Pt a, Pt b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(), [](Pt a, Pt b) { return a.x == b.x && a.y == b.y; }), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Pt> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Pt& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double caliper_diameter(const std::vector<Pt>& hull) {
    const std::size_t n = hull.size();
    if (n == 1) return 0.0;
    if (n == 2) return std::sqrt(dist2(hull[0], hull[1]));
    double best = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ni = (i + 1) % n;
        while (std::fabs(cross(hull[i], hull[ni], hull[(j + 1) % n])) > std::fabs(cross(hull[i], hull[ni], hull[j]))) {
            j = (j + 1) % n;
        }
        best = std::max({best, dist2(hull[i], hull[j]), dist2(hull[ni], hull[j])});
    }
    return std::sqrt(best);
}

double brute_plane_diameter(const std::vector<Pt>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, dist2(pts[i], pts[j]));
    }
    return std::sqrt(best);
}

double brute_chordal_diameter(const std::vector<Pt>& pts, bool with_infinity) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const SpherePoint a{ComplexPoint{pts[i].x, pts[i].y}};
        if (with_infinity) best = std::max(best, chordal_distance(a, SpherePoint::infinity()));
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            best = std::max(best, chordal_distance(a, SpherePoint{ComplexPoint{pts[j].x, pts[j].y}}));
        }
    }
    return best;
}

constexpr std::size_t kExactPixelLimit = 10'000;
constexpr std::size_t kExactChordalEdgeLimit = 20'000;

}  // namespace

ComponentProfile complement_components(const Raster& raster) {
    const int w = raster.width();
    const int h = raster.height();
    const int pw = w + 2;
    const int ph = h + 2;
    auto occupied = [&](int px, int py) {
        const int x = px - 1, y = py - 1;
        return x >= 0 && y >= 0 && x < w && y < h && raster.at(x, y);
    };
    auto inside = [&](int px, int py) { return px >= 1 && py >= 1 && px <= w && py <= h; };
    auto center = [&](int px, int py) {
        const ComplexPoint c = raster.pixel_center(px - 1, py - 1);
        return Pt{c.re, c.im};
    };

    std::vector<std::int32_t> label(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph), -1);
    auto at = [&](int px, int py) -> std::int32_t& {
        return label[static_cast<std::size_t>(py) * static_cast<std::size_t>(pw) + static_cast<std::size_t>(px)];
    };

    ComponentProfile profile;
    profile.width = w;
    profile.height = h;
    profile.sphere = raster.sphere();

    std::vector<PixelCoord> members;
    std::vector<PixelCoord> queue;
    auto flood = [&](int sx, int sy, int id) {
        members.clear();
        queue.clear();
        at(sx, sy) = id;
        queue.push_back({sx, sy});
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const PixelCoord p = queue[head];
            members.push_back(p);
            const int nx[4] = {p.x - 1, p.x + 1, p.x, p.x};
            const int ny[4] = {p.y, p.y, p.y - 1, p.y + 1};
            for (int d = 0; d < 4; ++d) {
                if (nx[d] < 0 || ny[d] < 0 || nx[d] >= pw || ny[d] >= ph) continue;
                if (at(nx[d], ny[d]) != -1 || occupied(nx[d], ny[d])) continue;
                at(nx[d], ny[d]) = id;
                queue.push_back({nx[d], ny[d]});
            }
        }

        Component comp;
        comp.id = id;
        comp.unbounded = id == 0;
        comp.bbox_min = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
        comp.bbox_max = {std::numeric_limits<int>::min(), std::numeric_limits<int>::min()};
        std::vector<Pt> edge;
        std::vector<Pt> all;
        for (const PixelCoord p : members) {
            const bool in = inside(p.x, p.y);
            const PixelCoord rp{p.x - 1, p.y - 1};
            if (in) {
                ++comp.pixel_count;
                comp.bbox_min = {std::min(comp.bbox_min.x, rp.x), std::min(comp.bbox_min.y, rp.y)};
                comp.bbox_max = {std::max(comp.bbox_max.x, rp.x), std::max(comp.bbox_max.y, rp.y)};
            }
            bool touches_set = false;
            bool is_edge = false;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int qx = p.x + dx, qy = p.y + dy;
                    if (occupied(qx, qy)) touches_set = true;
                    const bool four = dx == 0 || dy == 0;
                    if (four && (qx < 0 || qy < 0 || qx >= pw || qy >= ph || at(qx, qy) != id)) is_edge = true;
                }
            }
            if (touches_set) comp.boundary.push_back(rp);
            if (in || comp.unbounded) {
                const Pt c = center(p.x, p.y);
                if (is_edge) edge.push_back(c);
                if (members.size() <= kExactPixelLimit) all.push_back(c);
            }
        }
        if (comp.pixel_count == 0) comp.bbox_min = comp.bbox_max = {0, 0};

        if (!profile.sphere) {
            if (comp.unbounded) {
                comp.diameter = std::numeric_limits<double>::infinity();
            } else if (comp.pixel_count <= kExactPixelLimit) {
                comp.diameter = brute_plane_diameter(edge);
            } else {
                comp.diameter = caliper_diameter(convex_hull(edge));
            }
        } else {
            // the chordal distance to a fixed point has no interior maximum
            // away from its antipode, so edge pixels carry the diameter
            if (comp.pixel_count <= kExactPixelLimit && !comp.unbounded) {
                comp.diameter = brute_chordal_diameter(all, false);
            } else if (edge.size() <= kExactChordalEdgeLimit) {
                comp.diameter = brute_chordal_diameter(edge, comp.unbounded);
                comp.diameter_exact = !comp.unbounded;
            } else {
                comp.diameter = brute_chordal_diameter(convex_hull(edge), comp.unbounded);
                comp.diameter_exact = false;
            }
        }
        profile.components.push_back(std::move(comp));
    };

    flood(0, 0, 0);
    int next = 1;
    for (int py = 1; py <= h; ++py) {
        for (int px = 1; px <= w; ++px) {
            if (at(px, py) == -1 && !occupied(px, py)) flood(px, py, next++);
        }
    }
    return profile;
}

std::map<double, std::size_t> whyburn_profile(const ComponentProfile& profile, std::span<const double> epsilons) {
    std::map<double, std::size_t> out;
    for (double eps : epsilons) {
        if (!(eps > 0)) throw InvalidParameter("Whyburn epsilons must be positive");
        out[eps] = profile.count_larger_than(eps);
    }
    return out;
}

BoundaryReport boundary_disjointness(const ComponentProfile& profile, const Raster& raster) {
    if (profile.components.size() < 2) throw InvalidParameter("boundary disjointness needs at least two components");
    const int w = raster.width();
    const int h = raster.height();
    const int pw = w + 2;
    const int ph = h + 2;
    std::vector<std::int32_t> owner(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph), -1);
    auto cell = [&](int x, int y) -> std::int32_t& {
        return owner[static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(pw) + static_cast<std::size_t>(x + 1)];
    };
    for (const Component& c : profile.components) {
        for (const PixelCoord p : c.boundary) cell(p.x, p.y) = c.id;
    }

    const double dx = raster.pixel_width();
    const double dy = raster.pixel_height();
    BoundaryReport report;
    report.touch_threshold = 2.0 * std::hypot(dx, dy);
    report.min_gap = std::numeric_limits<double>::infinity();
    const int touch_radius = static_cast<int>(std::ceil(report.touch_threshold / std::min(dx, dy)));
    const int max_radius = std::max(pw, ph);

    const auto with_boundary = std::count_if(profile.components.begin(), profile.components.end(),
                                             [](const Component& c) { return !c.boundary.empty(); });
    if (with_boundary < 2) return report;

    std::vector<std::pair<int, int>> touching;
    for (const Component& c : profile.components) {
        for (const PixelCoord p : c.boundary) {
            for (int r = 1; r <= max_radius; ++r) {
                // every pixel on ring r is at least r * min(dx, dy) away
                if (r > touch_radius && r * std::min(dx, dy) > report.min_gap) break;
                for (int oy = -r; oy <= r; ++oy) {
                    const bool full_row = oy == -r || oy == r;
                    for (int ox = -r; ox <= r; ox += full_row ? 1 : 2 * r) {
                        const int qx = p.x + ox, qy = p.y + oy;
                        if (qx < -1 || qy < -1 || qx > w || qy > h) continue;
                        const std::int32_t other = cell(qx, qy);
                        if (other == -1 || other == c.id) continue;
                        const double d = std::hypot(ox * dx, oy * dy);
                        if (d < report.min_gap) {
                            report.min_gap = d;
                            report.closest_pair = {std::min(c.id, other), std::max(c.id, other)};
                        }
                        if (d <= report.touch_threshold) touching.emplace_back(std::min(c.id, other), std::max(c.id, other));
                    }
                }
            }
        }
    }
    std::sort(touching.begin(), touching.end());
    touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
    report.touching_pairs = std::move(touching);
    return report;
}

CarpetConsistency carpet_consistency(const ComponentProfile& profile, const Raster& raster,
                                     std::span<const double> epsilons) {
    CarpetConsistency out;
    out.counts = whyburn_profile(profile, epsilons);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (const auto& [eps, count] : out.counts) {
        // map iterates eps ascending, so counts must not grow
        if (count > prev) out.decays = false;
        prev = count;
    }
    if (profile.components.size() >= 2) out.disjoint = boundary_disjointness(profile, raster).touching_pairs.empty();
    out.consistent = out.decays && out.disjoint;
    out.verdict = out.consistent ? "carpet-consistent at this resolution" : "not carpet-consistent at this resolution";
    return out;
}

}  // namespace carpetlab
