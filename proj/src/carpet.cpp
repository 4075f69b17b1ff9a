#include "carpetlab/carpet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "carpetlab/errors.hpp"

namespace carpetlab {

namespace {

using Wide = __int128;

constexpr int kMaxDepth = 62;

void require_k(int k) {
    if (k < 3) throw InvalidParameter(fmt::format("carpet parameter k must be >= 3, got {}", k));
}

void require_m(int m) {
    if (m < 0) throw InvalidParameter(fmt::format("carpet depth m must be >= 0, got {}", m));
}

int base_of(CarpetKind kind, int k) { return kind == CarpetKind::MiddleNinths ? 3 : k; }

// Grid factor applied at step i >= 1.
BigInt grid_factor(CarpetKind kind, int k, int i) {
    if (kind == CarpetKind::MiddleNinths) return BigInt(3);
    return boost::multiprecision::pow(BigInt(k), static_cast<unsigned>(i));
}

int side_exponent_of(CarpetKind kind, int m) {
    return kind == CarpetKind::MiddleNinths ? m : m * (m + 1) / 2;
}

CarpetLevel make_level(CarpetKind kind, int k, int m) {
    CarpetLevel level;
    level.kind = kind;
    level.k = k;
    level.m = m;
    level.count = 1;
    for (int i = 1; i <= m; ++i) level.count *= 4 * grid_factor(kind, k, i) - 4;
    level.side_exponent = side_exponent_of(kind, m);
    return level;
}

std::int64_t checked_den(CarpetKind kind, int k, int m) {
    const BigInt den = boost::multiprecision::pow(BigInt(base_of(kind, k)), static_cast<unsigned>(side_exponent_of(kind, m)));
    if (den > BigInt(std::numeric_limits<std::int64_t>::max() / 4)) {
        throw ResourceError(fmt::format("depth {} is too deep for 64-bit square coordinates", m), den.str());
    }
    return static_cast<std::int64_t>(den);
}

void visit_rec(CarpetKind kind, int k, int m, int i, std::int64_t x, std::int64_t y, std::int64_t den,
               const std::function<void(const SquareSpec&)>& visit) {
    if (i > m) {
        visit(SquareSpec{x, y, den, side_exponent_of(kind, m)});
        return;
    }
    const auto f = static_cast<std::int64_t>(grid_factor(kind, k, i));
    const std::int64_t child_den = den * f;
    for (std::int64_t a = 0; a < f; ++a) {
        const bool edge_col = a == 0 || a == f - 1;
        for (std::int64_t b = 0; b < f; ++b) {
            if (!edge_col && b != 0 && b != f - 1) {
                b = f - 2;  // skip the removed centre of this column
                continue;
            }
            visit_rec(kind, k, m, i + 1, x * f + a, y * f + b, child_den, visit);
        }
    }
}

std::vector<SquareSpec> materialize(CarpetKind kind, int k, int m, std::uint64_t cap) {
    const CarpetLevel level = make_level(kind, k, m);
    if (level.count > BigInt(cap)) {
        throw ResourceError(fmt::format("materializing depth {} exceeds the square cap {}", m, cap), level.count.str());
    }
    std::vector<SquareSpec> out;
    out.reserve(static_cast<std::size_t>(level.count));
    for_each_square(kind, k, m, [&](const SquareSpec& s) { out.push_back(s); });
    std::sort(out.begin(), out.end());
    return out;
}

// Bit i (1-based) of a mask is set when the coordinate lies in a ring cell at
// step i. A coordinate on a cell boundary belongs to both closed cells, so it
// may follow several paths; all are collected.
void axis_paths(CarpetKind kind, int k, int m, int i, Wide num, Wide den, std::uint64_t mask,
                std::vector<std::uint64_t>& out) {
    if (i > m) {
        out.push_back(mask);
        return;
    }
    Wide f = 3;
    if (kind == CarpetKind::DimensionOne) {
        f = 1;
        for (int j = 0; j < i; ++j) f *= k;
    }
    const Wide t = num * f;
    const Wide cell = t / den;
    const Wide rem = t % den;
    auto descend = [&](Wide c, Wide local) {
        const std::uint64_t bit = (c == 0 || c == f - 1) ? (std::uint64_t{1} << i) : 0;
        axis_paths(kind, k, m, i + 1, local, den, mask | bit, out);
    };
    if (rem != 0) {
        descend(cell, rem);
    } else if (cell == 0) {
        descend(0, 0);
    } else if (cell == f) {
        descend(f - 1, den);
    } else {
        descend(cell - 1, den);
        descend(cell, 0);
    }
}

Raster rasterize(CarpetKind kind, int k, int m, int resolution) {
    require_m(m);
    if (resolution < 1) throw InvalidParameter("resolution must be >= 1");
    if (m > kMaxDepth) throw ResourceError("carpet depth too large to rasterize", std::to_string(m));
    const double bits = std::log2(2.0 * resolution) + (kind == CarpetKind::MiddleNinths ? std::log2(3.0) : m * std::log2(k));
    if (bits > 120.0) {
        throw ResourceError(fmt::format("depth {} exceeds exact 128-bit point location", m), fmt::format("{:.0f} bits", bits));
    }

    const Wide den = 2 * static_cast<Wide>(resolution);
    std::uint64_t full = 0;
    for (int i = 1; i <= m; ++i) full |= std::uint64_t{1} << i;

    // Pixel centres are (2i + 1) / (2 res); by symmetry of the grid the same
    // path sets serve both axes (row j has centre 1 - (2j + 1) / (2 res)).
    std::vector<std::vector<std::uint64_t>> paths(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        axis_paths(kind, k, m, 1, 2 * static_cast<Wide>(i) + 1, den, 0, paths[static_cast<std::size_t>(i)]);
        auto& p = paths[static_cast<std::size_t>(i)];
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }

    Raster raster(resolution, resolution, Viewport{0.0, 1.0, 0.0, 1.0});
    for (int row = 0; row < resolution; ++row) {
        const auto& py = paths[static_cast<std::size_t>(resolution - 1 - row)];
        for (int col = 0; col < resolution; ++col) {
            const auto& px = paths[static_cast<std::size_t>(col)];
            bool hit = false;
            for (std::uint64_t mx : px) {
                for (std::uint64_t my : py) {
                    if ((mx | my) == full) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
            raster.set(col, row, hit);
        }
    }
    return raster;
}

}  // namespace

BigRational CarpetLevel::side() const { return BigRational(BigInt(1), side_denominator()); }

BigInt CarpetLevel::side_denominator() const {
    return boost::multiprecision::pow(BigInt(base_of(kind, k)), static_cast<unsigned>(side_exponent));
}

CarpetLevel carpet_counts(int k, int m) {
    require_k(k);
    require_m(m);
    return make_level(CarpetKind::DimensionOne, k, m);
}

CarpetLevel standard_counts(int m) {
    require_m(m);
    return make_level(CarpetKind::MiddleNinths, 3, m);
}

void for_each_square(CarpetKind kind, int k, int m, const std::function<void(const SquareSpec&)>& visit) {
    if (kind == CarpetKind::DimensionOne) require_k(k);
    require_m(m);
    checked_den(kind, k, m);
    visit_rec(kind, k, m, 1, 0, 0, 1, visit);
}

std::vector<SquareSpec> carpet_squares(int k, int m, std::uint64_t cap) {
    require_k(k);
    require_m(m);
    return materialize(CarpetKind::DimensionOne, k, m, cap);
}

std::vector<SquareSpec> standard_squares(int m, std::uint64_t cap) {
    require_m(m);
    return materialize(CarpetKind::MiddleNinths, 3, m, cap);
}

double log_bigint(const BigInt& x) {
    if (x <= 0) throw InvalidParameter("log of a non-positive integer");
    const auto msb = static_cast<long>(boost::multiprecision::msb(x));
    if (msb < 62) return std::log(static_cast<double>(static_cast<std::int64_t>(x)));
    const long shift = msb - 60;
    const BigInt top = x >> shift;
    return std::log(static_cast<double>(static_cast<std::int64_t>(top))) + static_cast<double>(shift) * std::numbers::ln2;
}

CoverBound cover_bound(int k, int m, double s) {
    require_k(k);
    if (m < 1) throw InvalidParameter("cover bound needs m >= 1");
    if (!(s > 0.0)) throw InvalidParameter("cover bound needs s > 0");
    const CarpetLevel level = carpet_counts(k, m);
    const double log_side = -static_cast<double>(level.side_exponent) * std::log(static_cast<double>(k));
    return CoverBound{s, m, s * (0.5 * std::numbers::ln2 + log_side) + log_bigint(level.count)};
}

Raster rasterize_carpet(int k, int m, int resolution) {
    require_k(k);
    return rasterize(CarpetKind::DimensionOne, k, m, resolution);
}

Raster standard_carpet(int m, int resolution) { return rasterize(CarpetKind::MiddleNinths, 3, m, resolution); }

std::string carpet_level_json(const CarpetLevel& level, bool with_squares, std::uint64_t cap) {
    const int base = base_of(level.kind, level.k);
    nlohmann::ordered_json doc;
    doc["kind"] = level.kind == CarpetKind::MiddleNinths ? "middle-ninths" : "dimension-one";
    doc["k"] = level.k;
    doc["m"] = level.m;
    doc["b_m"] = level.count.str();
    doc["l_m"] = fmt::format("{}^-{}", base, level.side_exponent);
    doc["l_m_exponent"] = level.side_exponent;
    if (with_squares) {
        const auto squares = materialize(level.kind, level.k, level.m, cap);
        auto arr = nlohmann::ordered_json::array();
        for (const auto& s : squares) arr.push_back({s.x_num, s.den, s.y_num, s.den});
        doc["squares"] = std::move(arr);
    }
    return doc.dump();
}

}  // namespace carpetlab
