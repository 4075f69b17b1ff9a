#pragma once

// Nested-square carpets built in exact arithmetic.
//
// The dimension-one family F_m(k): F_0 = [0,1]^2; at step i every square of
// side L is cut into a k^i x k^i grid and the open centre of side
// L (1 - 2/k^i) is removed, keeping the 4k^i - 4 ring cells. After m steps
// there are b_m = prod (4k^i - 4) squares of side l_m = k^-(m(m+1)/2).
//
// The middle-ninths carpet uses a 3 x 3 grid at every step.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "carpetlab/raster.hpp"

namespace carpetlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kDefaultMaterializationCap = 10'000'000;

enum class CarpetKind {
    DimensionOne,  ///< grid factor k^i at step i
    MiddleNinths,  ///< grid factor 3 at every step
};

/// Closed square [x, x + side] x [y, y + side] with x = x_num / den,
/// y = y_num / den and side = 1 / den, den = base^exponent.
struct SquareSpec {
    std::int64_t x_num = 0;
    std::int64_t y_num = 0;
    std::int64_t den = 1;
    int exponent = 0;

    BigRational x() const { return BigRational(x_num, den); }
    BigRational y() const { return BigRational(y_num, den); }
    BigRational side() const { return BigRational(1, den); }

    friend bool operator==(const SquareSpec&, const SquareSpec&) = default;
    friend auto operator<=>(const SquareSpec& a, const SquareSpec& b) {
        // lexicographic in (x, y); squares of one level share den
        if (auto c = a.x_num <=> b.x_num; c != 0) return c;
        return a.y_num <=> b.y_num;
    }
};

struct CarpetLevel {
    CarpetKind kind = CarpetKind::DimensionOne;
    int k = 3;
    int m = 0;
    BigInt count;           ///< b_m
    int side_exponent = 0;  ///< l_m = k^-side_exponent

    BigRational side() const;
    BigInt side_denominator() const;
};

/// Exact (b_m, l_m). Throws InvalidParameter for k < 3 or m < 0.
CarpetLevel carpet_counts(int k, int m);

/// (8^m, 3^-m) for the middle-ninths carpet.
CarpetLevel standard_counts(int m);

/// Visits every square of F_m in depth-first order without storing them.
/// Throws ResourceError if 64-bit coordinates cannot hold the level.
void for_each_square(CarpetKind kind, int k, int m, const std::function<void(const SquareSpec&)>& visit);

/// All b_m squares sorted lexicographically by (x, y). Throws ResourceError
/// carrying b_m when b_m exceeds the cap.
std::vector<SquareSpec> carpet_squares(int k, int m, std::uint64_t cap = kDefaultMaterializationCap);
std::vector<SquareSpec> standard_squares(int m, std::uint64_t cap = kDefaultMaterializationCap);

struct CoverBound {
    double s = 1.0;
    int m = 0;
    double log_value = 0.0;  ///< ln((sqrt 2 l_m)^s b_m)
};

/// ln of the delta-cover sum of the b_m squares of diameter sqrt(2) l_m.
CoverBound cover_bound(int k, int m, double s);

/// Natural log of a positive big integer, accurate to double precision.
double log_bigint(const BigInt& x);

/// Pixel (i, j) is occupied iff its centre lies in some depth-m square,
/// decided in exact integer arithmetic. The raster covers [0,1]^2.
Raster rasterize_carpet(int k, int m, int resolution);
Raster standard_carpet(int m, int resolution);

/// JSON document {k, m, b_m, l_m, squares?}; squares are listed when
/// with_squares is set (subject to the materialization cap).
std::string carpet_level_json(const CarpetLevel& level, bool with_squares,
                              std::uint64_t cap = kDefaultMaterializationCap);

}  // namespace carpetlab
