#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "carpetlab/carpet.hpp"
#include "carpetlab/errors.hpp"

using namespace carpetlab;

namespace {

// Reference construction in exact rationals: each square [x, x+L]^2 becomes
// the ring cells of a g x g grid.
struct RationalSquare {
    BigRational x, y, side;
};

std::vector<RationalSquare> reference_squares(int m, const std::function<int(int)>& grid) {
    std::vector<RationalSquare> level{{0, 0, 1}};
    for (int i = 1; i <= m; ++i) {
        const int g = grid(i);
        std::vector<RationalSquare> next;
        for (const auto& s : level) {
            const BigRational step = s.side / g;
            for (int a = 0; a < g; ++a) {
                for (int b = 0; b < g; ++b) {
                    if (a != 0 && a != g - 1 && b != 0 && b != g - 1) continue;
                    next.push_back({s.x + step * a, s.y + step * b, step});
                }
            }
        }
        level = std::move(next);
    }
    return level;
}

int ipow_int(int k, int i) {
    int v = 1;
    while (i-- > 0) v *= k;
    return v;
}

bool interiors_overlap(const SquareSpec& a, const SquareSpec& b) {
    // same denominator within a level
    return a.x_num < b.x_num + 1 && b.x_num < a.x_num + 1 && a.y_num < b.y_num + 1 && b.y_num < a.y_num + 1;
}

}  // namespace

TEST_CASE("counts") {
    const CarpetLevel l1 = carpet_counts(3, 1);
    CHECK(l1.count == 8);
    CHECK(l1.side() == BigRational(1, 3));
    const CarpetLevel l2 = carpet_counts(3, 2);
    CHECK(l2.count == 256);
    CHECK(l2.side() == BigRational(1, 27));
    for (int k = 3; k < 9; ++k) {
        const CarpetLevel l0 = carpet_counts(k, 0);
        CHECK(l0.count == 1);
        CHECK(l0.side() == 1);
    }
    CHECK_THROWS_AS(carpet_counts(2, 1), InvalidParameter);
    CHECK_THROWS_AS(carpet_counts(3, -1), InvalidParameter);

    const CarpetLevel s2 = standard_counts(2);
    CHECK(s2.count == 64);
    CHECK(s2.side() == BigRational(1, 9));
}

TEST_CASE("recurrences hold exactly") {
    for (int k = 3; k <= 12; ++k) {
        for (int m = 1; m <= 40; ++m) {
            const CarpetLevel prev = carpet_counts(k, m - 1);
            const CarpetLevel cur = carpet_counts(k, m);
            const BigInt km = boost::multiprecision::pow(BigInt(k), static_cast<unsigned>(m));
            CHECK(cur.count == prev.count * (4 * km - 4));
            CHECK(cur.side() == prev.side() / BigRational(km));
            CHECK(cur.side_exponent == m * (m + 1) / 2);
            // area b_m l_m^2 strictly decreasing
            CHECK(BigRational(cur.count) * cur.side() * cur.side() < BigRational(prev.count) * prev.side() * prev.side());
        }
    }
}

TEST_CASE("squares match the rational reference construction") {
    for (int k : {3, 4, 5}) {
        for (int m = 0; m <= 2; ++m) {
            const auto squares = carpet_squares(k, m);
            const auto ref = reference_squares(m, [k](int i) { return ipow_int(k, i); });
            REQUIRE(squares.size() == ref.size());
            CHECK(BigInt(squares.size()) == carpet_counts(k, m).count);
            std::set<std::pair<BigRational, BigRational>> expected;
            for (const auto& r : ref) expected.insert({r.x, r.y});
            for (const auto& s : squares) {
                CHECK(s.side() == ref.front().side);
                CHECK(expected.count({s.x(), s.y()}) == 1);
            }
            CHECK(std::is_sorted(squares.begin(), squares.end()));
        }
    }
    // middle ninths
    const auto std3 = standard_squares(3);
    const auto ref3 = reference_squares(3, [](int) { return 3; });
    CHECK(std3.size() == ref3.size());
    CHECK(std3.size() == 512);
}

TEST_CASE("first level examples") {
    const auto s = carpet_squares(3, 1);
    REQUIRE(s.size() == 8);
    for (const auto& q : s) {
        CHECK(q.den == 3);
        CHECK_FALSE((q.x_num == 1 && q.y_num == 1));
    }
    const auto four = carpet_squares(4, 1);
    REQUIRE(four.size() == 12);
    int ring = 0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) ring += (a == 0 || a == 3 || b == 0 || b == 3) ? 1 : 0;
    }
    CHECK(ring == 12);
    for (const auto& q : four) {
        CHECK(q.den == 4);
        CHECK((q.x_num == 0 || q.x_num == 3 || q.y_num == 0 || q.y_num == 3));
    }
}

TEST_CASE("union area equals b_m l_m^2") {
    for (int k : {3, 4}) {
        for (int m = 1; m <= 3; ++m) {
            if (k == 4 && m == 3) continue;  // 720 * 252 squares, covered by the count tests
            BigRational area = 0;
            for (const auto& s : carpet_squares(k, m)) area += s.side() * s.side();
            const CarpetLevel level = carpet_counts(k, m);
            CHECK(area == BigRational(level.count) * level.side() * level.side());
        }
    }
    BigRational a2 = 0;
    for (const auto& s : carpet_squares(3, 2)) a2 += s.side() * s.side();
    CHECK(a2 == BigRational(256, 729));
}

TEST_CASE("squares lie in the unit square with disjoint interiors") {
    for (auto [k, m] : {std::pair{3, 2}, std::pair{4, 2}, std::pair{5, 2}, std::pair{3, 1}}) {
        const auto s = carpet_squares(k, m);
        REQUIRE(s.size() <= 10000);
        for (const auto& q : s) {
            CHECK(q.x_num >= 0);
            CHECK(q.y_num >= 0);
            CHECK(q.x_num + 1 <= q.den);
            CHECK(q.y_num + 1 <= q.den);
        }
        std::size_t overlaps = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) overlaps += interiors_overlap(s[i], s[j]) ? 1 : 0;
        }
        CHECK(overlaps == 0);
    }
    // sampled pairs above the full-scan limit
    const auto big = carpet_squares(3, 3);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> pick(0, big.size() - 1);
    std::size_t overlaps = 0;
    for (int t = 0; t < 200000; ++t) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (i != j) overlaps += interiors_overlap(big[i], big[j]) ? 1 : 0;
    }
    CHECK(overlaps == 0);
}

TEST_CASE("every square has exactly one parent") {
    for (int k : {3, 4}) {
        for (int m = 1; m <= (k == 3 ? 3 : 2); ++m) {
            const auto parents = carpet_squares(k, m - 1);
            const auto children = carpet_squares(k, m);
            const std::int64_t factor = children.front().den / parents.front().den;
            for (const auto& c : children) {
                int count = 0;
                for (const auto& p : parents) {
                    if (c.x_num >= p.x_num * factor && c.x_num + 1 <= (p.x_num + 1) * factor &&
                        c.y_num >= p.y_num * factor && c.y_num + 1 <= (p.y_num + 1) * factor) {
                        ++count;
                    }
                }
                CHECK(count == 1);
            }
        }
    }
}

TEST_CASE("streaming visit matches materialization") {
    std::vector<SquareSpec> streamed;
    for_each_square(CarpetKind::DimensionOne, 3, 3, [&](const SquareSpec& s) { streamed.push_back(s); });
    std::sort(streamed.begin(), streamed.end());
    CHECK(streamed == carpet_squares(3, 3));
}

TEST_CASE("materialization cap") {
    try {
        (void)carpet_squares(3, 3, 1000);
        FAIL("expected a resource error");
    } catch (const ResourceError& e) {
        CHECK(e.required() == "26624");
    }
    CHECK_THROWS_AS(standard_squares(6, 100), ResourceError);
}

TEST_CASE("cover bound") {
    CHECK(cover_bound(3, 1, 1.0).log_value == doctest::Approx(std::log(8 * std::sqrt(2.0) / 3)));
    CHECK(cover_bound(3, 1, 1.0).log_value == doctest::Approx(1.327).epsilon(1e-3));
    CHECK(cover_bound(3, 2, 2.0).log_value == doctest::Approx(std::log(512.0 / 729.0)));
    CHECK(cover_bound(3, 2, 2.0).log_value == doctest::Approx(-0.353).epsilon(2e-3));
    CHECK_THROWS_AS(cover_bound(3, 0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(cover_bound(3, 2, 0.0), InvalidParameter);

    // independent evaluation: sum of ln(4 k^i - 4) = ln 4 + i ln k + log1p(-k^-i)
    for (int k : {3, 5}) {
        for (int m = 1; m <= 200; m += 7) {
            for (double s : {1.0, 1.1, 1.5}) {
                long double sum = 0;
                for (int i = 1; i <= m; ++i) {
                    sum += std::log(4.0L) + i * std::log(static_cast<long double>(k)) +
                           std::log1p(-std::pow(static_cast<long double>(k), -i));
                }
                const long double e = static_cast<long double>(m) * (m + 1) / 2;
                const long double ref = s * (0.5L * std::log(2.0L) - e * std::log(static_cast<long double>(k))) + sum;
                CHECK(cover_bound(k, m, s).log_value == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("cover bound tail tends to minus infinity for s > 1") {
    for (double eps : {0.1, 0.5, 1.0}) {
        double prev = cover_bound(3, 25, 1 + eps).log_value;
        for (int m = 26; m <= 200; ++m) {
            const double v = cover_bound(3, m, 1 + eps).log_value;
            CHECK(v < prev);
            prev = v;
        }
        CHECK(prev < -50);
    }
    // smaller eps: decreasing once eps m ln 3 exceeds ln 4, i.e. past m = 127 for eps = 0.01
    double prev = cover_bound(3, 130, 1.01).log_value;
    for (int m = 131; m <= 200; ++m) {
        const double v = cover_bound(3, m, 1.01).log_value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("cover bound at s = 1 does not collapse") {
    double prev = cover_bound(3, 1, 1.0).log_value;
    for (int m = 2; m <= 200; ++m) {
        const double v = cover_bound(3, m, 1.0).log_value;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev > 0);
}

TEST_CASE("log of big integers") {
    CHECK(log_bigint(BigInt(1)) == 0.0);
    CHECK(log_bigint(BigInt(1000)) == doctest::Approx(std::log(1000.0)));
    const BigInt huge = boost::multiprecision::pow(BigInt(3), 5000);
    CHECK(log_bigint(huge) == doctest::Approx(5000 * std::log(3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(log_bigint(BigInt(0)), InvalidParameter);
}

TEST_CASE("raster examples") {
    CHECK(rasterize_carpet(3, 0, 10).occupied_count() == 100);
    const Raster r = rasterize_carpet(3, 1, 3);
    CHECK(r.occupied_count() == 8);
    CHECK_FALSE(r.at(1, 1));
    CHECK(std::abs(rasterize_carpet(3, 2, 729).occupied_fraction() - 256.0 / 729.0) < 2e-2);
    CHECK(standard_carpet(1, 3).occupied_count() == 8);
    CHECK(std::abs(standard_carpet(2, 729).occupied_fraction() - 64.0 / 81.0) < 1e-3);
    CHECK(std::abs(standard_carpet(5, 243).occupied_fraction() - std::pow(8.0 / 9.0, 5)) < 2e-2);
    CHECK_THROWS_AS(rasterize_carpet(3, 1, 0), InvalidParameter);
}

TEST_CASE("raster agrees with exact point location over materialized squares") {
    for (auto [k, m, res] : {std::tuple{3, 1, 7}, std::tuple{3, 2, 100}, std::tuple{4, 1, 2}, std::tuple{4, 2, 64},
                             std::tuple{4, 2, 50}, std::tuple{5, 2, 125}, std::tuple{3, 3, 81}}) {
        const auto squares = carpet_squares(k, m);
        const Raster r = rasterize_carpet(k, m, res);
        for (int py = 0; py < res; ++py) {
            for (int px = 0; px < res; ++px) {
                // centre ((2px+1)/(2res), 1 - (2py+1)/(2res)); row 0 at the top
                const std::int64_t cx = 2 * px + 1;
                const std::int64_t cy = 2 * (res - 1 - py) + 1;
                bool inside = false;
                for (const auto& s : squares) {
                    const std::int64_t two_res = 2 * res;
                    if (two_res * s.x_num <= cx * s.den && cx * s.den <= two_res * (s.x_num + 1) &&
                        two_res * s.y_num <= cy * s.den && cy * s.den <= two_res * (s.y_num + 1)) {
                        inside = true;
                        break;
                    }
                }
                CHECK(r.at(px, py) == inside);
            }
        }
    }
    // closed squares: centres on shared corners count as occupied
    CHECK(rasterize_carpet(4, 1, 2).occupied_count() == 4);
}

TEST_CASE("deep rasters stream without materializing") {
    // b_6 is far above the materialization cap; streaming still resolves pixel centres
    const Raster r5 = rasterize_carpet(3, 4, 512);
    const Raster r6 = rasterize_carpet(3, 6, 512);
    CHECK(r5.occupied_count() > 0);
    CHECK(r6.occupied_count() <= r5.occupied_count());
    for (int y = 0; y < 512; ++y) {
        for (int x = 0; x < 512; ++x) {
            if (r6.at(x, y)) CHECK(r5.at(x, y));
        }
    }
}

TEST_CASE("json export") {
    const auto doc = nlohmann::json::parse(carpet_level_json(carpet_counts(3, 2), false));
    CHECK(doc["k"] == 3);
    CHECK(doc["m"] == 2);
    CHECK(doc["b_m"] == "256");
    CHECK(doc["l_m"] == "3^-3");
    CHECK_FALSE(doc.contains("squares"));
    const auto with = nlohmann::json::parse(carpet_level_json(carpet_counts(3, 1), true));
    REQUIRE(with["squares"].size() == 8);
    for (const auto& s : with["squares"]) {
        CHECK(s.size() == 4);
        CHECK(s[1] == 3);
        CHECK(s[3] == 3);
    }
    const auto big = nlohmann::json::parse(carpet_level_json(carpet_counts(3, 30), false));
    CHECK(big["b_m"] == carpet_counts(3, 30).count.str());
}
