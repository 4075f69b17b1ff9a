#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "carpetlab/dynamics.hpp"
#include "carpetlab/errors.hpp"

using namespace carpetlab;
using std::numbers::pi;

namespace {

// Independent reference iteration in std::complex, used as an oracle.
struct Reference {
    bool escaped = false;
    int escape_index = 0;
    int last_central = 0;  // 0 = none
    double margin = std::numeric_limits<double>::infinity();
};

Reference reference_orbit(int n, std::complex<double> lambda, int steps) {
    const double rho = std::pow(std::abs(lambda), 1.0 / (2 * n));
    const double R = std::max(std::pow(4.0, 1.0 / (n - 1)), std::pow(2 * std::abs(lambda), 1.0 / (2 * n)));
    std::complex<double> z = std::polar(rho, std::arg(lambda) / (2 * n));
    Reference out;
    for (int j = 1; j <= steps; ++j) {
        std::complex<double> zn = 1.0;
        for (int i = 0; i < n; ++i) zn *= z;
        z = zn + lambda / zn;
        const double a = std::abs(z);
        out.margin = std::min({out.margin, std::abs(a - R) / R, std::abs(a - rho) / rho});
        if (a > R) {
            out.escaped = true;
            out.escape_index = j;
            break;
        }
        if (a < rho) out.last_central = j;
    }
    return out;
}

double modulus(ComplexPoint z) { return z.abs(); }

}  // namespace

TEST_CASE("eval_map examples") {
    const auto f = MapFamily::mcmullen(3, ComplexPoint{1, 0});
    CHECK(eval_map(f, ComplexPoint{1, 0}) == ComplexPoint{2, 0});
    CHECK(eval_map(f, ComplexPoint{-1, 0}) == ComplexPoint{-2, 0});
    CHECK(eval_map(MapFamily::quadratic(ComplexPoint{0, 0}), ComplexPoint{0, 1}) == ComplexPoint{-1, 0});

    // dominated by lambda / z^3 = 1e-8 / 8e-12 = 1250
    const auto small = MapFamily::mcmullen(3, ComplexPoint{1e-8, 0});
    const ComplexPoint w = eval_map(small, ComplexPoint{2e-4, 0});
    CHECK(w.re == doctest::Approx(1250.0 + 8e-12).epsilon(1e-14));
    CHECK(w.im == 0.0);

    CHECK_THROWS_AS(eval_map(f, ComplexPoint{0, 0}), PoleError);

    // overflow saturates outside every escape radius
    const ComplexPoint huge = eval_map(f, ComplexPoint{1e200, 1e200});
    CHECK(huge.is_finite());
    CHECK(huge.abs() > 1e300);
}

TEST_CASE("family construction") {
    CHECK_THROWS_AS(MapFamily::mcmullen(2, ComplexPoint{1, 0}), InvalidParameter);
    CHECK_THROWS_AS(MapFamily::mcmullen(3, ComplexPoint{0, 0}), InvalidParameter);
    const auto s = MapFamily::siegel_quadratic(1.25);
    CHECK(std::get<SiegelQuadratic>(s.variant()).alpha == doctest::Approx(0.25));
    CHECK(std::get<SiegelQuadratic>(MapFamily::siegel_quadratic(-0.25).variant()).alpha == doctest::Approx(0.75));
    // P(z) = e^{2 pi i alpha} z + z^2 at alpha = 1/4, z = 1: i + 1
    const ComplexPoint p = eval_map(s, ComplexPoint{1, 0});
    CHECK(p.re == doctest::Approx(1.0));
    CHECK(p.im == doctest::Approx(1.0));
}

TEST_CASE("critical points") {
    SUBCASE("sixth roots of unity") {
        const auto c = critical_points(3, ComplexPoint{1, 0});
        REQUIRE(c.size() == 6);
        CHECK(c[0].re == doctest::Approx(1.0));
        CHECK(c[0].im == doctest::Approx(0.0));
        for (int k = 0; k < 6; ++k) {
            CHECK(c[k].re == doctest::Approx(std::cos(pi * k / 3)));
            CHECK(c[k].im == doctest::Approx(std::sin(pi * k / 3)));
        }
    }
    SUBCASE("modulus two") {
        for (const auto& c : critical_points(3, ComplexPoint{64, 0})) CHECK(c.abs() == doctest::Approx(2.0));
    }
    SUBCASE("n = 4, lambda = i") {
        const auto c = critical_points(4, ComplexPoint{0, 1});
        REQUIRE(c.size() == 8);
        for (int k = 0; k < 8; ++k) {
            CHECK(c[k].abs() == doctest::Approx(1.0));
            CHECK(c[k].arg() == doctest::Approx(std::remainder((pi / 2 + 2 * pi * k) / 8, 2 * pi)));
            const ComplexPoint e = ipow(c[k], 8) - ComplexPoint{0, 1};
            CHECK(e.abs() < 1e-12);
        }
    }
    SUBCASE("random parameters solve the critical equation") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 3 + trial % 5;
            const ComplexPoint lambda{u(rng), u(rng)};
            const auto cs = critical_points(n, lambda);
            REQUIRE(cs.size() == static_cast<std::size_t>(2 * n));
            double prev = -1.0;
            for (const auto& c : cs) {
                CHECK((ipow(c, 2 * n) - lambda).abs() < 1e-10 * lambda.abs());
                // f'(c) = n c^{n-1} - n lambda c^{-(n+1)}
                const ComplexPoint d = n * ipow(c, n - 1) - n * divide(lambda, ipow(c, n + 1));
                CHECK(d.abs() < 1e-8 * n * std::pow(c.abs(), n - 1));
                double a = std::atan2(c.im, c.re);
                if (a < 0) a += 2 * pi;
                CHECK(a > prev);
                prev = a;
            }
        }
    }
    CHECK_THROWS_AS(critical_points(3, ComplexPoint{0, 0}), InvalidParameter);
}

TEST_CASE("critical values") {
    auto [p, m] = critical_values(ComplexPoint{1, 0});
    CHECK(p == ComplexPoint{2, 0});
    CHECK(m == ComplexPoint{-2, 0});
    std::tie(p, m) = critical_values(ComplexPoint{-1, 0});
    CHECK(p == ComplexPoint{0, 2});
    CHECK(m == ComplexPoint{0, -2});
    std::tie(p, m) = critical_values(ComplexPoint{1e-8, 0});
    CHECK(p.re == doctest::Approx(2e-4));
    CHECK(m.re == doctest::Approx(-2e-4));
    CHECK_THROWS_AS(critical_values(ComplexPoint{0, 0}), InvalidParameter);

    // the critical points map onto the critical values
    const ComplexPoint lambda{0.3, -0.2};
    const auto f = MapFamily::mcmullen(5, lambda);
    std::tie(p, m) = critical_values(lambda);
    for (const auto& c : critical_points(5, lambda)) {
        const ComplexPoint v = eval_map(f, c);
        CHECK(std::min((v - p).abs(), (v - m).abs()) < 1e-12);
    }
}

TEST_CASE("escape radius") {
    CHECK(escape_radius(3, ComplexPoint{1, 0}) == doctest::Approx(2.0));
    CHECK(escape_radius(3, ComplexPoint{1e-8, 0}) == doctest::Approx(2.0));
    CHECK(escape_radius(5, ComplexPoint{std::ldexp(1.0, 19), 0}) == doctest::Approx(4.0));

    // doubling certificate on random samples outside R
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const ComplexPoint lambdas[] = {{1, 0}, {1e-8, 0}, {std::ldexp(1.0, 19), 0}, {-0.2, 0.15}, {3e5, -7e5}};
    const int degrees[] = {3, 3, 5, 4, 3};
    for (int t = 0; t < 5; ++t) {
        const auto f = MapFamily::mcmullen(degrees[t], lambdas[t]);
        const double R = escape_radius(degrees[t], lambdas[t]);
        CHECK(R == f.escape_radius());
        int failures = 0;
        for (int i = 0; i < 10000; ++i) {
            const double r = R * (1.0 + 9.0 * (1.0 - unit(rng)));  // (R, 10R]
            const ComplexPoint z = from_polar(r > R ? r : std::nextafter(R, 2 * R), 2 * pi * unit(rng));
            if (!(eval_map(f, z).abs() > 2 * z.abs())) ++failures;
        }
        CHECK(failures == 0);
    }
}

TEST_CASE("iterate_orbit examples and invariants") {
    const auto f = MapFamily::mcmullen(3, ComplexPoint{1, 0});
    SUBCASE("start at 1.5") {
        const OrbitRecord o = iterate_orbit(f, ComplexPoint{1.5, 0}, 2.0, 1.0, 100, true);
        REQUIRE(o.escape_index);
        CHECK(*o.escape_index == 1);
        CHECK_FALSE(o.min_central_index);
        CHECK(o.final_modulus == doctest::Approx(1.5 * 1.5 * 1.5 + 1.0 / (1.5 * 1.5 * 1.5)));
    }
    SUBCASE("start outside R is rejected") {
        CHECK_THROWS_AS(iterate_orbit(f, ComplexPoint{2.5, 0}, 2.0, 1.0, 100), InvalidParameter);
        CHECK_NOTHROW(iterate_orbit(f, ComplexPoint{2.0, 0}, 2.0, 1.0, 100));
    }
    SUBCASE("bad radii and budgets") {
        CHECK_THROWS_AS(iterate_orbit(f, ComplexPoint{1, 0}, 1.0, 2.0, 10), InvalidParameter);
        CHECK_THROWS_AS(iterate_orbit(f, ComplexPoint{1, 0}, 2.0, 0.0, 10), InvalidParameter);
        CHECK_THROWS_AS(iterate_orbit(f, ComplexPoint{1, 0}, 2.0, 1.0, 0), InvalidParameter);
    }
    SUBCASE("critical value of a tiny parameter") {
        const ComplexPoint lambda{1e-8, 0};
        const auto g = MapFamily::mcmullen(3, lambda);
        const OrbitRecord o = iterate_orbit(g, ComplexPoint{2e-4, 0}, 2.0, critical_radius(3, lambda), 100);
        REQUIRE(o.escape_index);
        CHECK(*o.escape_index == 1);
        CHECK_FALSE(o.min_central_index);
        CHECK(critical_radius(3, lambda) == doctest::Approx(0.0464158883));
    }
    SUBCASE("quadratic interior point") {
        const auto q = MapFamily::quadratic(ComplexPoint{0, 0});
        const OrbitRecord o = iterate_orbit(q, ComplexPoint{0.5, 0}, 2.0, 0.25, 50, true);
        CHECK_FALSE(o.escape_index);
        CHECK(o.steps_computed == 50);
        CHECK(o.final_modulus < 1e-300);
        REQUIRE(o.moduli);
        CHECK(o.moduli->size() == 50);
    }
    SUBCASE("pole hit escapes at the next index") {
        const OrbitRecord o = iterate_orbit(f, ComplexPoint{0, 0}, 2.0, 1.0, 10);
        REQUIRE(o.escape_index);
        CHECK(*o.escape_index == 1);
        CHECK(std::isinf(o.final_modulus));
    }
    SUBCASE("record invariants on random orbits") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1.9 / std::sqrt(2.0), 1.9 / std::sqrt(2.0));
        const auto g = MapFamily::mcmullen(3, ComplexPoint{0.05, 0.02});
        const double R = g.escape_radius();
        const double rho = critical_radius(3, ComplexPoint{0.05, 0.02});
        for (int i = 0; i < 500; ++i) {
            const ComplexPoint z0{u(rng), u(rng)};
            const OrbitRecord o = iterate_orbit(g, z0, R, rho, 200, true);
            REQUIRE(o.moduli);
            const auto& m = *o.moduli;
            CHECK(static_cast<int>(m.size()) == o.steps_computed);
            if (o.escape_index) {
                CHECK(*o.escape_index == o.steps_computed);
                CHECK(m.back() > R);
                for (int j = 0; j + 1 < static_cast<int>(m.size()); ++j) CHECK(m[j] <= R);
            }
            if (o.min_central_index) {
                CHECK(*o.min_central_index >= 1);
                if (o.escape_index) CHECK(*o.min_central_index < *o.escape_index);
                CHECK(m[*o.min_central_index - 1] < rho);
                for (int j = *o.min_central_index; j < static_cast<int>(m.size()); ++j) {
                    if (!o.escape_index || j + 1 < *o.escape_index) CHECK(m[j] >= rho);
                }
            }
        }
    }
}

TEST_CASE("classifier examples") {
    const Classification a = classify_parameter(3, ComplexPoint{1, 0});
    CHECK(a.tag == Tag::Cantor);
    CHECK(a.k == 0);
    CHECK(a.stability.checked);
    CHECK(a.stability.stable);
    CHECK(a.label() == "Cantor");

    const Classification b = classify_parameter(3, ComplexPoint{1e-8, 0});
    CHECK(b.tag == Tag::CantorCircles);
    CHECK(b.k == 2);
    REQUIRE(b.orbit.min_central_index);
    CHECK(*b.orbit.min_central_index == 1);
    CHECK(b.stability.stable);

    CHECK_THROWS_AS(classify_parameter(3, ComplexPoint{0, 0}), InvalidParameter);
    CHECK_THROWS_AS(classify_parameter(2, ComplexPoint{1, 0}), InvalidParameter);
    CHECK_THROWS_AS(classify_parameter(3, ComplexPoint{1, 0}, ClassifyOptions{0, 1.0, true}), InvalidParameter);
}

TEST_CASE("a grid search finds a stable Carpet(3) cell") {
    const int N = 64;
    bool found = false;
    for (int i = 0; i < N && !found; ++i) {
        for (int j = 0; j < N && !found; ++j) {
            const ComplexPoint lambda{-0.3 + 0.6 * (i + 0.5) / N, 0.3 - 0.6 * (j + 0.5) / N};
            const Classification c = classify_parameter(3, lambda);
            if (c.tag != Tag::Carpet || c.k != 3) continue;
            found = true;
            REQUIRE(c.orbit.min_central_index);
            CHECK(*c.orbit.min_central_index == 2);
            REQUIRE(c.orbit.escape_index);
            const Reference ref = reference_orbit(3, {lambda.re, lambda.im}, 1000);
            CHECK(ref.escaped);
            CHECK(ref.last_central == 2);
            CHECK(c.label() == "Carpet(3)");
        }
    }
    CHECK(found);
}

TEST_CASE("classifier agrees with an independent reference iteration") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    int compared = 0, disagreements = 0, close_calls = 0;
    for (int i = 0; i < 3000; ++i) {
        const ComplexPoint lambda{u(rng), u(rng)};
        if (lambda.is_zero()) continue;
        const int n = 3 + i % 3;
        const Classification c = classify_parameter(n, lambda, ClassifyOptions{200, 1.0, false});
        const Reference ref = reference_orbit(n, {lambda.re, lambda.im}, 200);
        ++compared;
        bool same = ref.escaped == c.orbit.escape_index.has_value();
        if (same && ref.escaped) {
            same = ref.escape_index == *c.orbit.escape_index &&
                   ref.last_central == c.orbit.min_central_index.value_or(0);
        }
        if (!same) {
            ++disagreements;
            if (ref.margin < 1e-3) ++close_calls;
        }
    }
    // Differences in rounding may only matter when an orbit grazes R or rho.
    CHECK(disagreements == close_calls);
    CHECK(disagreements * 200 <= compared);
}

TEST_CASE("rotational symmetry of moduli") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n : {3, 4, 5}) {
        const ComplexPoint lambda{0.07, -0.03};
        const auto f = MapFamily::mcmullen(n, lambda);
        const ComplexPoint omega = from_polar(1.0, pi / n);
        const double R = f.escape_radius();
        const double rho = critical_radius(n, lambda);
        int compared = 0, mismatched = 0;
        for (int i = 0; i < 2000; ++i) {
            const ComplexPoint z = from_polar(0.2 + (R - 0.25) * u(rng), 2 * pi * u(rng));
            CHECK(modulus(eval_map(f, omega * z)) == doctest::Approx(modulus(eval_map(f, z))).epsilon(1e-12));
            const OrbitRecord a = iterate_orbit(f, z, R, rho, 12, true);
            const OrbitRecord b = iterate_orbit(f, omega * z, R, rho, 12, true);
            const auto& ma = *a.moduli;
            const auto& mb = *b.moduli;
            // skip orbits that graze the escape radius, where rounding decides
            bool grazing = false;
            for (double m : ma) grazing |= std::abs(m - R) < 1e-6 * R;
            if (grazing) continue;
            ++compared;
            if (a.escape_index != b.escape_index) ++mismatched;
            const std::size_t common = std::min(ma.size(), mb.size());
            for (std::size_t j = 0; j < std::min<std::size_t>(common, 3); ++j) {
                CHECK(mb[j] == doctest::Approx(ma[j]).epsilon(1e-9));
            }
        }
        CHECK(compared > 1900);
        CHECK(mismatched == 0);
    }
}

TEST_CASE("odd symmetry is exact") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int n : {3, 5, 7}) {
        const auto f = MapFamily::mcmullen(n, ComplexPoint{u(rng), u(rng)});
        for (int i = 0; i < 1000; ++i) {
            const ComplexPoint z{u(rng), u(rng)};
            CHECK(eval_map(f, -z) == -eval_map(f, z));
        }
    }
}

TEST_CASE("conjugation symmetry of the classifier") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < 1000; ++i) {
        const ComplexPoint lambda{u(rng), u(rng)};
        const Classification a = classify_parameter(3, lambda);
        const Classification b = classify_parameter(3, lambda.conj());
        CHECK(a.tag == b.tag);
        CHECK(a.k == b.k);
        CHECK(a.orbit.escape_index == b.orbit.escape_index);
    }
}

TEST_CASE("determined tags survive doubling the step budget") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    int determined = 0;
    for (int i = 0; i < 400; ++i) {
        const ComplexPoint lambda{u(rng), u(rng)};
        const Classification a = classify_parameter(3, lambda, ClassifyOptions{500, 1.0, true});
        if (a.tag == Tag::NonEscaping || a.tag == Tag::Undetermined) continue;
        ++determined;
        const Classification b = classify_parameter(3, lambda, ClassifyOptions{1000, 1.0, true});
        CHECK(a.tag == b.tag);
        CHECK(a.k == b.k);
    }
    CHECK(determined > 0);
}

TEST_CASE("stability report marks unstable tags") {
    // Below |lambda| = 1 the doubled central radius always contains the
    // critical value, so an escaping Cantor orbit cannot be stable there.
    const ComplexPoint lambda{0.29531250000000003, 0.1453125};
    const Classification c = classify_parameter(3, lambda);
    const Classification raw = classify_parameter(3, lambda, ClassifyOptions{1000, 1.0, false});
    CHECK(raw.tag == Tag::Cantor);
    CHECK_FALSE(raw.stability.checked);
    CHECK(c.tag == Tag::Undetermined);
    CHECK_FALSE(c.stability.stable);
    CHECK(c.stability.half_rho == Tag::Cantor);
    CHECK(c.stability.double_rho != Tag::Cantor);
}

TEST_CASE("tag codes") {
    for (auto [tag, k] : {std::pair{Tag::Cantor, 0}, std::pair{Tag::CantorCircles, 2}, std::pair{Tag::Carpet, 3},
                          std::pair{Tag::Carpet, 17}, std::pair{Tag::NonEscaping, -1}, std::pair{Tag::Undetermined, -1}}) {
        const auto [t2, k2] = decode_tag(tag_code(tag, k));
        CHECK(t2 == tag);
        if (tag != Tag::NonEscaping && tag != Tag::Undetermined) CHECK(k2 == k);
    }
    CHECK(tag_code(Tag::NonEscaping, -1) == -1);
    CHECK(tag_code(Tag::Undetermined, -1) == -2);
    for (Tag t : {Tag::Cantor, Tag::CantorCircles, Tag::Carpet, Tag::NonEscaping, Tag::Undetermined}) {
        CHECK(parse_tag(tag_name(t)) == t);
    }
    CHECK_FALSE(parse_tag("Mandelbrot"));
}
