#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace carpetlab {

/// A point of the complex plane. Components are always finite.
struct ComplexPoint {
    double re = 0.0;
    double im = 0.0;

    constexpr ComplexPoint() = default;
    constexpr ComplexPoint(double r, double i = 0.0) : re(r), im(i) {}

    double abs() const noexcept { return std::hypot(re, im); }
    constexpr double norm() const noexcept { return re * re + im * im; }
    double arg() const noexcept { return std::atan2(im, re); }
    constexpr ComplexPoint conj() const noexcept { return {re, -im}; }
    bool is_finite() const noexcept { return std::isfinite(re) && std::isfinite(im); }
    constexpr bool is_zero() const noexcept { return re == 0.0 && im == 0.0; }

    friend constexpr ComplexPoint operator+(ComplexPoint a, ComplexPoint b) noexcept {
        return {a.re + b.re, a.im + b.im};
    }
    friend constexpr ComplexPoint operator-(ComplexPoint a, ComplexPoint b) noexcept {
        return {a.re - b.re, a.im - b.im};
    }
    friend constexpr ComplexPoint operator-(ComplexPoint a) noexcept { return {-a.re, -a.im}; }
    friend constexpr ComplexPoint operator*(ComplexPoint a, ComplexPoint b) noexcept {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend constexpr ComplexPoint operator*(double s, ComplexPoint a) noexcept {
        return {s * a.re, s * a.im};
    }
    friend constexpr bool operator==(ComplexPoint a, ComplexPoint b) noexcept {
        return a.re == b.re && a.im == b.im;
    }
};

/// Smith's division. Exactly conjugation- and sign-symmetric in IEEE arithmetic.
ComplexPoint divide(ComplexPoint num, ComplexPoint den) noexcept;

/// z^n for n >= 0 by repeated squaring.
ComplexPoint ipow(ComplexPoint z, int n) noexcept;

/// Principal square root (branch cut on the negative real axis, conj(sqrt z) = sqrt(conj z)).
ComplexPoint principal_sqrt(ComplexPoint z) noexcept;

ComplexPoint from_polar(double r, double theta) noexcept;

/// A point of the Riemann sphere: a finite ComplexPoint or infinity.
struct SpherePoint {
    ComplexPoint z;
    bool infinite = false;

    static constexpr SpherePoint infinity() noexcept { return {ComplexPoint{}, true}; }
    constexpr SpherePoint() = default;
    constexpr SpherePoint(ComplexPoint p) : z(p) {}
    constexpr SpherePoint(ComplexPoint p, bool inf) : z(p), infinite(inf) {}
};

/// 2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2)), extended continuously to infinity. Range [0, 2].
double chordal_distance(SpherePoint z, SpherePoint w) noexcept;

/// Parses "a+bi", "a-bi", "a", "bi", "i", "-i" (no spaces). Returns nullopt on malformed input.
std::optional<ComplexPoint> parse_complex(std::string_view text);

/// Inverse of parse_complex using shortest round-trip formatting.
std::string format_complex(ComplexPoint z);

}  // namespace carpetlab
