#include "carpetlab/complex_point.hpp"

#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

namespace carpetlab {

ComplexPoint divide(ComplexPoint num, ComplexPoint den) noexcept {
    const double a = num.re, b = num.im, c = den.re, d = den.im;
    if (std::fabs(c) >= std::fabs(d)) {
        const double r = d / c;
        const double t = c + d * r;
        return {(a + b * r) / t, (b - a * r) / t};
    }
    const double r = c / d;
    const double t = c * r + d;
    return {(a * r + b) / t, (b * r - a) / t};
}

ComplexPoint ipow(ComplexPoint z, int n) noexcept {
    ComplexPoint result{1.0, 0.0};
    ComplexPoint base = z;
    bool first = true;
    while (n > 0) {
        if (n & 1) {
            result = first ? base : result * base;
            first = false;
        }
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

ComplexPoint principal_sqrt(ComplexPoint z) noexcept {
    if (z.is_zero()) return {0.0, z.im};
    const double t = std::sqrt((z.abs() + std::fabs(z.re)) / 2.0);
    if (z.re >= 0.0) return {t, z.im / (2.0 * t)};
    return {std::fabs(z.im) / (2.0 * t), std::copysign(t, z.im)};
}

ComplexPoint from_polar(double r, double theta) noexcept {
    return {r * std::cos(theta), r * std::sin(theta)};
}

double chordal_distance(SpherePoint z, SpherePoint w) noexcept {
    if (z.infinite && w.infinite) return 0.0;
    if (z.infinite) return 2.0 / std::hypot(1.0, w.z.abs());
    if (w.infinite) return 2.0 / std::hypot(1.0, z.z.abs());
    const double d = 2.0 * (z.z - w.z).abs() / (std::hypot(1.0, z.z.abs()) * std::hypot(1.0, w.z.abs()));
    return d > 2.0 ? 2.0 : d;
}

namespace {

std::optional<double> to_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    // strtod accepts a leading '+', from_chars does not
    std::string buf(s);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::optional<ComplexPoint> parse_complex(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.back() != 'i') {
        auto re = to_double(text);
        if (!re) return std::nullopt;
        return ComplexPoint{*re, 0.0};
    }
    std::string_view body = text.substr(0, text.size() - 1);
    // The split is the last sign that is not part of an exponent and not leading.
    std::size_t split = std::string_view::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        const char ch = body[i];
        if ((ch == '+' || ch == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    std::string_view re_part = split == std::string_view::npos ? std::string_view{} : body.substr(0, split);
    std::string_view im_part = split == std::string_view::npos ? body : body.substr(split);
    double re = 0.0;
    if (!re_part.empty()) {
        auto v = to_double(re_part);
        if (!v) return std::nullopt;
        re = *v;
    }
    double im = 0.0;
    if (im_part.empty() || im_part == "+") {
        im = 1.0;
    } else if (im_part == "-") {
        im = -1.0;
    } else {
        auto v = to_double(im_part);
        if (!v) return std::nullopt;
        im = *v;
    }
    return ComplexPoint{re, im};
}

std::string format_complex(ComplexPoint z) {
    return fmt::format("{}{}{}i", z.re, std::signbit(z.im) ? "-" : "+", std::fabs(z.im));
}

}  // namespace carpetlab
