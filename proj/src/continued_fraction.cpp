#include "carpetlab/continued_fraction.hpp"

#include <cctype>
#include <limits>
#include <cmath>
#include <string>

#include "carpetlab/errors.hpp"

namespace carpetlab {

namespace {

BigRational exact_rational(double x) {
    int exp = 0;
    const double frac = std::frexp(x, &exp);
    // frac * 2^53 is an integer for every finite double
    const auto mantissa = static_cast<std::int64_t>(std::ldexp(frac, 53));
    exp -= 53;
    BigRational r{BigInt(mantissa)};
    if (exp > 0) {
        r *= BigRational(BigInt(1) << exp);
    } else if (exp < 0) {
        r /= BigRational(BigInt(1) << -exp);
    }
    return r;
}

BigInt floor_of(const BigRational& x) {
    BigInt q = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
    if (x < 0 && BigRational(q) != x) q -= 1;
    return q;
}

bool is_integer(const BigRational& x) { return boost::multiprecision::denominator(x) == 1; }

}  // namespace

RealInterval RealInterval::from_double(double x) {
    if (!std::isfinite(x)) throw InvalidParameter("alpha must be finite");
    const double up = std::nextafter(x, INFINITY);
    return {exact_rational(x), exact_rational(up - x) / 2};
}

RealInterval RealInterval::from_decimal(std::string_view text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char ch = text[i];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits.push_back(ch);
            if (seen_point) ++frac_digits;
        } else if (ch == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::string exp_text(text.substr(i + 1));
        if (exp_text.empty()) throw InvalidParameter("malformed decimal: " + std::string(text));
        std::size_t used = 0;
        try {
            exponent = std::stol(exp_text, &used);
        } catch (const std::exception&) {
            throw InvalidParameter("malformed decimal: " + std::string(text));
        }
        if (used != exp_text.size()) throw InvalidParameter("malformed decimal: " + std::string(text));
        i = text.size();
    }
    if (digits.empty() || i != text.size()) throw InvalidParameter("malformed decimal: " + std::string(text));

    const long scale = exponent - frac_digits;
    if (scale > 100000 || scale < -100000) throw InvalidParameter("decimal exponent out of range: " + std::string(text));
    auto pow10 = [](long e) { return BigRational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(e))); };
    // cpp_int reads a leading zero as an octal prefix
    const auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    BigRational mid{BigInt(digits)};
    BigRational unit{1};
    if (scale >= 0) {
        unit = pow10(scale);
    } else {
        unit = 1 / pow10(-scale);
    }
    mid *= unit;
    if (negative) mid = -mid;
    return {mid, unit / 2};
}

HighTypeResult high_type_test(const RealInterval& alpha, std::int64_t N, int depth) {
    if (depth < 1) throw InvalidParameter("depth must be >= 1");
    if (N < 1) throw InvalidParameter("N must be >= 1");

    HighTypeResult out;
    auto& cf = out.expansion;
    cf.a0 = floor_of(alpha.mid);
    BigRational mid = alpha.mid - BigRational(cf.a0);
    BigRational lo = alpha.mid - alpha.radius - BigRational(cf.a0);
    BigRational hi = alpha.mid + alpha.radius - BigRational(cf.a0);

    auto finish_exhausted = [&] {
        cf.exhausted = true;
        out.verdict = HighTypeVerdict::No;
    };

    for (int n = 1; n <= depth; ++n) {
        if (mid == 0) {
            finish_exhausted();
            break;
        }
        const bool certified = lo > 0 && hi < 1 && floor_of(1 / lo) == floor_of(1 / hi);
        if (!certified) {
            const BigRational inv = 1 / mid;
            if (is_integer(inv)) {
                // The midpoint's expansion ends right here: rational at this precision.
                cf.partial_quotients.push_back(static_cast<std::int64_t>(floor_of(inv)));
                finish_exhausted();
            } else {
                out.verdict = HighTypeVerdict::Undetermined;
            }
            break;
        }
        const BigInt a = floor_of(1 / hi);
        if (a > BigInt(std::numeric_limits<std::int64_t>::max())) {
            out.verdict = HighTypeVerdict::Undetermined;
            break;
        }
        cf.partial_quotients.push_back(static_cast<std::int64_t>(a));
        if (a < N) {
            out.verdict = HighTypeVerdict::No;
            out.failing_index = n;
            break;
        }
        const BigRational next_lo = 1 / hi - BigRational(a);
        const BigRational next_hi = 1 / lo - BigRational(a);
        lo = next_lo;
        hi = next_hi;
        mid = 1 / mid - BigRational(a);
        if (n == depth) out.verdict = HighTypeVerdict::Yes;
    }
    cf.depth = static_cast<int>(cf.partial_quotients.size());
    if (cf.exhausted && out.verdict == HighTypeVerdict::No) out.failing_index = 0;
    return out;
}

HighTypeResult high_type_test(double alpha, std::int64_t N, int depth) {
    return high_type_test(RealInterval::from_double(alpha), N, depth);
}

}  // namespace carpetlab
