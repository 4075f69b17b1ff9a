#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace carpetlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct ContinuedFractionExpansion {
    BigInt a0;
    std::vector<std::int64_t> partial_quotients;  ///< a_1, a_2, ... (all >= 1)
    int depth = 0;                                ///< number of quotients reported
    bool exhausted = false;                       ///< alpha is rational at working precision
};

enum class HighTypeVerdict { Yes, No, Undetermined };

struct HighTypeResult {
    ContinuedFractionExpansion expansion;
    HighTypeVerdict verdict = HighTypeVerdict::Undetermined;
    int failing_index = 0;  ///< n with a_n < N when verdict is No (0 if exhausted)
};

/// An approximation of a real number: the exact midpoint and a half-width.
struct RealInterval {
    BigRational mid;
    BigRational radius;

    /// A double is taken as exact up to half an ulp.
    static RealInterval from_double(double x);
    /// A decimal literal ("0.4142135623730950488", "-1.5e-3") is exact up to
    /// half a unit in its last digit. Throws InvalidParameter when malformed.
    static RealInterval from_decimal(std::string_view text);
};

/// Partial quotients of alpha by the Gauss map on the interval endpoints and
/// the midpoint in exact rational arithmetic. A quotient is reported only when
/// the whole interval agrees on it.
HighTypeResult high_type_test(const RealInterval& alpha, std::int64_t N, int depth);
HighTypeResult high_type_test(double alpha, std::int64_t N, int depth);

}  // namespace carpetlab
