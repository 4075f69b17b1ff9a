#pragma once

// McMullen maps f(z) = z^n + lambda / z^n, quadratic polynomials, and the
// escape-trichotomy classifier driven by the free critical orbit.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "carpetlab/complex_point.hpp"

namespace carpetlab {

struct McMullen {
    int n = 3;
    ComplexPoint lambda{1.0, 0.0};
};

struct Quadratic {
    ComplexPoint c;
};

/// P(z) = exp(2 pi i alpha) z + z^2 with alpha reduced mod 1.
struct SiegelQuadratic {
    double alpha = 0.0;
};

class MapFamily {
public:
    using Variant = std::variant<McMullen, Quadratic, SiegelQuadratic>;

    /// Throws InvalidParameter unless n >= 3 and lambda != 0.
    static MapFamily mcmullen(int n, ComplexPoint lambda);
    static MapFamily quadratic(ComplexPoint c);
    static MapFamily siegel_quadratic(double alpha);

    const Variant& variant() const noexcept { return v_; }
    bool is_mcmullen() const noexcept { return std::holds_alternative<McMullen>(v_); }
    const McMullen& as_mcmullen() const { return std::get<McMullen>(v_); }

    /// Smallest R for which |z| > R implies |f(z)| > 2|z|.
    double escape_radius() const noexcept;

private:
    explicit MapFamily(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// Modulus used as the saturated image when evaluation overflows.
inline constexpr double kEscapedSentinel = 1.7976931348623157e308;

/// Image of z under the family. Throws PoleError for z = 0 under McMullen.
/// A non-finite image saturates to {kEscapedSentinel, 0}, which lies outside
/// every escape radius.
ComplexPoint eval_map(const MapFamily& family, ComplexPoint z);

/// The 2n solutions of c^(2n) = lambda ordered by increasing argument in [0, 2pi).
std::vector<ComplexPoint> critical_points(int n, ComplexPoint lambda);

/// lambda^(1/2n) on the principal branch; the critical point the classifier follows.
ComplexPoint principal_critical_point(int n, ComplexPoint lambda);

/// (+2 sqrt(lambda), -2 sqrt(lambda)) with the principal branch first.
std::pair<ComplexPoint, ComplexPoint> critical_values(ComplexPoint lambda);

/// max(4^(1/(n-1)), (2|lambda|)^(1/(2n))).
double escape_radius(int n, ComplexPoint lambda);

/// Radius of the critical circle, |lambda|^(1/(2n)).
double critical_radius(int n, ComplexPoint lambda);

struct OrbitRecord {
    std::optional<int> escape_index;       ///< first j with |z_j| > R
    int steps_computed = 0;
    std::optional<int> min_central_index;  ///< last j >= 1 with |z_j| < rho before escape
    double final_modulus = 0.0;            ///< +inf after a pole hit
    std::optional<std::vector<double>> moduli;  ///< |z_1|, |z_2|, ... when requested
};

/// Iterates z0 until |z_j| > R or j = max_steps. Requires R > rho > 0,
/// max_steps >= 1 and |z0| <= R. A pole hit z_j = 0 escapes at j + 1.
OrbitRecord iterate_orbit(const MapFamily& family, ComplexPoint z0, double escape_r,
                          double central_r, int max_steps, bool keep_trace = false);

enum class Tag { Cantor, CantorCircles, Carpet, NonEscaping, Undetermined };

std::string_view tag_name(Tag tag) noexcept;
std::optional<Tag> parse_tag(std::string_view name) noexcept;

struct ClassifyOptions {
    int max_steps = 1000;
    double rho_scale = 1.0;
    bool check_stability = true;
};

/// Outcome of re-running the classifier with rho/2, 2rho and 2 max_steps.
struct StabilityReport {
    bool checked = false;
    bool stable = true;
    Tag half_rho = Tag::Undetermined;
    int half_rho_k = 0;
    Tag double_rho = Tag::Undetermined;
    int double_rho_k = 0;
    Tag double_steps = Tag::Undetermined;
    int double_steps_k = 0;
};

struct Classification {
    Tag tag = Tag::Undetermined;
    int k = -1;  ///< 0 Cantor, 2 Cantor circles, >= 3 carpet, -1 otherwise
    OrbitRecord orbit;
    double escape_r = 0.0;
    double central_r = 0.0;
    int max_steps = 0;
    StabilityReport stability;

    /// "Cantor", "CantorCircles", "Carpet(5)", ...
    std::string label() const;
};

/// Escape trichotomy for f(z) = z^n + lambda / z^n along the principal critical orbit.
Classification classify_parameter(int n, ComplexPoint lambda, const ClassifyOptions& opts = {});

/// Compact integer code for a (tag, k) pair: k for escape tags, -1 NonEscaping, -2 Undetermined.
int tag_code(Tag tag, int k) noexcept;
std::pair<Tag, int> decode_tag(int code) noexcept;

}  // namespace carpetlab
