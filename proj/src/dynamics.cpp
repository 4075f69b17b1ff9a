#include "carpetlab/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "carpetlab/errors.hpp"

namespace carpetlab {

namespace {

void require_mcmullen_params(int n, ComplexPoint lambda) {
    if (n < 3) throw InvalidParameter(fmt::format("McMullen degree n must be >= 3, got {}", n));
    if (lambda.is_zero()) throw InvalidParameter("McMullen parameter lambda must be nonzero");
    if (!lambda.is_finite()) throw InvalidParameter("McMullen parameter lambda must be finite");
}

// One step of the map. Returns false when the image is not representable
// (pole or overflow); z is left untouched in that case.
struct Stepper {
    enum class Kind { McMullen, Quadratic, Siegel } kind;
    int n = 0;
    ComplexPoint param;  // lambda, c, or exp(2 pi i alpha)

    explicit Stepper(const MapFamily& family) {
        std::visit(
            [this](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, McMullen>) {
                    kind = Kind::McMullen;
                    n = f.n;
                    param = f.lambda;
                } else if constexpr (std::is_same_v<T, Quadratic>) {
                    kind = Kind::Quadratic;
                    param = f.c;
                } else {
                    kind = Kind::Siegel;
                    param = from_polar(1.0, 2.0 * std::numbers::pi * f.alpha);
                }
            },
            family.variant());
    }

    bool step(ComplexPoint& z) const noexcept {
        ComplexPoint next;
        switch (kind) {
        case Kind::McMullen: {
            const ComplexPoint w = ipow(z, n);
            if (w.is_zero()) return false;
            next = w + divide(param, w);
            break;
        }
        case Kind::Quadratic:
            next = z * z + param;
            break;
        case Kind::Siegel:
            next = param * z + z * z;
            break;
        }
        if (!std::isfinite(next.norm())) return false;
        z = next;
        return true;
    }
};

OrbitRecord run_orbit(const Stepper& stepper, ComplexPoint z0, double escape_r, double central_r,
                      int max_steps, bool keep_trace) {
    OrbitRecord rec;
    if (keep_trace) rec.moduli.emplace();
    const double escape2 = escape_r * escape_r;
    const double central2 = central_r * central_r;
    const bool has_pole = stepper.kind == Stepper::Kind::McMullen;
    ComplexPoint z = z0;
    for (int j = 1; j <= max_steps; ++j) {
        rec.steps_computed = j;
        if (has_pole && z.is_zero()) {
            // 0 maps to infinity; z_{j-1} = 0 was already recorded as central.
            rec.escape_index = j;
            rec.final_modulus = std::numeric_limits<double>::infinity();
            if (keep_trace) rec.moduli->push_back(rec.final_modulus);
            return rec;
        }
        if (!stepper.step(z)) {
            rec.escape_index = j;
            rec.final_modulus = std::numeric_limits<double>::infinity();
            if (keep_trace) rec.moduli->push_back(rec.final_modulus);
            return rec;
        }
        const double m2 = z.norm();
        if (keep_trace) rec.moduli->push_back(std::sqrt(m2));
        if (m2 > escape2) {
            rec.escape_index = j;
            rec.final_modulus = std::sqrt(m2);
            return rec;
        }
        if (m2 < central2) rec.min_central_index = j;
    }
    rec.final_modulus = z.abs();
    return rec;
}

struct Verdict {
    Tag tag;
    int k;
};

Verdict verdict_of(const OrbitRecord& rec) {
    if (!rec.escape_index) return {Tag::NonEscaping, -1};
    if (!rec.min_central_index) return {Tag::Cantor, 0};
    if (*rec.min_central_index == 1) return {Tag::CantorCircles, 2};
    return {Tag::Carpet, *rec.min_central_index + 1};
}

}  // namespace

MapFamily MapFamily::mcmullen(int n, ComplexPoint lambda) {
    require_mcmullen_params(n, lambda);
    return MapFamily(McMullen{n, lambda});
}

MapFamily MapFamily::quadratic(ComplexPoint c) {
    if (!c.is_finite()) throw InvalidParameter("quadratic parameter c must be finite");
    return MapFamily(Quadratic{c});
}

MapFamily MapFamily::siegel_quadratic(double alpha) {
    if (!std::isfinite(alpha)) throw InvalidParameter("rotation number must be finite");
    double reduced = alpha - std::floor(alpha);
    if (reduced >= 1.0) reduced = 0.0;
    return MapFamily(SiegelQuadratic{reduced});
}

double MapFamily::escape_radius() const noexcept {
    return std::visit(
        [](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, McMullen>) {
                return carpetlab::escape_radius(f.n, f.lambda);
            } else if constexpr (std::is_same_v<T, Quadratic>) {
                // |z|^2 - |c| > 2|z| for |z| > 1 + sqrt(1 + |c|)
                return 1.0 + std::sqrt(1.0 + f.c.abs());
            } else {
                return 3.0;
            }
        },
        v_);
}

ComplexPoint eval_map(const MapFamily& family, ComplexPoint z) {
    const Stepper stepper(family);
    if (stepper.kind == Stepper::Kind::McMullen && z.is_zero()) throw PoleError();
    if (!stepper.step(z)) return {kEscapedSentinel, 0.0};
    return z;
}

std::vector<ComplexPoint> critical_points(int n, ComplexPoint lambda) {
    require_mcmullen_params(n, lambda);
    const double r = critical_radius(n, lambda);
    double theta = lambda.arg();
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    std::vector<ComplexPoint> out;
    out.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < 2 * n; ++i) {
        out.push_back(from_polar(r, (theta + 2.0 * std::numbers::pi * i) / (2.0 * n)));
    }
    return out;
}

ComplexPoint principal_critical_point(int n, ComplexPoint lambda) {
    require_mcmullen_params(n, lambda);
    return from_polar(critical_radius(n, lambda), lambda.arg() / (2.0 * n));
}

std::pair<ComplexPoint, ComplexPoint> critical_values(ComplexPoint lambda) {
    if (lambda.is_zero()) throw InvalidParameter("critical values need lambda != 0");
    const ComplexPoint v = 2.0 * principal_sqrt(lambda);
    return {v, -v};
}

double escape_radius(int n, ComplexPoint lambda) {
    require_mcmullen_params(n, lambda);
    return std::max(std::pow(4.0, 1.0 / (n - 1)), std::pow(2.0 * lambda.abs(), 1.0 / (2.0 * n)));
}

double critical_radius(int n, ComplexPoint lambda) {
    require_mcmullen_params(n, lambda);
    return std::pow(lambda.abs(), 1.0 / (2.0 * n));
}

OrbitRecord iterate_orbit(const MapFamily& family, ComplexPoint z0, double escape_r, double central_r,
                          int max_steps, bool keep_trace) {
    if (!(central_r > 0.0) || !(escape_r > central_r)) {
        throw InvalidParameter(fmt::format("need R > rho > 0, got R = {}, rho = {}", escape_r, central_r));
    }
    if (max_steps < 1) throw InvalidParameter("max_steps must be >= 1");
    if (!z0.is_finite() || z0.abs() > escape_r) {
        throw InvalidParameter(fmt::format("start point must satisfy |z0| <= R = {}", escape_r));
    }
    return run_orbit(Stepper(family), z0, escape_r, central_r, max_steps, keep_trace);
}

std::string_view tag_name(Tag tag) noexcept {
    switch (tag) {
    case Tag::Cantor: return "Cantor";
    case Tag::CantorCircles: return "CantorCircles";
    case Tag::Carpet: return "Carpet";
    case Tag::NonEscaping: return "NonEscaping";
    case Tag::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::optional<Tag> parse_tag(std::string_view name) noexcept {
    for (Tag t : {Tag::Cantor, Tag::CantorCircles, Tag::Carpet, Tag::NonEscaping, Tag::Undetermined}) {
        if (tag_name(t) == name) return t;
    }
    return std::nullopt;
}

std::string Classification::label() const {
    if (tag == Tag::Carpet) return fmt::format("Carpet({})", k);
    return std::string(tag_name(tag));
}

int tag_code(Tag tag, int k) noexcept {
    switch (tag) {
    case Tag::Cantor: return 0;
    case Tag::CantorCircles: return 2;
    case Tag::Carpet: return k;
    case Tag::NonEscaping: return -1;
    case Tag::Undetermined: return -2;
    }
    return -2;
}

std::pair<Tag, int> decode_tag(int code) noexcept {
    if (code == 0) return {Tag::Cantor, 0};
    if (code == 2) return {Tag::CantorCircles, 2};
    if (code >= 3) return {Tag::Carpet, code};
    if (code == -1) return {Tag::NonEscaping, -1};
    return {Tag::Undetermined, -1};
}

Classification classify_parameter(int n, ComplexPoint lambda, const ClassifyOptions& opts) {
    require_mcmullen_params(n, lambda);
    if (opts.max_steps < 1) throw InvalidParameter("max_steps must be >= 1");
    if (!(opts.rho_scale > 0.0)) throw InvalidParameter("rho_scale must be positive");

    const Stepper stepper(MapFamily::mcmullen(n, lambda));
    const ComplexPoint z0 = principal_critical_point(n, lambda);

    Classification out;
    out.escape_r = escape_radius(n, lambda);
    out.central_r = critical_radius(n, lambda) * opts.rho_scale;
    out.max_steps = opts.max_steps;
    out.orbit = run_orbit(stepper, z0, out.escape_r, out.central_r, opts.max_steps, false);
    const Verdict base = verdict_of(out.orbit);
    out.tag = base.tag;
    out.k = base.k;

    if (opts.check_stability) {
        auto rerun = [&](double rho, int steps) {
            return verdict_of(run_orbit(stepper, z0, out.escape_r, rho, steps, false));
        };
        const Verdict half = rerun(out.central_r / 2.0, opts.max_steps);
        const Verdict twice = rerun(out.central_r * 2.0, opts.max_steps);
        const Verdict longer = rerun(out.central_r, 2 * opts.max_steps);
        StabilityReport& s = out.stability;
        s.checked = true;
        s.half_rho = half.tag;
        s.half_rho_k = half.k;
        s.double_rho = twice.tag;
        s.double_rho_k = twice.k;
        s.double_steps = longer.tag;
        s.double_steps_k = longer.k;
        for (const Verdict& v : {half, twice, longer}) {
            if (v.tag != base.tag || v.k != base.k) s.stable = false;
        }
        if (!s.stable) {
            out.tag = Tag::Undetermined;
            out.k = -1;
        }
    }
    return out;
}

}  // namespace carpetlab
