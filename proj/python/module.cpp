#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include "carpetlab/carpet.hpp"
#include "carpetlab/continued_fraction.hpp"
#include "carpetlab/dynamics.hpp"
#include "carpetlab/errors.hpp"
#include "carpetlab/metrics.hpp"
#include "carpetlab/report.hpp"

namespace py = pybind11;
using namespace carpetlab;

namespace {

ComplexPoint to_point(std::complex<double> z) { return {z.real(), z.imag()}; }
std::complex<double> to_complex(ComplexPoint z) { return {z.re, z.im}; }

py::int_ big(const BigInt& x) { return py::int_(py::str(x.str())); }

py::dict classification_dict(int n, ComplexPoint lambda, const Classification& c) {
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(dump_json(classification_json(n, lambda, c)));
}

py::list raster_rows(const Raster& r) {
    py::list rows;
    for (int y = 0; y < r.height(); ++y) {
        py::list row;
        for (int x = 0; x < r.width(); ++x) row.append(r.at(x, y));
        rows.append(row);
    }
    return rows;
}

Raster raster_from_rows(const std::vector<std::vector<bool>>& rows) {
    if (rows.empty() || rows.front().empty()) throw InvalidParameter("raster needs at least one pixel");
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.front().size());
    Raster r(w, h, Viewport{0.0, 1.0, 0.0, static_cast<double>(h) / w});
    for (int y = 0; y < h; ++y) {
        if (static_cast<int>(rows[y].size()) != w) throw InvalidParameter("ragged raster rows");
        for (int x = 0; x < w; ++x) r.set(x, y, rows[y][x]);
    }
    return r;
}

}  // namespace

PYBIND11_MODULE(_carpetlab, m) {
    m.doc() = "McMullen-map classification, nested-square carpets and fractal measurements";

    py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
    py::register_exception<PoleError>(m, "PoleError", PyExc_ArithmeticError);
    py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    m.def("critical_points", [](int n, std::complex<double> lambda) {
        std::vector<std::complex<double>> out;
        for (const auto& c : critical_points(n, to_point(lambda))) out.push_back(to_complex(c));
        return out;
    }, py::arg("n"), py::arg("lam"));
    m.def("escape_radius", [](int n, std::complex<double> lambda) { return escape_radius(n, to_point(lambda)); },
          py::arg("n"), py::arg("lam"));
    m.def("mcmullen", [](int n, std::complex<double> lambda, std::complex<double> z) {
        return to_complex(eval_map(MapFamily::mcmullen(n, to_point(lambda)), to_point(z)));
    }, py::arg("n"), py::arg("lam"), py::arg("z"));
    m.def("classify", [](int n, std::complex<double> lambda, int n_max, bool stability) {
        const ComplexPoint l = to_point(lambda);
        return classification_dict(n, l, classify_parameter(n, l, ClassifyOptions{n_max, 1.0, stability}));
    }, py::arg("n"), py::arg("lam"), py::arg("n_max") = 1000, py::arg("stability") = true,
       "Escape-trichotomy report for z^n + lam / z^n.");

    m.def("carpet_counts", [](int k, int m_) {
        const CarpetLevel level = carpet_counts(k, m_);
        return py::make_tuple(big(level.count), big(level.side_denominator()));
    }, py::arg("k"), py::arg("m"), "(b_m, 1 / l_m) as Python integers.");
    m.def("carpet_squares", [](int k, int m_) {
        std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> out;
        for (const auto& s : carpet_squares(k, m_)) out.emplace_back(s.x_num, s.y_num, s.den);
        return out;
    }, py::arg("k"), py::arg("m"), "Squares as (x_num, y_num, den) with side 1/den.");
    m.def("cover_bound", [](int k, int m_, double s) { return cover_bound(k, m_, s).log_value; },
          py::arg("k"), py::arg("m"), py::arg("s"));
    m.def("rasterize_carpet", [](int k, int m_, int resolution) { return raster_rows(rasterize_carpet(k, m_, resolution)); },
          py::arg("k"), py::arg("m"), py::arg("resolution"));
    m.def("standard_carpet", [](int m_, int resolution) { return raster_rows(standard_carpet(m_, resolution)); },
          py::arg("m"), py::arg("resolution"));

    m.def("box_dimension", [](const std::vector<std::vector<bool>>& rows, int levels) {
        const BoxCountSeries series = box_counts(raster_from_rows(rows), levels);
        const DimensionFit fit = fit_dimension(series);
        return py::dict(py::arg("counts") = series.counts, py::arg("slope") = fit.slope, py::arg("r2") = fit.r2,
                        py::arg("clamped") = fit.clamped);
    }, py::arg("rows"), py::arg("levels"));
    m.def("complement_component_count", [](const std::vector<std::vector<bool>>& rows) {
        return complement_components(raster_from_rows(rows)).components.size();
    }, py::arg("rows"));

    m.def("high_type", [](const std::string& alpha, std::int64_t N, int depth) {
        const HighTypeResult r = high_type_test(RealInterval::from_decimal(alpha), N, depth);
        const char* verdict = r.verdict == HighTypeVerdict::Yes ? "yes" : r.verdict == HighTypeVerdict::No ? "no" : "undetermined";
        return py::make_tuple(r.expansion.partial_quotients, verdict);
    }, py::arg("alpha"), py::arg("N"), py::arg("depth"), "Partial quotients and the high-type verdict of a decimal alpha.");
}
