/* Python bindings for the main pipeline operations: fields in, invariant
 * tables, reconstruction round trips, and the discrete spectral check.
 * Coefficient lists cross the boundary as (p, q, value) triples, matching
 * the JSON problem format. */
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tsi/io.hpp"
#include "tsi/spectral_oracle.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace tsi;

namespace {

using triple = std::tuple<int, int, double>;

std::map<ipair, double> coeffs_from(const std::vector<triple>& triples) {
    std::map<ipair, double> out;
    for (const auto& [p, q, c] : triples) out[ipair{p, q}] = c;
    return out;
}

std::vector<triple> coeffs_to(const std::map<ipair, double>& coeffs) {
    std::vector<triple> out;
    out.reserve(coeffs.size());
    for (const auto& [idx, c] : coeffs) out.emplace_back(idx.p, idx.q, c);
    return out;
}

std::vector<ipair> dirs_from(const std::vector<std::pair<int, int>>& dirs) {
    std::vector<ipair> out;
    out.reserve(dirs.size());
    for (const auto& [m, n] : dirs) out.push_back(ipair{m, n});
    return out;
}

py::dict error_dict(const field_error& e) {
    return py::dict("rel_l2"_a = e.rel_l2, "sup"_a = e.sup);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Inverse spectral toolkit for periodic magnetic Schrodinger "
        "operators on 2-D tori: invariant tables, field/potential "
        "reconstruction, and a finite-difference spectral cross-check.";

    static py::exception<tsi::error> exc(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const tsi::error& e) {
            // Raw C API keeps this portable across pybind11 generations
            // (py::set_error is 2.12+, exception::operator() is pre-3.0).
            PyErr_SetString(exc.ptr(), e.what());
        }
    });

    py::class_<vec2>(m, "vec2", "Plane vector")
        .def(py::init<double, double>(), "x"_a, "y"_a)
        .def_readwrite("x", &vec2::x)
        .def_readwrite("y", &vec2::y)
        .def("norm", &vec2::norm)
        .def("__repr__", [](const vec2& v) {
            return "vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
                   ")";
        });

    py::class_<lattice>(m, "lattice", "Cell basis with positive orientation")
        .def_readonly("e1", &lattice::e1)
        .def_readonly("e2", &lattice::e2)
        .def_readonly("det", &lattice::det);
    m.def(
        "make_lattice",
        [](const vec2& e1, const vec2& e2) { return make_lattice(e1, e2); },
        "e1"_a, "e2"_a);

    py::class_<scalar_field>(m, "scalar_field",
                             "Real even Fourier series over the dual lattice")
        .def_property_readonly("lattice",
                               [](const scalar_field& f) { return f.lat; })
        .def("coeff", &scalar_field::coeff, "p"_a, "q"_a)
        .def("mean", &scalar_field::mean)
        .def(
            "eval",
            [](const scalar_field& f, double x, double y) {
                return f.eval(vec2{x, y});
            },
            "x"_a, "y"_a)
        .def("coefficients",
             [](const scalar_field& f) { return coeffs_to(f.coeffs); });
    m.def(
        "make_field",
        [](const lattice& lat, const std::vector<triple>& coeffs,
           bool normalize_flux) {
            return make_field(lat, coeffs_from(coeffs), normalize_flux);
        },
        "lattice"_a, "coefficients"_a, "normalize_flux"_a = false,
        "Build a field from (p, q, value) triples; mirror entries must "
        "balance");

    py::class_<magnetic_potential>(m, "magnetic_potential",
                                   "A0 + a0 + periodic canonical modes")
        .def_readonly("b0", &magnetic_potential::b0)
        .def_readonly("a0", &magnetic_potential::a0)
        .def(
            "eval",
            [](const magnetic_potential& a, double x, double y) {
                const vec2 v = a.eval(vec2{x, y});
                return std::make_pair(v.x, v.y);
            },
            "x"_a, "y"_a);
    m.def(
        "make_potential",
        [](const scalar_field& b, const vec2& a0) {
            return make_potential(b, a0);
        },
        "b"_a, "a0"_a);

    m.def(
        "directions_for_cutoff",
        [](int cutoff) {
            std::vector<std::pair<int, int>> out;
            for (const ipair& d : directions_for_cutoff(cutoff))
                out.emplace_back(d.p, d.q);
            return out;
        },
        "cutoff"_a, "Canonical primitive directions covering the index box");

    py::class_<invariant_table>(m, "invariant_table",
                                "Leading and subleading invariants per "
                                "direction and order")
        .def_readonly("kmax", &invariant_table::kmax)
        .def_readonly("c0", &invariant_table::c0)
        .def_property_readonly("lattice",
                               [](const invariant_table& t) { return t.lat; })
        .def("directions",
             [](const invariant_table& t) {
                 std::vector<std::pair<int, int>> out;
                 for (const auto& [didx, col] : t.entries)
                     out.emplace_back(didx.p, didx.q);
                 return out;
             })
        .def(
            "column",
            [](const invariant_table& t, int m, int n) {
                const auto it = t.entries.find(ipair{m, n});
                require(it != t.entries.end(), errc::invalid_argument,
                        "table has no direction (" + std::to_string(m) + "," +
                            std::to_string(n) + ")");
                std::vector<std::tuple<double, double, bool>> out;
                for (const invariant_entry& e : it->second)
                    out.emplace_back(e.leading, e.subleading, e.flagged);
                return out;
            },
            "m"_a, "n"_a, "List of (leading, subleading, flagged) for k >= 1");
    m.def(
        "build_invariant_table",
        [](const scalar_field& b, const scalar_field& v, const vec2& a0,
           const std::vector<std::pair<int, int>>& directions, int kmax) {
            return build_invariant_table(b, v, a0, dirs_from(directions), kmax);
        },
        "b"_a, "v"_a, "a0"_a, "directions"_a, "kmax"_a);

    m.def(
        "validate_problem",
        [](const scalar_field& b, const vec2& a0, double length_radius,
           double cosine_radius, double floor) {
            const hypothesis_report rep =
                validate_problem(b, a0, length_radius, cosine_radius, floor);
            std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>
                lengths;
            for (const auto& pr : rep.length_violations)
                lengths.push_back({{pr.a.p, pr.a.q}, {pr.b.p, pr.b.q}});
            std::vector<std::pair<std::pair<int, int>, double>> cosines;
            for (const auto& cv : rep.cosine_violations)
                cosines.push_back({{cv.d.p, cv.d.q}, cv.value});
            return py::dict("ok"_a = rep.ok(),
                            "field_margin"_a = rep.field.margin,
                            "length_violations"_a = lengths,
                            "cosine_violations"_a = cosines);
        },
        "b"_a, "a0"_a, "length_radius"_a = 5.0, "cosine_radius"_a = 6.0,
        "floor"_a = 1e-3);

    m.def(
        "roundtrip",
        [](const scalar_field& b, const scalar_field& v, const vec2& a0,
           int cutoff, int kmax, bool blind) {
            roundtrip_config cfg;
            cfg.cutoff = cutoff;
            cfg.kmax = kmax;
            cfg.recover_class = blind;
            const reconstruction_report rep = roundtrip(b, v, a0, cfg);
            return py::dict("b_error"_a = error_dict(rep.b_error),
                            "v_error"_a = error_dict(rep.v_error),
                            "recovered_b"_a = rep.recovered_b,
                            "recovered_v"_a = rep.recovered_v);
        },
        "b"_a, "v"_a, "a0"_a, "cutoff"_a = 2, "kmax"_a = 0, "blind"_a = false,
        "Forward invariants then reconstruction; errors against the truth");

    py::class_<discrete_hamiltonian>(m, "discrete_hamiltonian",
                                     "Finite-difference operator on an n x n "
                                     "fundamental cell grid")
        .def_readonly("n", &discrete_hamiltonian::n)
        .def("hermiticity_defect", &discrete_hamiltonian::hermiticity_defect);
    m.def(
        "assemble_hamiltonian",
        [](const magnetic_potential& a, const scalar_field& v, int n) {
            return assemble_hamiltonian(a, v, n);
        },
        "a"_a, "v"_a, "n"_a);
    m.def(
        "lowest_eigenvalues",
        [](const discrete_hamiltonian& h, int count) {
            return lowest_eigenvalues(h, count);
        },
        "h"_a, "count"_a, "Ascending, residual-verified");
    m.def("smoothed_wave_trace", &smoothed_wave_trace, "spectrum"_a,
          "t_grid"_a, "width"_a);

    m.def("load_problem",
          [](const std::string& path) {
              const problem_spec ps = load_problem(path);
              return py::dict("b"_a = ps.b, "v"_a = ps.v, "a0"_a = ps.a0,
                              "cutoff"_a = ps.config.cutoff,
                              "kmax"_a = ps.config.kmax);
          },
          "path"_a, "Read a problem JSON file");

#ifdef TSI_VERSION_INFO
    m.attr("__version__") = TSI_VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
