#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "../../tools/cli.hpp"
#include "sks/arith.hpp"
#include "sks/lift.hpp"
#include "sks/maass.hpp"
#include "sks/periods.hpp"
#include "sks/quadforms.hpp"
#include "sks/specfun.hpp"
#include "sks/zeta.hpp"

namespace py = pybind11;
using namespace sks;

namespace {

LiftFlavor lift_flavor(const std::string& s) {
    if (s == "plain") return LiftFlavor::plain;
    if (s == "starred") return LiftFlavor::starred;
    throw ConfigError("flavor must be plain or starred");
}

ZetaFlavor zeta_flavor(const std::string& s) {
    if (s == "plain") return ZetaFlavor::plain;
    if (s == "starred") return ZetaFlavor::starred;
    if (s == "twisted") return ZetaFlavor::twisted;
    if (s == "starred_twisted") return ZetaFlavor::starred_twisted;
    throw ConfigError("flavor must be plain, starred, twisted or starred_twisted");
}

py::dict verify_dict(const VerifyReport& r) {
    py::dict d;
    d["max_residual"] = r.max_residual;
    d["floor"] = r.floor;
    d["accepted"] = r.accepted;
    d["rejected"] = r.rejected.size();
    return d;
}

py::tuple mat_tuple(const Mat2i& g) { return py::make_tuple(g.a, g.b, g.c, g.d); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Shintani-Katok-Sarnak lift: orbits, periods, zeta integrals and half-integral weight forms";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PrecisionError>(m, "PrecisionError", PyExc_ArithmeticError);
    py::register_exception<CacheMiss>(m, "CacheMiss", PyExc_LookupError);

    m.attr("DATA_DIR") = SKS_DATA_DIR;

    // arithmetic
    py::class_<DirichletCharacter>(m, "Character")
        .def(py::init([](const std::string& label) { return character_from_label(label); }), py::arg("label"))
        .def_static("principal", &DirichletCharacter::principal, py::arg("modulus"))
        .def_property_readonly("modulus", &DirichletCharacter::modulus)
        .def_property_readonly("order", &DirichletCharacter::order)
        .def_property_readonly("label", &DirichletCharacter::label)
        .def_property_readonly("parity", &DirichletCharacter::parity)
        .def("__call__", &DirichletCharacter::operator(), py::arg("n"))
        .def("__repr__", [](const DirichletCharacter& c) { return "Character('" + c.label() + "')"; });

    m.def("characters", &enumerate_characters, py::arg("modulus"));
    m.def("gauss_sum", &gauss_sum, py::arg("chi"), py::arg("n") = 1);
    m.def("kronecker", &kronecker, py::arg("a"), py::arg("n"));

    // special functions
    m.def("gamma", &complex_gamma, py::arg("s"));
    m.def("log_gamma", &log_gamma, py::arg("s"));
    m.def("kbessel", &kbessel, py::arg("nu"), py::arg("y"));
    m.def("whittaker_w", &whittaker_w, py::arg("kappa"), py::arg("mu"), py::arg("x"));

    // orbits
    py::class_<OrbitRep>(m, "OrbitRep")
        .def_readonly("level", &OrbitRep::N)
        .def_readonly("target", &OrbitRep::target)
        .def_property_readonly("lattice", [](const OrbitRep& r) { return to_string(r.lattice); })
        .def_property_readonly("form", [](const OrbitRep& r) { return py::make_tuple(r.form.A, r.form.B, r.form.C); })
        .def_readonly("coords", &OrbitRep::coords)
        .def_property_readonly("signature", [](const OrbitRep& r) { return to_string(r.signature); })
        .def_readonly("stabilizer_order", &OrbitRep::stabilizer_order)
        .def_property_readonly("automorph",
                               [](const OrbitRep& r) -> py::object {
                                   if (!r.automorph) return py::none();
                                   return mat_tuple(*r.automorph);
                               })
        .def_readonly("split", &OrbitRep::split)
        .def_readonly("heegner", &OrbitRep::heegner)
        .def("__repr__", [](const OrbitRep& r) { return "OrbitRep(" + to_string(r.form) + ")"; });

    m.def(
        "orbits",
        [](i64 level, i64 target, const std::string& lattice) {
            return enumerate_orbits(level, target, lattice_from_string(lattice));
        },
        py::arg("level"), py::arg("target"), py::arg("lattice") = "LN");

    // Maass forms
    py::class_<MaassForm>(m, "MaassForm")
        .def_readonly("level", &MaassForm::level)
        .def_readonly("R", &MaassForm::R)
        .def_readonly("nmax", &MaassForm::nmax)
        .def_readonly("character", &MaassForm::char_label)
        .def_property_readonly("parity", [](const MaassForm& f) { return to_string(f.parity); })
        .def_property_readonly("checksum", &MaassForm::checksum)
        .def("a", &MaassForm::a, py::arg("n"))
        .def(
            "__call__",
            [](const MaassForm& f, cplx z, i64 M) {
                PhiOptions opt;
                opt.M = M;
                return eval_phi(f, z, opt);
            },
            py::arg("z"), py::arg("M") = -1);

    m.def("load_fixture", &load_fixture, py::arg("path"));
    m.def("parse_fixture", &parse_fixture, py::arg("text"));

    // periods
    m.def(
        "period",
        [](const MaassForm& f, const OrbitRep& rep, double rel_tol) {
            PeriodOptions opt;
            opt.rel_tol = rel_tol;
            auto p = period(f, rep, opt);
            py::dict d;
            d["value"] = p.value;
            d["error_estimate"] = p.error_estimate;
            d["scale"] = p.scale;
            d["method"] = to_string(p.method);
            return d;
        },
        py::arg("form"), py::arg("rep"), py::arg("rel_tol") = 1e-12);

    // half-integral weight forms
    py::class_<HalfIntegralForm>(m, "HalfIntegralForm")
        .def_property_readonly("level", &HalfIntegralForm::level)
        .def_readonly("nmax", &HalfIntegralForm::nmax)
        .def_readonly("mu", &HalfIntegralForm::mu)
        .def_readonly("character", &HalfIntegralForm::char_label)
        .def_readonly("constants", &HalfIntegralForm::constants)
        .def_property_readonly("flavor", [](const HalfIntegralForm& F) { return to_string(F.flavor); })
        .def("coeff", &HalfIntegralForm::coeff, py::arg("n"))
        .def(
            "error",
            [](const HalfIntegralForm& F, i64 n) {
                if (n < -F.nmax || n > F.nmax) throw ConfigError("coefficient index out of range");
                return F.err[static_cast<std::size_t>(n + F.nmax)];
            },
            py::arg("n"))
        .def(
            "__call__",
            [](const HalfIntegralForm& F, cplx z, i64 M) {
                return F.flavor == LiftFlavor::plain ? eval_F(F, z, M) : eval_G(F, z, M);
            },
            py::arg("z"), py::arg("M") = -1)
        .def("export", &export_half_integral);

    m.def("parse_half_integral", &parse_half_integral, py::arg("text"));

    m.def(
        "lift",
        [](const MaassForm& f, i64 nmax, const std::string& flavor, const std::string& constants,
           const std::string& character, int threads) {
            LiftOptions opt;
            opt.constants = lift_constants_from_string(constants);
            opt.threads = threads;
            auto chi = character.empty() ? DirichletCharacter::principal(f.level) : character_from_label(character);
            py::gil_scoped_release release;
            return lift_form(f, chi, nmax, lift_flavor(flavor), opt);
        },
        py::arg("form"), py::arg("nmax") = 40, py::arg("flavor") = "plain", py::arg("constants") = "matched",
        py::arg("character") = "", py::arg("threads") = 1);

    m.def("theta_multiplier", [](i64 a, i64 b, i64 c, i64 d, cplx z) { return theta_multiplier(Mat2i{a, b, c, d}, z); },
          py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("z"));
    m.def("generators", [](i64 N) {
        std::vector<py::tuple> out;
        for (const auto& g : gamma0_4N_generators(N)) out.push_back(mat_tuple(g));
        return out;
    }, py::arg("level"));

    auto sample = [](std::uint64_t seed, int points, double tol, int threads) {
        SampleOptions s;
        s.seed = seed;
        s.points = points;
        s.tol = tol;
        s.threads = threads;
        return s;
    };
    m.def(
        "verify_modularity",
        [sample](const HalfIntegralForm& F, std::uint64_t seed, int points, double tol, int threads) {
            VerifyReport r;
            {
                py::gil_scoped_release release;
                r = verify_modularity(F, gamma0_4N_generators(F.N), sample(seed, points, tol, threads));
            }
            return verify_dict(r);
        },
        py::arg("F"), py::arg("seed") = 1, py::arg("points") = 10, py::arg("tol") = 1e-3, py::arg("threads") = 1);
    m.def(
        "verify_fg",
        [sample](const HalfIntegralForm& F, const HalfIntegralForm& G, std::uint64_t seed, int points, double tol,
                 int threads) {
            VerifyReport r;
            {
                py::gil_scoped_release release;
                r = verify_FG(F, G, sample(seed, points, tol, threads));
            }
            return verify_dict(r);
        },
        py::arg("F"), py::arg("G"), py::arg("seed") = 1, py::arg("points") = 10, py::arg("tol") = 1e-3,
        py::arg("threads") = 1);

    // Fourier transform and functional equation identities
    m.def(
        "fourier_sato",
        // the dual point is w / (N r) with w half-integral
        [](i64 N, i64 r, const DirichletCharacter& chi, const DirichletCharacter& psi, std::array<i64, 3> v) {
            HalfIntegralPoint w{v[0], v[1], v[2]};
            auto s = fourier_sato_transform(N, r, chi, psi, {w.w1, w.w2, w.w3, N * r});
            py::dict d;
            d["value"] = s.value;
            d["closed_form"] = fourier_sato_closed_form(N, r, chi, psi, w);
            d["index"] = s.index;
            return d;
        },
        py::arg("level"), py::arg("r"), py::arg("chi"), py::arg("psi"), py::arg("w"));
    m.def(
        "matrix_identity",
        [](cplx lambda, cplx s, i64 N) {
            auto c = kernel_identity_check(lambda, s, N);
            py::dict d;
            d["residual"] = c.residual;
            d["verbatim_residual"] = c.verbatim_residual;
            return d;
        },
        py::arg("lam"), py::arg("s"), py::arg("level") = 1);

    m.def(
        "zeta",
        [](const MaassForm& f, const std::string& flavor, int side, cplx s, i64 T, const std::string& psi,
           const std::string& cache_path) {
            ZetaRequest req;
            req.flavor = zeta_flavor(flavor);
            if (side != 1 && side != -1) throw ConfigError("side must be 1 or -1");
            req.side = side;
            req.s = s;
            req.T = T;
            req.chi = DirichletCharacter::principal(f.level);
            if (!psi.empty()) req.psi = character_from_label(psi);
            req.compute_missing = true;
            PeriodCache cache = cache_path.empty() ? PeriodCache() : PeriodCache(cache_path);
            auto z = zeta_series_eval(f, cache, req);
            cache.save();
            py::dict d;
            d["value"] = z.value;
            d["last_term"] = z.last_term;
            d["tail_warning"] = z.tail_warning;
            return d;
        },
        py::arg("form"), py::arg("flavor") = "plain", py::arg("side") = 1, py::arg("s") = cplx{2.0, 0.0},
        py::arg("T") = 10, py::arg("psi") = "", py::arg("cache_path") = "");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
