// Python bindings: run configurations and the closed-form helpers.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xva/closedform.hpp"
#include "xva/engine.hpp"
#include "xva/errors.hpp"

namespace py = pybind11;
using namespace xva;

namespace {

py::tuple est(const Estimate& e) { return py::make_tuple(e.value, e.se); }

py::dict verdict_dict(const Verdict& v) {
    py::dict d;
    d["outcome"] = to_string(v.outcome);
    d["mode"] = to_string(v.mode);
    d["linear_bsde"] = v.linear_bsde;
    d["zero_states"] = v.zero_states;
    d["note"] = v.note;
    py::list ev;
    for (const auto& e : v.evidence) {
        py::dict x;
        x["name"] = e.name;
        x["relation"] = e.relation;
        x["worst"] = e.worst;
        x["holds"] = e.holds;
        x["skipped"] = e.skipped;
        ev.append(x);
    }
    d["evidence"] = ev;
    if (v.eps_bounds) d["eps_bounds"] = py::make_tuple(v.eps_bounds->lower, v.eps_bounds->upper);
    return d;
}

RunConfig with_overrides(RunConfig cfg, std::optional<std::size_t> paths, std::optional<int> steps,
                         std::optional<std::uint64_t> seed) {
    if (paths) cfg.numerics.paths = *paths;
    if (steps) cfg.numerics.steps = *steps;
    if (seed) cfg.numerics.seed = *seed;
    cfg.numerics.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "incremental XVA engine";

    auto base = py::register_exception<Error>(m, "XvaError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
    py::register_exception<RegimeError>(m, "RegimeError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<StepSizeError>(m, "StepSizeError", base.ptr());
    py::register_exception<IdentityError>(m, "IdentityError", base.ptr());
    py::register_exception<TableMismatch>(m, "TableMismatch", base.ptr());

    py::class_<RunConfig>(m, "RunConfig")
        .def_property_readonly("paths", [](const RunConfig& c) { return c.numerics.paths; })
        .def_property_readonly("steps", [](const RunConfig& c) { return c.numerics.steps; })
        .def_property_readonly("seed", [](const RunConfig& c) { return c.numerics.seed; })
        .def_property_readonly("maturity", [](const RunConfig& c) { return c.contract.maturity; })
        .def("with_numerics", &with_overrides, py::arg("paths") = py::none(), py::arg("steps") = py::none(),
             py::arg("seed") = py::none());

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", &parse_config, py::arg("json_text"));

    m.def(
        "price",
        [](const RunConfig& cfg, const std::string& out_dir) {
            PriceResult r;
            {
                py::gil_scoped_release nogil;
                r = run_price(cfg, out_dir);
            }
            py::dict d;
            d["clean"] = est(r.clean);
            d["y0"] = est(r.y0);
            d["price"] = est(r.price);
            d["method"] = r.method;
            d["linear_price"] = r.linear_price ? py::object(est(*r.linear_price)) : py::none();
            d["closed_form"] = r.closed_form ? py::object(py::float_(*r.closed_form)) : py::none();
            d["verdict"] = verdict_dict(r.verdict);
            d["wrong_sign_fraction"] = r.wrong_sign_fraction;
            const auto& x = r.report;
            d["fca_delta"] = est(x.fca_delta);
            d["fba_delta"] = est(x.fba_delta);
            d["dva"] = est(x.dva);
            d["cva"] = est(x.cva);
            d["opportunity_cost"] = est(x.opportunity_cost);
            d["identity_residual"] = py::make_tuple(r.identity.residual, r.identity.se);
            return d;
        },
        py::arg("config"), py::arg("out_dir"));

    m.def(
        "verify",
        [](const RunConfig& cfg, const std::string& out_dir) {
            Verdict v;
            {
                py::gil_scoped_release nogil;
                v = run_verify(cfg, out_dir);
            }
            return verdict_dict(v);
        },
        py::arg("config"), py::arg("out_dir"));

    m.def(
        "table",
        [](const RunConfig& cfg, const std::string& out_dir) {
            TableResult t;
            {
                py::gil_scoped_release nogil;
                t = run_table(cfg, out_dir);
            }
            py::list rows;
            for (const auto& r : t.rows) {
                py::dict d;
                d["side"] = r.side == Side::hedger_pays ? "sell" : "buy";
                d["kind"] = to_string(r.kind);
                d["verdict"] = r.verdict.label();
                d["fba_delta"] = est(r.fba_delta);
                d["dva"] = est(r.dva);
                d["fba_sign"] = to_string(r.fba_sign);
                d["dva_sign"] = to_string(r.dva_sign);
                d["matches"] = r.matches;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["all_match"] = t.all_match();
            out["sell_put_separated"] = t.sell_put_separated;
            return out;
        },
        py::arg("config"), py::arg("out_dir"));

    m.def("closed_form_price", &closed_form_price, py::arg("config"));

    m.def("norm_cdf", &norm_cdf);
    m.def(
        "call_price_replacement",
        [](double S, double K, double tau, double sigma, double r, double s_b, double s_ell, double hH, double LH,
           double Lm, double epsilon) {
            ClosedFormInputs in;
            in.S = S, in.K = K, in.T_minus_t = tau, in.sigma = sigma, in.r = r;
            in.s_b = s_b, in.s_ell = s_ell, in.hH = hH, in.LH = LH, in.Lm = Lm, in.epsilon = epsilon;
            return call_price_replacement(in);
        },
        py::arg("S"), py::arg("K"), py::arg("tau"), py::arg("sigma"), py::arg("r"), py::arg("s_b") = 0.0,
        py::arg("s_ell") = 0.0, py::arg("hH") = 0.0, py::arg("LH") = 0.0, py::arg("Lm") = 1.0,
        py::arg("epsilon") = 0.0);
    m.def("bs_price", &bs_price, py::arg("S"), py::arg("K"), py::arg("tau"), py::arg("sigma"), py::arg("rate"),
          py::arg("call") = true);
}
