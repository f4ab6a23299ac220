// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#include "jbb/closedform.hpp"
#include "jbb/commands.hpp"
#include "jbb/errors.hpp"
#include "jbb/estimation.hpp"
#include "jbb/montecarlo.hpp"
#include "jbb/solver.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace jbb;

namespace
{

py::dict result_dict(const CommandResult &r)
{
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["json"] = r.json;
    d["csv"] = r.csv;
    d["text"] = r.text;
    return d;
}

Link link_of(const Scenario &s)
{
    return make_link(s.system, s.profile(), s.precoder);
}

py::dict intersection_dict(const Intersection &ix)
{
    py::dict d;
    d["found"] = ix.found;
    if (ix.found)
    {
        d["ratio"] = ix.ratio;
        d["rho_d"] = ix.rho_d;
        d["rho_b"] = ix.rho_b();
        d["rho_o"] = ix.rho_o();
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_jbb, m)
{
    m.doc() = "Rates, operating points and Monte Carlo checks for joint beamforming and broadcasting";
    m.attr("__version__") = std::string(tool_version());

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<InfeasibleTargetError>(m, "InfeasibleTargetError", PyExc_ArithmeticError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_property_readonly("M", [](const Scenario &s) { return s.system.M; })
        .def_property_readonly("K", [](const Scenario &s) { return s.system.K; })
        .def_property_readonly("Mp", [](const Scenario &s) { return s.system.Mp; })
        .def_property_readonly("beta", [](const Scenario &s) { return s.profile().beta; })
        .def_property_readonly("beta_o", &Scenario::beta_o)
        .def("hash", [](const Scenario &s) { return scenario_hash(s); })
        .def("to_json", [](const Scenario &s) { return serialize_scenario(s); })
        .def("__eq__", [](const Scenario &a, const Scenario &b) { return a == b; });

    m.def("load_scenario", [](const std::string &path) { return load_scenario(path); }, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"));

    m.def("gamma_k", &gamma_k, py::arg("beta"), py::arg("rho_u"), py::arg("tau_pu"));
    m.def("db_to_linear", &db_to_linear);
    m.def("linear_to_db", &linear_to_db);

    m.def(
        "net_rates",
        [](const Scenario &s, double rho_b, double rho_o) {
            const Link link = link_of(s);
            py::dict d;
            d["net_b"] = jbb_prime_net_b(link, rho_b, rho_o);
            d["net_o"] = jbb_prime_net_o(link, rho_b, rho_o, ORateKind::Exact);
            d["net_o_bound"] = jbb_prime_net_o(link, rho_b, rho_o, ORateKind::Bound);
            return d;
        },
        py::arg("scenario"), py::arg("rho_b"), py::arg("rho_o"),
        "Net JBB' rates at linear powers (rho_b, rho_o).");

    m.def(
        "optimize_epsilon",
        [](const Scenario &s, double rho_b, double rho_o) {
            const OAMatch o = optimize_epsilon(link_of(s), {rho_b, rho_o, Scheme::JBBPrime});
            py::dict d;
            d["feasible"] = o.feasible;
            d["epsilon"] = o.epsilon;
            d["rho_b_oa"] = o.rho_b_oa;
            d["rho_o_oa"] = o.rho_o_oa;
            d["o_rate"] = o.o_rate;
            return d;
        },
        py::arg("scenario"), py::arg("rho_b"), py::arg("rho_o"));

    m.def(
        "operating_points",
        [](const Scenario &s, unsigned threads) {
            if (!s.targets)
                throw ValidationError("targets", "is required");
            OperatingPoints p;
            {
                py::gil_scoped_release release;
                p = analyze_operating_points(link_of(s), s.targets->net_b, s.targets->net_o,
                                             ratio_grid(s.grid.ratio_lo_db, s.grid.ratio_hi_db, s.grid.points),
                                             threads);
            }
            py::dict d;
            d["jbb_prime"] = intersection_dict(p.jbb_prime);
            d["oa"] = intersection_dict(p.oa);
            d["epsilon"] = p.oa_match ? py::cast(p.oa_match->epsilon) : py::none();
            d["saving_db"] = p.saving_db ? py::cast(*p.saving_db) : py::none();
            return d;
        },
        py::arg("scenario"), py::arg("threads") = 0);

    m.def(
        "drop_study",
        [](const Scenario &s, unsigned threads) {
            DropStudy st;
            {
                py::gil_scoped_release release;
                st = drop_study(s, threads);
            }
            py::dict d;
            d["saving_db"] = st.saving_db;
            d["epsilon"] = st.epsilon;
            d["missing"] = st.missing;
            d["median_saving_db"] = st.median_saving_db;
            d["median_epsilon"] = st.median_epsilon;
            return d;
        },
        py::arg("scenario"), py::arg("threads") = 0);

    m.def(
        "sample_o_rate",
        [](const Scenario &s, double rho_o, double rho_b_eff, std::size_t n, std::uint64_t seed, unsigned threads) {
            MeanEstimate e;
            {
                py::gil_scoped_release release;
                e = sample_o_rate(s.system, s.beta_o(), rho_o, rho_b_eff, n, CounterRng(seed), threads);
            }
            return py::make_tuple(e.mean, e.std_error);
        },
        py::arg("scenario"), py::arg("rho_o"), py::arg("rho_b_eff"), py::arg("n_draws"), py::arg("seed") = 1,
        py::arg("threads") = 0, "Monte Carlo O-terminal rate (mean, standard error).");

    m.def(
        "o_rate_exact",
        [](const Scenario &s, double rho_o, double rho_b_eff) {
            return o_rate_exact(s.system, s.beta_o(), rho_o, rho_b_eff);
        },
        py::arg("scenario"), py::arg("rho_o"), py::arg("rho_b_eff"));

    auto command = [&m](const char *name, CommandResult (*fn)(const Scenario &, const RunContext &)) {
        m.def(
            name,
            [fn](const Scenario &s, std::optional<std::uint64_t> seed, unsigned threads) {
                CommandResult r;
                {
                    py::gil_scoped_release release;
                    r = fn(s, RunContext{seed.value_or(s.mc.seed), threads});
                }
                return result_dict(r);
            },
            py::arg("scenario"), py::arg("seed") = py::none(), py::arg("threads") = 0);
    };
    command("rates", &cmd_rates);
    command("curves", &cmd_curves);
    command("verify", &cmd_verify);
    command("sweep", &cmd_sweep);

    m.def(
        "table1",
        [](const std::vector<Scenario> &s, std::uint64_t seed, unsigned threads) {
            CommandResult r;
            {
                py::gil_scoped_release release;
                r = cmd_table1(s, RunContext{seed, threads});
            }
            return result_dict(r);
        },
        py::arg("scenarios"), py::arg("seed") = 1, py::arg("threads") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string> &args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs jbbctl in-process; returns (exit_code, stdout, stderr).");
}
