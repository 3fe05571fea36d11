#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "hrv/config.hpp"
#include "hrv/io.hpp"
#include "hrv/levelset.hpp"
#include "hrv/mc.hpp"
#include "hrv/mgf.hpp"
#include "hrv/tails.hpp"

namespace py = pybind11;
using nlohmann::ordered_json;

namespace {

hrv::ModelSpec model_from_text(const std::string& config_json) {
    const hrv::AppConfig cfg = hrv::parse_config_text(config_json);
    if (!cfg.model) throw hrv::ConfigError("config does not declare a model");
    return *cfg.model;
}

py::dict tail_indices_dict(const hrv::TailIndices& ti) {
    py::dict d;
    d["alpha"] = py::make_tuple(ti.alpha[0], ti.alpha[1]);
    py::list solvers;
    for (const auto& s : ti.solver) {
        py::dict sd;
        sd["method"] = s.method;
        sd["iterations"] = s.iterations;
        sd["residual"] = s.residual;
        solvers.append(sd);
    }
    d["solver"] = solvers;
    return d;
}

py::dict estimate_dict(const hrv::Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["stderr"] = e.stderr;
    d["n"] = e.n;
    d["zero_hits"] = e.zero_hits;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hidden-regular-variation toolkit for diagonal stochastic recursions";
    m.attr("__version__") = hrv::kToolkitVersion;

    py::register_exception<hrv::ConfigError>(m, "ConfigError");
    py::register_exception<hrv::NoRootError>(m, "NoRootError");
    py::register_exception<hrv::NotFoundError>(m, "NotFoundError");

    m.def("solve_tail_indices", [](const std::string& config, double tol) {
        return tail_indices_dict(hrv::solve_tail_indices(model_from_text(config), tol));
    }, py::arg("config"), py::arg("tol") = 1e-10);

    m.def("phi", [](const std::string& config, double xi1, double xi2) {
        const hrv::ModelSpec spec = model_from_text(config);
        const hrv::TailIndices ti = hrv::solve_tail_indices(spec, 1e-10);
        const hrv::MgfEvaluator ev(spec, ti, hrv::default_deterministic_backend(spec));
        return ev.phi({xi1, xi2}).value;
    }, py::arg("config"), py::arg("xi1"), py::arg("xi2"));

    m.def("grad_phi", [](const std::string& config, double xi1, double xi2) {
        const hrv::ModelSpec spec = model_from_text(config);
        const hrv::TailIndices ti = hrv::solve_tail_indices(spec, 1e-10);
        const hrv::MgfEvaluator ev(spec, ti, hrv::default_deterministic_backend(spec));
        const hrv::Vec2 g = ev.grad_phi({xi1, xi2});
        return py::make_tuple(g[0], g[1]);
    }, py::arg("config"), py::arg("xi1"), py::arg("xi2"));

    m.def("analyze", [](const std::string& config) {
        const hrv::ModelSpec spec = model_from_text(config);
        const hrv::TailIndices ti = hrv::solve_tail_indices(spec, 1e-10);
        const hrv::MgfEvaluator ev(spec, ti, hrv::default_deterministic_backend(spec));
        const hrv::CriticalPoint cp = hrv::find_xi_star(ev, 1e-10);
        py::dict d;
        d["alpha"] = py::make_tuple(ti.alpha[0], ti.alpha[1]);
        d["xi_star"] = py::make_tuple(cp.xi_star[0], cp.xi_star[1]);
        d["h"] = cp.h;
        d["grad_phi"] = py::make_tuple(cp.grad[0], cp.grad[1]);
        d["certified"] = cp.certified.all();
        return d;
    }, py::arg("config"));

    m.def("check_assumptions", [](const std::string& config, std::uint64_t seed) {
        hrv::AssumptionOptions opts;
        opts.seed = seed;
        const hrv::AssumptionReport rep = hrv::check_assumptions(model_from_text(config), opts);
        py::list out;
        for (const auto& e : rep.entries) {
            py::dict d;
            d["id"] = e.id;
            d["status"] = hrv::check_status_name(e.status);
            d["note"] = e.note;
            py::dict ev;
            for (const auto& [k, v] : e.evidence) ev[py::str(k)] = v;
            d["evidence"] = ev;
            out.append(d);
        }
        return out;
    }, py::arg("config"), py::arg("seed") = 0x5eedULL);

    m.def("simulate", [](const std::string& config, std::int64_t n, py::object seed,
                         std::int64_t burn_in, int workers) {
        const hrv::AppConfig cfg = hrv::parse_config_text(config);
        if (!cfg.model) throw hrv::ConfigError("config does not declare a model");
        hrv::SimulationConfig sim;
        sim.n_samples = n;
        sim.seed = seed.is_none() ? cfg.seed : seed.cast<std::uint64_t>();
        sim.burn_in = burn_in;
        sim.workers = workers;
        const hrv::TailIndices ti = hrv::solve_tail_indices(*cfg.model, 1e-10);
        const hrv::SampleBatch batch = hrv::simulate_stationary(*cfg.model, ti, sim);
        py::array_t<double> out({static_cast<py::ssize_t>(batch.size()),
                                 static_cast<py::ssize_t>(batch.dim())});
        std::memcpy(out.mutable_data(), batch.data().data(),
                    batch.data().size() * sizeof(double));
        return out;
    }, py::arg("config"), py::arg("n"), py::arg("seed") = py::none(),
       py::arg("burn_in") = 10000, py::arg("workers") = 1);

    m.def("joint_exceedance", [](const std::string& config, double t, double eps,
                                 std::uint64_t paths, py::object seed) {
        const hrv::AppConfig cfg = hrv::parse_config_text(config);
        if (!cfg.model) throw hrv::ConfigError("config does not declare a model");
        const hrv::TailIndices ti = hrv::solve_tail_indices(*cfg.model, 1e-10);
        const hrv::MgfEvaluator ev(*cfg.model, ti,
                                   hrv::default_deterministic_backend(*cfg.model));
        const hrv::CriticalPoint cp = hrv::find_xi_star(ev, 1e-10);
        hrv::ExceedanceOptions opts;
        opts.n_paths = paths;
        opts.seed = seed.is_none() ? cfg.seed : seed.cast<std::uint64_t>();
        const hrv::JointExceedanceResult res =
            hrv::joint_exceedance_prob(*cfg.model, ti, ev, cp.xi_star, t, eps, opts);
        py::dict d;
        d["xi_star"] = py::make_tuple(cp.xi_star[0], cp.xi_star[1]);
        d["importance"] = estimate_dict(res.importance);
        if (res.crude) d["crude"] = estimate_dict(*res.crude);
        d["rho"] = res.rho;
        d["step_cap"] = res.step_cap;
        return d;
    }, py::arg("config"), py::arg("t"), py::arg("eps") = 1.0, py::arg("paths") = 100000,
       py::arg("seed") = py::none());
}
