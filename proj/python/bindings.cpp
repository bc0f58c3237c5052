#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mecq/action_space.hpp"
#include "mecq/harness.hpp"
#include "mecq/oracle.hpp"
#include "mecq/task_model.hpp"
#include "mecq/validation.hpp"

namespace py = pybind11;
using namespace mecq;

namespace {

RunConfig make_config(const py::dict& overrides, bool desk) {
  RunConfig cfg = desk ? RunConfig::desk() : RunConfig{};
  for (const auto& [k, v] : overrides) cfg.set(py::str(k), py::str(v));
  cfg.validate();
  return cfg;
}

py::int_ to_py(Count c) { return py::int_(py::str(to_string(c))); }

py::list rows_to_py(const std::vector<CheckRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["scenario_id"] = r.scenario_id;
    d["equation"] = r.equation;
    d["formula"] = r.formula;
    d["direct"] = r.direct;
    d["rel_error"] = r.rel_error;
    out.append(d);
  }
  return out;
}

py::dict report_to_py(const DelayReport& r) {
  py::dict d;
  d["per_user_delay"] = r.per_user_delay;
  d["max_delay"] = r.max_delay;
  d["argmax_user"] = r.argmax_user;
  d["mu"] = r.mu;
  d["serving_bs"] = r.serving_bs;
  return d;
}

}  // namespace

PYBIND11_MODULE(mecq, m) {
  m.doc() = "Multi-cell MEC resource allocation: delay model, action spaces and Q-learning agents";

  py::enum_<TaskType>(m, "TaskType")
      .value("Edge", TaskType::Edge)
      .value("Local", TaskType::Local)
      .value("Collaborative", TaskType::Collaborative);

  py::class_<NetworkScenario>(m, "Scenario")
      .def_readonly("n_bs", &NetworkScenario::n_bs)
      .def_readonly("n_users", &NetworkScenario::n_users)
      .def_readonly("n_ul", &NetworkScenario::n_ul)
      .def_readonly("n_dl", &NetworkScenario::n_dl)
      .def_readonly("n_power_levels", &NetworkScenario::n_power_levels)
      .def_readonly("task_bits", &NetworkScenario::task_bits)
      .def_readonly("task_type", &NetworkScenario::task_type)
      .def_readonly("ul_gain", &NetworkScenario::ul_gain)
      .def_readonly("dl_gain", &NetworkScenario::dl_gain)
      .def_readonly("cycles_per_bit_mec", &NetworkScenario::cycles_per_bit_mec)
      .def("to_text", [](const NetworkScenario& s) {
        std::ostringstream os;
        save_scenario(os, s);
        return os.str();
      })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream is(text);
        return load_scenario(is);
      });

  m.def(
      "config_text", [](const py::dict& overrides, bool desk) { return make_config(overrides, desk).to_text(); },
      py::arg("overrides") = py::dict(), py::arg("desk") = true, "Resolved configuration as key = value text.");

  m.def(
      "generate_scenario",
      [](std::uint64_t seed, const py::dict& overrides, bool desk) {
        return generate_scenario(make_config(overrides, desk), seed);
      },
      py::arg("seed"), py::arg("overrides") = py::dict(), py::arg("desk") = true);

  m.def(
      "evaluate_idle", [](const NetworkScenario& s) { return report_to_py(evaluate(s, GlobalAllocation::idle(s))); },
      "Delays when no BS allocates anything.");

  m.def(
      "action_count",
      [](int users, int n_ul, int n_dl, int levels) { return to_py(theorem3_total(ActionDims{users, n_ul, n_dl, levels})); },
      py::arg("users"), py::arg("n_ul"), py::arg("n_dl"), py::arg("levels"));

  m.def(
      "enumerate_count",
      [](const NetworkScenario& s, int bs) { return enumerate_actions(s, bs).size(); }, py::arg("scenario"),
      py::arg("bs") = 0);

  m.def(
      "solve_exhaustive",
      [](const NetworkScenario& s, int threads) {
        OracleOptions o;
        o.threads = threads;
        OracleResult r;
        {
          py::gil_scoped_release release;
          r = solve_exhaustive(s, o);
        }
        py::dict d;
        d["best_max_delay"] = r.best_max_delay;
        d["best_ids"] = r.best_ids;
        d["evaluated"] = r.evaluated_count;
        d["skipped"] = r.skipped_count;
        d["report"] = report_to_py(evaluate(s, r.best_allocation));
        return d;
      },
      py::arg("scenario"), py::arg("threads") = 0);

  m.def(
      "run",
      [](const std::string& algo, std::uint64_t seed, const py::dict& overrides, bool trace) {
        const RunConfig cfg = make_config(overrides, true);
        const Algo a = algo_from_string(algo);
        RunMetrics r;
        {
          py::gil_scoped_release release;
          r = run_seed(cfg, a, seed, trace);
        }
        py::dict d;
        d["algo"] = std::string(to_string(r.algo));
        d["seed"] = r.seed;
        d["iterations"] = r.iterations;
        d["iterations_to_converge"] = r.iterations_to_converge;
        d["final_t_max"] = r.final_t_max;
        d["best_t_max"] = r.best_t_max;
        d["final_mu"] = r.final_mu;
        d["reference_delay"] = r.reference_delay;
        if (trace) {
          d["t_max"] = r.t_max;
          d["reward"] = r.reward;
        }
        return d;
      },
      py::arg("algo") = "multistack", py::arg("seed") = 1, py::arg("overrides") = py::dict(),
      py::arg("trace") = false, "One training run on generate_scenario(config, seed).");

  m.def(
      "verify_split",
      [](int count, std::uint64_t seed) { return rows_to_py(verify_split(RunConfig{}, count, seed)); },
      py::arg("count") = 10, py::arg("seed") = 1);

  m.def(
      "verify_gains",
      [](int count, std::uint64_t seed, double omega) {
        RunConfig cfg;
        if (omega > 0) cfg.omega_min = cfg.omega_max = omega;
        return rows_to_py(verify_gains(cfg, count, seed));
      },
      py::arg("count") = 10, py::arg("seed") = 1, py::arg("omega") = 0.0);

  m.def(
      "verify_counts", [](int users, int subcarriers, int levels) { return rows_to_py(verify_counts(users, subcarriers, levels)); },
      py::arg("users") = 2, py::arg("subcarriers") = 2, py::arg("levels") = 2);

  m.def(
      "algorithms",
      [] {
        std::vector<std::string> out;
        for (Algo a : all_algos()) out.emplace_back(to_string(a));
        return out;
      });
}
