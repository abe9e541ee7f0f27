#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mpe/harness.hpp"
#include "mpe/models.hpp"
#include "mpe/order_verify.hpp"
#include "mpe/scheme.hpp"

namespace py = pybind11;
using namespace mpe;

namespace {

Precision parse_precision(const std::string& p) {
  if (p == "double") return Precision::Double;
  if (p == "extended") return Precision::Extended;
  throw std::invalid_argument("precision must be double or extended");
}

// Field -> ndarray of shape (components, n, n); real or complex by kind.
py::object to_array(const Field& f) {
  const auto n = static_cast<py::ssize_t>(f.grid().n());
  const auto c = static_cast<py::ssize_t>(f.components());
  const std::vector<py::ssize_t> shape = {c, n, n};
  if (f.kind() == ScalarKind::Real) {
    py::array_t<double> out(shape);
    double* p = out.mutable_data();
    for (std::size_t k = 0; k < f.size(); ++k) p[k] = f[k].real();
    return out;
  }
  py::array_t<std::complex<double>> out(shape);
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

std::string run_json(const std::string& config, py::object* state) {
  const RunConfig c = run_config_from_json(nlohmann::json::parse(config));
  RunRecord r;
  {
    py::gil_scoped_release release;
    r = run(c);
  }
  *state = to_array(r.final_state);
  return to_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_mpesplit, m) {
  m.doc() = "Multi-product expansion operator splitting core";

  m.def("catalog_names", [] {
    std::vector<std::string> out;
    for (auto s : catalog_names()) out.emplace_back(s);
    return out;
  });
  m.def("scheme_json", [](const std::string& name) {
    const auto s = resolve_scheme(name);
    auto j = to_json(s);
    const auto st = scheme_stats(s);
    j["sum_c_abs"] = to_string(st.sum_c_abs);
    j["b_max"] = to_string(st.b_max);
    return j.dump();
  }, py::arg("name"));
  m.def("richardson_weights", [](const std::vector<int>& gammas) {
    std::vector<std::string> out;
    for (const auto& w : richardson_weights(gammas)) out.push_back(to_string(w));
    return out;
  }, py::arg("gammas"));

  m.def("verify_conditions", [](const std::string& name, int up_to) {
    py::list out;
    for (const auto& r : verify_conditions(resolve_scheme(name), up_to)) {
      py::dict d;
      d["level"] = r.order_level;
      d["condition"] = r.condition_id;
      d["lhs"] = to_string(r.lhs);
      d["rhs"] = to_string(r.rhs);
      d["satisfied"] = r.satisfied;
      out.append(d);
    }
    return out;
  }, py::arg("name"), py::arg("up_to") = 3);
  m.def("order_report", [](const std::string& name, double tau_max, double tau_min, int count,
                           const std::string& precision, std::uint64_t seed, int dim) {
    const auto oracle = make_matrix_oracle(seed, dim);
    const auto ladder = geometric_ladder(tau_max, tau_min, count);
    py::gil_scoped_release release;
    return order_report(resolve_scheme(name), oracle, ladder, parse_precision(precision)).dump();
  }, py::arg("name"), py::arg("tau_max") = 5e-2, py::arg("tau_min") = 3e-3,
        py::arg("count") = 8, py::arg("precision") = "extended", py::arg("seed") = 42,
        py::arg("dim") = 6);

  m.def("model_names", [] {
    std::vector<std::string> out;
    for (auto s : model_names()) out.emplace_back(s);
    return out;
  });
  m.def("model_json", [](const std::string& name) { return to_json(default_model(name)).dump(); },
        py::arg("name"));
  m.def("initial_condition", [](const std::string& config) {
    const RunConfig c = run_config_from_json(nlohmann::json::parse(config));
    const ModelSpec spec = resolve_model(c);
    return to_array(initial_condition(spec, make_model_grid(spec)));
  }, py::arg("config"));

  m.def("preset_names", [] {
    std::vector<std::string> out;
    for (auto s : preset_names()) out.emplace_back(s);
    return out;
  });
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); },
        py::arg("name"));

  m.def("adaptive_tau", [](double tau_min, double tau_max, double alpha, double e_prime) {
    return adaptive_tau(StepController(tau_min, tau_max, alpha), e_prime);
  }, py::arg("tau_min"), py::arg("tau_max"), py::arg("alpha"), py::arg("e_prime"));

  m.def("run", [](const std::string& config) {
    py::object state;
    std::string rec = run_json(config, &state);
    return py::make_tuple(rec, state);
  }, py::arg("config"));

  m.def("converge", [](const std::string& config, const std::vector<double>& ladder,
                       const std::vector<int>& random_counts, bool exact,
                       const std::string& ref_scheme, double ref_tau) {
    const RunConfig c = run_config_from_json(nlohmann::json::parse(config));
    py::gil_scoped_release release;
    const Field ref = reference_solution(c, exact, ref_scheme, ref_tau);
    const auto rep = random_counts.empty() ? convergence_study(c, ladder, ref)
                                           : convergence_study_random(c, random_counts, ref);
    return to_json(rep).dump();
  }, py::arg("config"), py::arg("ladder") = std::vector<double>{},
        py::arg("random_counts") = std::vector<int>{}, py::arg("exact") = false,
        py::arg("ref_scheme") = "s6", py::arg("ref_tau") = 1.0 / 200);
}
