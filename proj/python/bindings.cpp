#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "boxpolicy/bnp.hpp"
#include "boxpolicy/errors.hpp"
#include "boxpolicy/eval.hpp"
#include "boxpolicy/nuisance.hpp"
#include "boxpolicy/policy_io.hpp"
#include "boxpolicy/render.hpp"
#include "boxpolicy/scores.hpp"
#include "boxpolicy/simgen.hpp"

namespace py = pybind11;
using namespace boxpolicy;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<int, py::array::c_style | py::array::forcecast>;

Dataset dataset_from_arrays(const Matrix& x, const Labels& t, const Matrix& y) {
  if (x.ndim() != 2) throw PreconditionError("x must be a 2-D array");
  const auto n = static_cast<std::size_t>(x.shape(0));
  const auto d = static_cast<std::size_t>(x.shape(1));
  if (static_cast<std::size_t>(t.size()) != n || static_cast<std::size_t>(y.size()) != n) {
    throw PreconditionError("x, t and y need the same number of rows");
  }
  auto xv = x.unchecked<2>();
  const int* tv = t.data();
  const double* yv = y.data();
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].x.resize(d);
    for (std::size_t k = 0; k < d; ++k) samples[i].x[k] = xv(i, k);
    samples[i].t = treatment_from_int(tv[i]);
    samples[i].y = yv[i];
  }
  return Dataset(std::move(samples), d);
}

py::array_t<double> covariates(const Dataset& data) {
  py::array_t<double> out({data.n(), data.d()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t k = 0; k < data.d(); ++k) v(i, k) = data[i].x[k];
  }
  return out;
}

ScoreVector scores_for(const Dataset& data, const std::string& method, const std::string& nuisance, bool scale) {
  auto s = compute_scores(data, make_nuisance(nuisance, data), parse_score_method(method));
  return scale ? scale_scores(s) : s;
}

PolicyDocument document_for(const FitResult& r, const Dataset& data, const BnPConfig& cfg, const std::string& method,
                            const std::string& nuisance, bool scale) {
  PolicyDocument doc;
  doc.d = data.d();
  doc.method = method;
  doc.m_max = cfg.m_max;
  doc.omega = cfg.omega;
  doc.flipped = r.policy.flipped;
  doc.objective = r.objective;
  doc.boxes = r.policy.boxes;
  doc.nuisance = nuisance;
  doc.scale_psi = scale;
  if (data.n() > 0) doc.observed = bounding_box(data);
  return doc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interpretable box-union treatment policies by branch and price";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

  py::class_<Hyperbox>(m, "Hyperbox")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("lower"), py::arg("upper"))
      .def_property_readonly("lower", &Hyperbox::lower)
      .def_property_readonly("upper", &Hyperbox::upper)
      .def_property_readonly("d", &Hyperbox::d)
      .def("contains", [](const Hyperbox& b, const std::vector<double>& x) { return b.contains(x); })
      .def("volume", &Hyperbox::volume)
      .def("__eq__", [](const Hyperbox& a, const Hyperbox& b) { return a == b; })
      .def("__repr__", [](const Hyperbox& b) {
        return "Hyperbox(" + py::repr(py::cast(b.lower())).cast<std::string>() + ", " +
               py::repr(py::cast(b.upper())).cast<std::string>() + ")";
      });

  py::class_<Policy>(m, "Policy")
      .def(py::init([](std::vector<Hyperbox> boxes, std::size_t d, bool flipped) {
             return Policy{std::move(boxes), flipped, d};
           }),
           py::arg("boxes"), py::arg("d"), py::arg("flipped") = false)
      .def_readwrite("boxes", &Policy::boxes)
      .def_readwrite("flipped", &Policy::flipped)
      .def_readwrite("d", &Policy::d)
      .def("decide", [](const Policy& p, const std::vector<double>& x) { return as_int(policy_decide(p, x)); },
           "Treatment (+1 or -1) assigned to one point")
      .def("decide_many", [](const Policy& p, const Matrix& x) {
        auto v = x.unchecked<2>();
        py::array_t<int> out(x.shape(0));
        auto o = out.mutable_unchecked<1>();
        std::vector<double> row(static_cast<std::size_t>(x.shape(1)));
        for (py::ssize_t i = 0; i < x.shape(0); ++i) {
          for (py::ssize_t k = 0; k < x.shape(1); ++k) row[static_cast<std::size_t>(k)] = v(i, k);
          o(i) = as_int(policy_decide(p, row));
        }
        return out;
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("x"), py::arg("t"), py::arg("y"))
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d)
      .def_property_readonly("x", &covariates)
      .def_property_readonly("t", [](const Dataset& data) {
        std::vector<int> t;
        for (const auto& s : data) t.push_back(as_int(s.t));
        return t;
      })
      .def_property_readonly("y", [](const Dataset& data) {
        std::vector<double> y;
        for (const auto& s : data) y.push_back(s.y);
        return y;
      })
      .def("to_csv", [](const Dataset& data) { return to_csv(data); });

  m.def("parse_csv", &parse_csv, py::arg("text"), py::arg("zero_one_labels") = false);
  m.def("load_csv", [](const std::string& path, bool zero_one) { return load_csv(path, zero_one); }, py::arg("path"),
        py::arg("zero_one_labels") = false);
  m.def("simulate", [](const std::string& scenario, std::size_t n, std::uint64_t seed) {
        return generate(Scenario::parse(scenario), n, seed);
      },
        py::arg("scenario"), py::arg("n"), py::arg("seed"));

  py::class_<ScoreVector>(m, "ScoreVector")
      .def_readonly("psi", &ScoreVector::psi)
      .def_readonly("kept", &ScoreVector::kept)
      .def_readonly("dropped", &ScoreVector::dropped);
  m.def("compute_scores", &scores_for, py::arg("dataset"), py::arg("method") = "dr",
        py::arg("nuisance") = "kernel+logistic", py::arg("scale_psi") = false);
  m.def("scores_from_values", [](std::vector<double> psi) { return scores_from_values(std::move(psi)); },
        py::arg("psi"));

  py::class_<BnPConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("m_max", &BnPConfig::m_max)
      .def_readwrite("omega", &BnPConfig::omega)
      .def_readwrite("max_nodes", &BnPConfig::max_nodes)
      .def_readwrite("pricing_time_limit", &BnPConfig::pricing_time_limit)
      .def_readwrite("cg_max_rounds", &BnPConfig::cg_max_rounds)
      .def_readwrite("tol", &BnPConfig::tol)
      .def_readwrite("flip", &BnPConfig::flip)
      .def_readwrite("milp_time_limit", &BnPConfig::milp_time_limit)
      .def_readwrite("time_limit", &BnPConfig::time_limit)
      .def_readwrite("warm_start", &BnPConfig::warm_start);

  py::class_<NodeRecord>(m, "NodeRecord")
      .def_readonly("node", &NodeRecord::node)
      .def_readonly("relaxed", &NodeRecord::relaxed)
      .def_readonly("incumbent", &NodeRecord::incumbent)
      .def_readonly("columns_added", &NodeRecord::columns_added);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("policy", &FitResult::policy)
      .def_readonly("has_incumbent", &FitResult::has_incumbent)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("penalized_objective", &FitResult::penalized_objective)
      .def_readonly("relaxation_bound", &FitResult::relaxation_bound)
      .def_readonly("nodes_explored", &FitResult::nodes_explored)
      .def_readonly("columns_generated", &FitResult::columns_generated)
      .def_readonly("certified", &FitResult::certified)
      .def_readonly("progress", &FitResult::progress)
      .def_property_readonly("status", [](const FitResult& r) { return std::string(to_string(r.status)); });

  m.def("fit", [](const Dataset& data, const ScoreVector& scores, const BnPConfig& cfg) {
        py::gil_scoped_release release;
        return fit(data, scores, cfg);
      },
        py::arg("dataset"), py::arg("scores"), py::arg("config"));

  m.def("policy_json", [](const FitResult& r, const Dataset& data, const BnPConfig& cfg, const std::string& method,
                          const std::string& nuisance, bool scale) {
        return to_json(document_for(r, data, cfg, method, nuisance, scale));
      },
        py::arg("result"), py::arg("dataset"), py::arg("config"), py::arg("method") = "dr",
        py::arg("nuisance") = "kernel+logistic", py::arg("scale_psi") = false,
        "Policy document JSON for a fit, as the command-line tool writes it");
  m.def("render_text", [](const std::string& json) { return render_text(parse_policy_json(json)); },
        py::arg("policy_json"));
  m.def("render_dot", [](const std::string& json) { return render_dot(parse_policy_json(json)); },
        py::arg("policy_json"));
  m.def("load_policy", [](const std::string& json) { return parse_policy_json(json).policy(); },
        py::arg("policy_json"));

  m.def("empirical_objective", &empirical_objective, py::arg("policy"), py::arg("dataset"), py::arg("scores"));
  m.def("policy_value", [](const Policy& p, const std::string& scenario, std::size_t n_mc, std::uint64_t seed) {
        const auto r = policy_value_mc(p, Scenario::parse(scenario), n_mc, seed);
        return py::make_tuple(r.value, r.std_error);
      },
        py::arg("policy"), py::arg("scenario"), py::arg("n_mc"), py::arg("seed"),
        "Monte Carlo policy value and its standard error");
  m.def("regret", [](const Policy& p, const std::string& scenario, std::size_t n_mc, std::uint64_t seed) {
        const auto r = regret(p, Scenario::parse(scenario), n_mc, seed);
        return py::make_tuple(r.value, r.std_error);
      },
        py::arg("policy"), py::arg("scenario"), py::arg("n_mc"), py::arg("seed"),
        "Regret against the scenario's optimal decision, with its standard error");
  m.def("rademacher_bound", &rademacher_bound, py::arg("m_max"));
  m.def("exhaustive_objective", [](const Dataset& data, const ScoreVector& scores, std::size_t m_max, double omega) {
        return exhaustive_search(PolicyInstance::build(data, scores), m_max, omega).objective;
      },
        py::arg("dataset"), py::arg("scores"), py::arg("m_max"), py::arg("omega") = 0.0,
        "Exhaustive minimum over spanned boxes (at most 14 retained samples)");
}
