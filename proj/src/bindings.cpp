#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "binode/experiment.hpp"
#include "binode/model.hpp"
#include "binode/odeint.hpp"
#include "binode/ratelaws.hpp"
#include "binode/refmodels.hpp"
#include "binode/serialize.hpp"
#include "binode/training.hpp"

namespace py = pybind11;
using namespace binode;

namespace {

RateLaw make_law_py(const std::string& id, const std::map<std::string, double>& params,
                    int arity) {
    return make_rate_law(rate_law_id_from_string(id), params, arity);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "stoichiometric neural-ODE models with per-process networks";

    py::register_exception<ConfigError>(m, "BinodeConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::enum_<Activation>(m, "Activation")
        .value("elu", Activation::elu)
        .value("relu", Activation::relu);
    py::enum_<OutputActivation>(m, "OutputActivation")
        .value("softplus", OutputActivation::softplus)
        .value("relu", OutputActivation::relu)
        .value("identity", OutputActivation::identity);

    py::class_<NnpSpec>(m, "NnpSpec")
        .def(py::init<>())
        .def_readwrite("input_mask", &NnpSpec::input_mask)
        .def_readwrite("hidden_layers", &NnpSpec::hidden_layers)
        .def_readwrite("hidden_width", &NnpSpec::hidden_width)
        .def_readwrite("hidden_activation", &NnpSpec::hidden_activation)
        .def_readwrite("output_activation", &NnpSpec::output_activation)
        .def_readwrite("monotone_constraint", &NnpSpec::monotone_constraint)
        .def_readwrite("input_scale", &NnpSpec::input_scale)
        .def("input_dim", &NnpSpec::input_dim);

    py::class_<Nnp>(m, "Nnp")
        .def_readonly("spec", &Nnp::spec)
        .def_readonly("seed", &Nnp::seed)
        .def_readwrite("output_scale", &Nnp::output_scale)
        .def("forward",
             [](const Nnp& n, const std::vector<double>& x) { return forward(n, x); })
        .def("parameters", &collect_nnp_parameters)
        .def("input_gradient", [](const Nnp& n, const std::vector<double>& x) {
            return nnp_input_gradient(n, x);
        });

    m.def("init_nnp", &init_nnp, py::arg("spec"), py::arg("seed") = 0);
    m.def("nnp_to_json", &nnp_to_json);
    m.def("nnp_from_json", &nnp_from_json);

    py::class_<StoichiometricLayer>(m, "StoichiometricLayer")
        .def_readonly("rows", &StoichiometricLayer::rows)
        .def_readonly("cols", &StoichiometricLayer::cols)
        .def("effective", &StoichiometricLayer::effective)
        .def("structural", &StoichiometricLayer::structural)
        .def("raw", &StoichiometricLayer::raw_at)
        .def("set_raw", &StoichiometricLayer::set_raw);

    py::class_<BinodeModel>(m, "BinodeModel")
        .def_readonly("n", &BinodeModel::n)
        .def_readonly("state_names", &BinodeModel::state_names)
        .def_readonly("state_units", &BinodeModel::state_units)
        .def_readwrite("stoich", &BinodeModel::stoich)
        .def_property_readonly("processes",
                               [](const BinodeModel& m) { return m.processes; })
        .def("k", &BinodeModel::k)
        .def("vector_field",
             [](const BinodeModel& m, const std::vector<double>& x, double t) {
                 return vector_field(m, x, t);
             },
             py::arg("state"), py::arg("t") = 0.0);

    m.def("build_monod_binode", &build_monod_binode, py::arg("seed") = 0);
    m.def("build_lv_binode", &build_lv_binode, py::arg("seed") = 0);
    m.def("build_pk_binode", &build_pk_binode, py::arg("seed") = 0);
    m.def("build_ultradian_binode", &build_ultradian_binode, py::arg("seed") = 0);
    m.def("build_ssystem_binode", &build_ssystem_binode, py::arg("n"),
          py::arg("seed") = 0);
    m.def("model_to_json", &model_to_json);
    m.def("model_from_json", &model_from_json);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("names", &Trajectory::names)
        .def_readonly("units", &Trajectory::units);

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<>())
        .def_readwrite("dt", &IntegratorConfig::dt);

    m.def("integrate_model",
          [](const BinodeModel& model, const std::vector<double>& x0, double t0,
             double t1, double dt) {
              IntegratorConfig cfg;
              cfg.dt = dt;
              return integrate(model, x0, t0, t1, cfg);
          },
          py::arg("model"), py::arg("x0"), py::arg("t0"), py::arg("t1"),
          py::arg("dt") = 0.05);
    m.def("simulate_reference",
          [](const std::string& system) {
              return simulate_reference(system_id_from_string(system));
          },
          py::arg("system"));
    m.def("generate_training_set", [](const std::string& system) {
        return generate_training_set(system_id_from_string(system));
    });

    py::class_<RateLaw>(m, "RateLaw")
        .def_readonly("arity", &RateLaw::arity)
        .def_readonly("params", &RateLaw::params)
        .def("__call__", [](const RateLaw& law, const std::vector<double>& x) {
            return eval(law, x);
        });
    m.def("make_rate_law", &make_law_py, py::arg("id"), py::arg("params"),
          py::arg("arity"));
    m.def("power_law",
          [](double alpha, const std::vector<double>& orders,
             const std::vector<double>& inputs) {
              return power_law(alpha, orders, inputs);
          });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("inputs", &Dataset::inputs)
        .def_readonly("targets", &Dataset::targets);
    m.def("sample_dataset",
          [](const RateLaw& law, const std::vector<double>& lo,
             const std::vector<double>& hi, int count, std::uint64_t seed) {
              return sample_dataset(law, DomainBox{lo, hi}, count, seed);
          },
          py::arg("law"), py::arg("lo"), py::arg("hi"), py::arg("count"),
          py::arg("seed") = 0);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("horizon", &TrainConfig::horizon)
        .def_readwrite("dt", &TrainConfig::dt)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("batch_schedule", &TrainConfig::batch_schedule);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("loss_history", &TrainResult::loss_history)
        .def_readonly("best_loss", &TrainResult::best_loss)
        .def_readonly("best_epoch", &TrainResult::best_epoch)
        .def_readonly("diverged", &TrainResult::diverged);
    m.def("train",
          [](const BinodeModel& model, const std::vector<Trajectory>& data,
             const TrainConfig& cfg) { return train(model, data, cfg); },
          py::arg("model"), py::arg("data"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("model", &FitResult::model)
        .def_readonly("best_loss", &FitResult::best_loss)
        .def_readonly("best_iteration", &FitResult::best_iteration)
        .def_readonly("history", &FitResult::history);
    m.def("fit_surface",
          [](const Nnp& start, const Dataset& data, const TrainConfig& cfg) {
              return fit_surface(start, data, cfg);
          },
          py::call_guard<py::gil_scoped_release>());

    m.def("rollout_loss",
          [](const BinodeModel& model, const std::vector<Segment>& segs, double dt,
             int steps) { return rollout_loss(model, segs, dt, steps); },
          py::arg("model"), py::arg("segments"), py::arg("dt"),
          py::arg("steps_per_obs") = 1);
    py::class_<Segment>(m, "Segment")
        .def(py::init<>())
        .def_readwrite("t0", &Segment::t0)
        .def_readwrite("start", &Segment::start)
        .def_readwrite("targets", &Segment::targets);
    m.def("sample_segments",
          [](const std::vector<Trajectory>& data, int B, int H, std::uint64_t seed) {
              return sample_segments(data, B, H, seed);
          });

    py::class_<ProcessSurface>(m, "ProcessSurface")
        .def_readonly("process", &ProcessSurface::process)
        .def_readonly("row", &ProcessSurface::row)
        .def_readonly("weight", &ProcessSurface::weight)
        .def_readonly("axes", &ProcessSurface::axes)
        .def_readonly("grid", &ProcessSurface::grid)
        .def_readonly("values", &ProcessSurface::values);
    m.def("extract_surface",
          [](const BinodeModel& model, int process, int row,
             const std::vector<int>& axes, const std::vector<double>& lo,
             const std::vector<double>& hi, const std::vector<int>& counts,
             const std::vector<double>& fixed) {
              GridSpec grid{axes, lo, hi, counts};
              return extract_surface(model, process, row, grid, fixed);
          },
          py::arg("model"), py::arg("process"), py::arg("row"), py::arg("axes"),
          py::arg("lo"), py::arg("hi"), py::arg("counts"), py::arg("fixed"));

    m.attr("__version__") = "0.1.0";
}
