// Python bindings: a thin layer over the C++ core. Tensors cross the
// boundary as nested lists so the package has no numpy requirement.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odernn/cells.hpp"
#include "odernn/checkpoint.hpp"
#include "odernn/data.hpp"
#include "odernn/training.hpp"

namespace py = pybind11;
using namespace odernn;

namespace {

py::object tensor_to_py(const Tensor& t) {
    if (t.shape.size() == 1) {
        py::list out;
        for (double v : t.data) out.append(v);
        return out;
    }
    py::list rows;
    for (std::int64_t i = 0; i < t.shape[0]; ++i) {
        py::list row;
        for (std::int64_t j = 0; j < t.shape[1]; ++j) row.append(t.at(i, j));
        rows.append(row);
    }
    return rows;
}

Tensor matrix_from_py(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw UsageError("values must have at least one row");
    const auto cols = static_cast<std::int64_t>(rows.front().size());
    Tensor t = Tensor::zeros({static_cast<std::int64_t>(rows.size()), cols});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<std::int64_t>(rows[i].size()) != cols) {
            throw DimensionError("ragged values rows");
        }
        for (std::int64_t j = 0; j < cols; ++j) t.at(static_cast<std::int64_t>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    return t;
}

TimeSeries make_series(const std::vector<double>& timestamps,
                       const std::vector<std::vector<double>>& values,
                       std::optional<std::int64_t> label, const std::string& name) {
    TimeSeries ts;
    ts.timestamps = timestamps;
    ts.values = matrix_from_py(values);
    ts.label = label;
    ts.name = name;
    if (static_cast<std::int64_t>(timestamps.size()) != ts.values.shape[0]) {
        throw DimensionError("timestamps and values row count differ");
    }
    return ts;
}

SolverConfig solver_from_args(const std::string& method, double step, double rtol, double atol,
                              std::int64_t max_steps) {
    SolverConfig s;
    if (method == "euler") s.method = SolverMethod::Euler;
    else if (method == "rk4") s.method = SolverMethod::Rk4;
    else if (method == "rk45-adaptive") s.method = SolverMethod::Rk45Adaptive;
    else throw UsageError("unknown solver '" + method + "'");
    s.fixed_step = step;
    s.rtol = rtol;
    s.atol = atol;
    s.max_steps = max_steps;
    return s;
}

TrainConfig config_from_args(std::int64_t iterations, const std::string& optimizer, double lr,
                             const std::string& loss, std::uint64_t seed,
                             const std::string& variant, const std::string& solver, double step,
                             double rtol, double atol, std::int64_t max_steps,
                             std::int64_t log_every, std::int64_t batch_size) {
    TrainConfig cfg;
    cfg.iterations = iterations;
    if (optimizer == "sgd") cfg.optimizer = Optimizer::Sgd;
    else if (optimizer == "adam") cfg.optimizer = Optimizer::Adam;
    else throw UsageError("unknown optimizer '" + optimizer + "'");
    cfg.learning_rate = lr;
    if (loss == "mse") cfg.loss = LossKind::Mse;
    else if (loss == "cross_entropy") cfg.loss = LossKind::CrossEntropy;
    else throw UsageError("unknown loss '" + loss + "'");
    cfg.seed = seed;
    cfg.field_variant = parse_gru_variant(variant);
    cfg.solver = solver_from_args(solver, step, rtol, atol, max_steps);
    cfg.log_every = log_every;
    cfg.batch_size = batch_size;
    return cfg;
}

py::dict report_to_py(const TrainReport& rep) {
    py::list records;
    for (const auto& r : rep.records) {
        py::dict d;
        d["iteration"] = r.iteration;
        d["loss"] = r.loss;
        d["solver_steps"] = r.solver_steps;
        records.append(d);
    }
    py::dict out;
    out["records"] = records;
    out["final_loss"] = rep.final_loss;
    out["mean_abs_delta"] = rep.mean_abs_delta;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "continuous-time GRU/LSTM cells with ODE-solver training";

    py::register_exception<UsageError>(m, "UsageError");
    py::register_exception<DimensionError>(m, "DimensionError");
    py::register_exception<FormatError>(m, "FormatError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");
    py::register_exception<BudgetError>(m, "BudgetError");
    py::register_exception<IoError>(m, "IoError");

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init(&make_series), py::arg("timestamps"), py::arg("values"),
             py::arg("label") = std::nullopt, py::arg("name") = "series")
        .def_readonly("timestamps", &TimeSeries::timestamps)
        .def_readonly("label", &TimeSeries::label)
        .def_readonly("name", &TimeSeries::name)
        .def_property_readonly("values",
                               [](const TimeSeries& ts) { return tensor_to_py(ts.values); })
        .def("__len__",
             [](const TimeSeries& ts) { return ts.timestamps.size(); });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("series", &Dataset::series)
        .def_readonly("d_obs", &Dataset::d_obs)
        .def_readonly("n_classes", &Dataset::n_classes)
        .def("__len__", [](const Dataset& ds) { return ds.series.size(); });

    py::class_<Model>(m, "Model")
        .def_property_readonly("kind",
                               [](const Model& mo) { return model_kind_name(mo.kind); })
        .def_property_readonly("d_obs", &Model::d_obs)
        .def_property_readonly("d_h", &Model::d_h)
        .def_property_readonly("variant",
                               [](const Model& mo) { return gru_variant_name(mo.variant); })
        .def("parameters", [](const Model& mo) {
            py::dict out;
            for (const auto& [name, t] : mo.named_params()) {
                out[py::str(name)] = tensor_to_py(*t);
            }
            return out;
        });

    m.def(
        "make_model",
        [](const std::string& kind, std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed,
           const std::string& variant, bool peepholes) {
            return make_model(parse_model_kind(kind), d_obs, d_h, seed,
                              parse_gru_variant(variant), peepholes);
        },
        py::arg("kind"), py::arg("d_obs"), py::arg("d_h"), py::arg("seed") = 0,
        py::arg("variant") = "paper-literal", py::arg("peepholes") = false);

    m.def("gen_spiral", &gen_spiral, py::arg("n_series"), py::arg("n_points"),
          py::arg("seed") = 0, py::arg("noise_sd") = 0.0);
    m.def("gen_eight_curve", &gen_eight_curve, py::arg("n_points"), py::arg("seed") = 0);
    m.def("gen_triknot", &gen_triknot, py::arg("n_points"), py::arg("seed") = 0);
    m.def("subsample_irregular", &subsample_irregular, py::arg("series"), py::arg("keep_fraction"),
          py::arg("seed") = 0);
    m.def("load_csv", &load_csv_auto, py::arg("path"));
    m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));

    const auto train_series =
        [](Model& model, const TimeSeries& ts, std::int64_t iterations,
           const std::string& optimizer, double lr, const std::string& loss, std::uint64_t seed,
           const std::string& variant, const std::string& solver, double step, double rtol,
           double atol, std::int64_t max_steps, std::int64_t log_every, std::int64_t batch_size) {
            TrainConfig cfg = config_from_args(iterations, optimizer, lr, loss, seed, variant,
                                               solver, step, rtol, atol, max_steps, log_every,
                                               batch_size);
            return report_to_py(train(model, ts, cfg));
        };
    const auto train_dataset =
        [](Model& model, const Dataset& ds, std::int64_t iterations, const std::string& optimizer,
           double lr, const std::string& loss, std::uint64_t seed, const std::string& variant,
           const std::string& solver, double step, double rtol, double atol,
           std::int64_t max_steps, std::int64_t log_every, std::int64_t batch_size) {
            TrainConfig cfg = config_from_args(iterations, optimizer, lr, loss, seed, variant,
                                               solver, step, rtol, atol, max_steps, log_every,
                                               batch_size);
            return report_to_py(train(model, ds, cfg));
        };
    // shared keyword spec for both train overloads
#define ODERNN_TRAIN_ARGS                                                                     \
    py::arg("model"), py::arg("data"), py::arg("iterations") = 200,                           \
        py::arg("optimizer") = "adam", py::arg("lr") = 1e-2, py::arg("loss") = "mse",         \
        py::arg("seed") = 0, py::arg("variant") = "paper-literal", py::arg("solver") = "rk4", \
        py::arg("step") = 0.0, py::arg("rtol") = 1e-3, py::arg("atol") = 1e-4,                \
        py::arg("max_steps") = 100000, py::arg("log_every") = 1, py::arg("batch_size") = 0
    m.def("train", train_series, ODERNN_TRAIN_ARGS);
    m.def("train", train_dataset, ODERNN_TRAIN_ARGS);
#undef ODERNN_TRAIN_ARGS

    m.def(
        "predict",
        [](const Model& model, const TimeSeries& ts, const std::string& solver, double step,
           double rtol, double atol, std::int64_t max_steps) {
            Tape tape;
            auto res = forward_series(tape, model, ts,
                                      solver_from_args(solver, step, rtol, atol, max_steps));
            py::list out;
            for (const auto& p : res.preds) out.append(tensor_to_py(p.value()));
            return out;
        },
        py::arg("model"), py::arg("series"), py::arg("solver") = "rk4", py::arg("step") = 0.0,
        py::arg("rtol") = 1e-3, py::arg("atol") = 1e-4, py::arg("max_steps") = 100000);

    m.def(
        "grad_check",
        [](Model& model, const TimeSeries& ts, const std::string& solver, double step,
           double epsilon) {
            TrainConfig cfg;
            cfg.field_variant = model.variant;
            cfg.solver = solver_from_args(solver, step, 1e-3, 1e-4, 100000);
            std::map<std::string, double> per_tensor;
            const double worst = grad_check(model, ts, cfg, epsilon, &per_tensor);
            py::dict detail;
            for (const auto& [k, v] : per_tensor) detail[py::str(k)] = v;
            return py::make_tuple(worst, detail);
        },
        py::arg("model"), py::arg("series"), py::arg("solver") = "rk4", py::arg("step") = 0.1,
        py::arg("epsilon") = 1e-6);

    m.def(
        "save_checkpoint",
        [](const Model& model, const std::string& path, double final_loss) {
            save_checkpoint(model, nlohmann::json::object(), final_loss, path);
        },
        py::arg("model"), py::arg("path"), py::arg("final_loss") = 0.0);
    m.def(
        "load_checkpoint",
        [](const std::string& path) {
            LoadedCheckpoint ck = load_checkpoint(path);
            return py::make_tuple(ck.model, ck.final_loss);
        },
        py::arg("path"));
}
