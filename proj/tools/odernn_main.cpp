// Command-line front end: generate datasets, train models, evaluate
// checkpoints, and gradient-check the reverse pass.
//
// Exit codes: 0 success, 2 usage/config error, 3 numeric failure, 4 I/O error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "odernn/checkpoint.hpp"
#include "odernn/data.hpp"
#include "odernn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace odernn;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ODERNN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

struct TrainOptions {
    std::string model = "ode-gru";
    std::string data_path;
    std::int64_t hidden = 50;
    std::int64_t iterations = 200;
    std::string optimizer = "adam";
    double learning_rate = 1e-2;
    std::string loss = "mse";
    std::uint64_t seed = default_seed();
    std::string variant = "paper-literal";
    bool peepholes = false;
    std::string solver = "rk4";
    double fixed_step = 0.0;
    double rtol = 1e-3;
    double atol = 1e-4;
    std::int64_t max_steps = 100000;
    std::int64_t log_every = 1;
    std::int64_t batch = 0;
    bool compare = false;
    bool do_normalize = false;
    std::string out_dir = ".";
};

void apply_config_file(TrainOptions& o, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    if (j.contains("model")) o.model = j["model"];
    if (j.contains("data")) o.data_path = j["data"];
    if (j.contains("hidden")) o.hidden = j["hidden"];
    if (j.contains("iters")) o.iterations = j["iters"];
    if (j.contains("optimizer")) o.optimizer = j["optimizer"];
    if (j.contains("lr")) o.learning_rate = j["lr"];
    if (j.contains("loss")) o.loss = j["loss"];
    if (j.contains("seed")) o.seed = j["seed"];
    if (j.contains("variant")) o.variant = j["variant"];
    if (j.contains("peepholes")) o.peepholes = j["peepholes"];
    if (j.contains("solver")) o.solver = j["solver"];
    if (j.contains("step")) o.fixed_step = j["step"];
    if (j.contains("rtol")) o.rtol = j["rtol"];
    if (j.contains("atol")) o.atol = j["atol"];
    if (j.contains("max_steps")) o.max_steps = j["max_steps"];
    if (j.contains("log_every")) o.log_every = j["log_every"];
    if (j.contains("batch")) o.batch = j["batch"];
    if (j.contains("normalize")) o.do_normalize = j["normalize"];
    if (j.contains("out")) o.out_dir = j["out"];
}

TrainConfig to_train_config(const TrainOptions& o) {
    TrainConfig cfg;
    cfg.iterations = o.iterations;
    cfg.optimizer = (o.optimizer == "sgd") ? Optimizer::Sgd
                    : (o.optimizer == "adam")
                        ? Optimizer::Adam
                        : throw UsageError("unknown optimizer: " + o.optimizer);
    cfg.learning_rate = o.learning_rate;
    cfg.loss = (o.loss == "mse") ? LossKind::Mse
               : (o.loss == "cross_entropy")
                   ? LossKind::CrossEntropy
                   : throw UsageError("unknown loss: " + o.loss);
    cfg.seed = o.seed;
    cfg.field_variant = parse_gru_variant(o.variant);
    cfg.solver.method = parse_solver_method(o.solver);
    cfg.solver.fixed_step = o.fixed_step;
    cfg.solver.rtol = o.rtol;
    cfg.solver.atol = o.atol;
    cfg.solver.max_steps = o.max_steps;
    cfg.log_every = o.log_every;
    cfg.batch_size = o.batch;
    return cfg;
}

json options_to_json(const TrainOptions& o) {
    return json{{"model", o.model},       {"data", o.data_path},   {"hidden", o.hidden},
                {"iters", o.iterations},  {"optimizer", o.optimizer}, {"lr", o.learning_rate},
                {"loss", o.loss},         {"seed", o.seed},        {"variant", o.variant},
                {"peepholes", o.peepholes}, {"solver", o.solver},  {"step", o.fixed_step},
                {"rtol", o.rtol},         {"atol", o.atol},        {"max_steps", o.max_steps},
                {"log_every", o.log_every}, {"batch", o.batch},    {"normalize", o.do_normalize}};
}

void write_metrics(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,loss,solver_steps\n";
    for (const auto& r : report.records) {
        out << r.iteration << "," << fmt_double(r.loss) << "," << r.solver_steps << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

// Wall-clock lives in its own file so metrics.csv stays reproducible.
void write_timings(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,wall_ms\n";
    for (const auto& r : report.records) {
        out << r.iteration << "," << fmt_double(r.wall_ms) << "\n";
    }
}

std::vector<double> refine_times(const std::vector<double>& times, std::int64_t factor) {
    if (factor <= 1) return times;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double gap = times[i + 1] - times[i];
        for (std::int64_t k = 0; k < factor; ++k) {
            out.push_back(times[i] + gap * static_cast<double>(k) / static_cast<double>(factor));
        }
    }
    out.push_back(times.back());
    return out;
}

void write_predictions(const Model& model, const Dataset& ds, const SolverConfig& solver,
                       std::int64_t refine, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "series_id,time";
    for (std::int64_t j = 0; j < model.d_obs(); ++j) out << ",v" << (j + 1) << "_true";
    for (std::int64_t j = 0; j < model.d_obs(); ++j) out << ",v" << (j + 1) << "_pred";
    out << "\n";
    for (const auto& ts : ds.series) {
        const auto times = refine_times(ts.timestamps, refine);
        TimeSeries query = ts;
        if (refine > 1) {
            // keep only the initial row's values for forward_series; truth is
            // looked up per output row below
            query.timestamps = times;
            query.values = Tensor::zeros({static_cast<std::int64_t>(times.size()), ts.d_obs()});
            for (std::int64_t j = 0; j < ts.d_obs(); ++j) query.values.at(0, j) = ts.values.at(0, j);
        }
        Tape tape;
        ForwardResult fw = forward_series(tape, model, refine > 1 ? query : ts, solver);
        std::size_t truth_idx = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            out << ts.name << "," << fmt_double(times[i]);
            const bool has_truth = truth_idx < ts.timestamps.size() &&
                                   ts.timestamps[truth_idx] == times[i];
            for (std::int64_t j = 0; j < model.d_obs(); ++j) {
                out << ",";
                if (has_truth) out << fmt_double(ts.values.at(static_cast<std::int64_t>(truth_idx), j));
                else out << "nan";
            }
            if (has_truth) ++truth_idx;
            const Tensor& p = fw.preds[i].value();
            for (std::int64_t j = 0; j < model.d_obs(); ++j) out << "," << fmt_double(p.at(j));
            out << "\n";
        }
    }
}

double dataset_objective(const Model& model, const Dataset& ds, const TrainConfig& cfg) {
    double total = 0.0;
    for (const auto& ts : ds.series) {
        Tape tape;
        total += series_objective(tape, model, ts, cfg).loss.value().at(0);
    }
    return total / static_cast<double>(ds.series.size());
}

/// Small irregular scalar toy used by gradcheck when no data file is given.
TimeSeries gradcheck_toy(std::int64_t n_points, std::int64_t d_obs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> t(static_cast<std::size_t>(n_points));
    for (auto& v : t) v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    std::sort(t.begin(), t.end());
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] <= t[i - 1]) t[i] = t[i - 1] + 1e-9 * static_cast<double>(i);
    }
    TimeSeries ts;
    ts.name = "gradcheck_toy";
    ts.timestamps = t;
    ts.values = Tensor::zeros({n_points, d_obs});
    for (std::int64_t i = 0; i < n_points; ++i) {
        for (std::int64_t j = 0; j < d_obs; ++j) {
            ts.values.at(i, j) = std::exp(-t[static_cast<std::size_t>(i)]) +
                                 0.3 * std::sin(t[static_cast<std::size_t>(i)] + static_cast<double>(j));
        }
    }
    return ts;
}

std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    }
    return {};
}

int run_train(const TrainOptions& opts) {
    if (opts.data_path.empty()) throw UsageError("train: --data is required");
    TrainConfig cfg = to_train_config(opts);
    Dataset ds = load_csv_auto(opts.data_path);
    NormStats stats;
    if (opts.do_normalize) ds = normalize(ds, stats);
    if (cfg.loss == LossKind::CrossEntropy) {
        if (!ds.n_classes) throw UsageError("cross_entropy requires a labeled dataset");
        if (*ds.n_classes != ds.d_obs) {
            throw UsageError("cross_entropy uses the final observable as logits; d_obs must equal "
                             "the class count");
        }
    }
    fs::create_directories(opts.out_dir);

    const ModelKind kind = parse_model_kind(opts.model);
    Model model = make_model(kind, ds.d_obs, opts.hidden, opts.seed, cfg.field_variant,
                             opts.peepholes);
    TrainReport report = train(model, ds, cfg);
    const auto dir = fs::path(opts.out_dir);
    write_metrics(report, (dir / "metrics.csv").string());
    write_timings(report, (dir / "timings.csv").string());
    save_checkpoint(model, options_to_json(opts), report.final_loss, (dir / "checkpoint.json").string());
    write_predictions(model, ds, cfg.solver, 1, (dir / "predictions.csv").string());
    std::cout << "trained " << opts.model << " for " << opts.iterations
              << " iterations, final loss " << fmt_double(report.final_loss)
              << ", mean |dloss| " << fmt_double(report.mean_abs_delta) << "\n";

    if (opts.compare) {
        const ModelKind base_kind = is_lstm(kind) ? ModelKind::DiscreteLstm : ModelKind::DiscreteGru;
        Model baseline = make_model(base_kind, ds.d_obs, opts.hidden, opts.seed, cfg.field_variant,
                                    opts.peepholes);
        TrainReport base_report = train(baseline, ds, cfg);
        TrainOptions base_opts = opts;
        base_opts.model = model_kind_name(base_kind);
        save_checkpoint(baseline, options_to_json(base_opts), base_report.final_loss,
                        (dir / "checkpoint_baseline.json").string());
        std::ofstream out(dir / "metrics_compare.csv");
        if (!out) throw IoError("cannot write metrics_compare.csv");
        out << "iteration,loss_" << opts.model << ",loss_" << base_opts.model << "\n";
        const auto rows = std::min(report.records.size(), base_report.records.size());
        for (std::size_t i = 0; i < rows; ++i) {
            out << report.records[i].iteration << "," << fmt_double(report.records[i].loss) << ","
                << fmt_double(base_report.records[i].loss) << "\n";
        }
        std::cout << "baseline " << base_opts.model << " final loss "
                  << fmt_double(base_report.final_loss) << "\n";
    }
    return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path, std::int64_t refine,
             const std::string& out_dir) {
    LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
    Dataset ds = load_csv_auto(data_path);
    if (ds.d_obs != ckpt.model.d_obs()) {
        throw UsageError("dataset d_obs " + std::to_string(ds.d_obs) +
                         " does not match checkpoint d_obs " + std::to_string(ckpt.model.d_obs()));
    }
    TrainOptions opts;
    if (!ckpt.run_config.empty()) {
        // re-resolve the training solver/loss settings from the checkpoint
        TrainOptions tmp;
        const json& j = ckpt.run_config;
        if (j.contains("solver")) tmp.solver = j["solver"];
        if (j.contains("step")) tmp.fixed_step = j["step"];
        if (j.contains("rtol")) tmp.rtol = j["rtol"];
        if (j.contains("atol")) tmp.atol = j["atol"];
        if (j.contains("max_steps")) tmp.max_steps = j["max_steps"];
        if (j.contains("loss")) tmp.loss = j["loss"];
        opts = tmp;
    }
    TrainConfig cfg = to_train_config(opts);
    fs::create_directories(out_dir);
    write_predictions(ckpt.model, ds, cfg.solver, refine,
                      (fs::path(out_dir) / "predictions.csv").string());

    const double mse = dataset_objective(ckpt.model, ds, cfg);
    json summary{{"objective", mse}, {"loss", opts.loss}, {"series", ds.series.size()}};
    if (ds.n_classes && *ds.n_classes == ds.d_obs) {
        std::int64_t correct = 0, labeled = 0;
        for (const auto& ts : ds.series) {
            if (!ts.label) continue;
            Tape tape;
            ForwardResult fw = forward_series(tape, ckpt.model, ts, cfg.solver);
            if (reduce_max_index(fw.preds.back().value()) == *ts.label) ++correct;
            ++labeled;
        }
        if (labeled > 0) summary["accuracy"] = static_cast<double>(correct) / static_cast<double>(labeled);
    }
    std::ofstream out(fs::path(out_dir) / "summary.json");
    out << summary.dump(2) << "\n";
    std::cout << "objective " << fmt_double(mse) << "\n";
    return 0;
}

int run_gradcheck(const std::string& model_name, std::int64_t hidden, std::int64_t points,
                  std::int64_t d_obs, std::uint64_t seed, double epsilon, double corrupt) {
    if (hidden > 8) throw UsageError("gradcheck: --hidden must be <= 8");
    if (points > 10) throw UsageError("gradcheck: --points must be <= 10");
    const ModelKind kind = parse_model_kind(model_name);
    Model model = make_model(kind, d_obs, hidden, seed);
    TimeSeries ts = gradcheck_toy(points, d_obs, seed + 1);
    TrainConfig cfg;
    cfg.solver.method = SolverMethod::Rk4;
    std::map<std::string, double> per_tensor;
    const double worst = grad_check(model, ts, cfg, epsilon, &per_tensor, corrupt);
    for (const auto& [name, err] : per_tensor) {
        std::cout << name << " " << fmt_double(err) << "\n";
    }
    std::cout << "worst relative error " << fmt_double(worst) << "\n";
    return worst > 1e-4 ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-time GRU/LSTM cells trained through ODE solvers"};
    app.require_subcommand(1);

    // -- generate ----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
    gen->require_subcommand(1);
    std::int64_t g_series = 1000, g_points = 100;
    std::uint64_t g_seed = default_seed();
    double g_noise = 0.0;
    std::string g_out = "dataset.csv";
    for (auto* sub : {gen->add_subcommand("spiral", "Archimedean spirals, 2 classes"),
                      gen->add_subcommand("eight", "Figure-eight curve"),
                      gen->add_subcommand("triknot", "Trefoil knot projection")}) {
        sub->add_option("--points", g_points, "Points per series");
        sub->add_option("--seed", g_seed, "RNG seed");
        sub->add_option("--out", g_out, "Output CSV path");
        if (sub->get_name() == "spiral") {
            sub->add_option("--series", g_series, "Number of spirals");
            sub->add_option("--noise", g_noise, "Gaussian noise sd");
        }
    }

    // -- train -------------------------------------------------------------
    TrainOptions topts;
    const std::string cfg_path = find_config_arg(argc, argv);
    std::string cfg_dummy;
    try {
        if (!cfg_path.empty()) apply_config_file(topts, cfg_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    auto* tr = app.add_subcommand("train", "Train a model on a CSV dataset");
    tr->add_option("--config", cfg_dummy, "JSON config file (flags override it)");
    tr->add_option("--model", topts.model, "ode-gru | ode-lstm | discrete-gru | discrete-lstm");
    tr->add_option("--data", topts.data_path, "Dataset CSV");
    tr->add_option("--hidden", topts.hidden, "Hidden dimension");
    tr->add_option("--iters", topts.iterations, "Training iterations");
    tr->add_option("--optimizer", topts.optimizer, "sgd | adam");
    tr->add_option("--lr", topts.learning_rate, "Learning rate");
    tr->add_option("--loss", topts.loss, "mse | cross_entropy");
    tr->add_option("--seed", topts.seed, "RNG seed");
    tr->add_option("--variant", topts.variant, "paper-literal | contractive");
    tr->add_flag("--peepholes", topts.peepholes, "Enable LSTM peephole weights");
    tr->add_option("--solver", topts.solver, "euler | rk4 | rk45-adaptive");
    tr->add_option("--step", topts.fixed_step, "Fixed step (0 = quarter of min gap)");
    tr->add_option("--rtol", topts.rtol, "Adaptive relative tolerance");
    tr->add_option("--atol", topts.atol, "Adaptive absolute tolerance");
    tr->add_option("--max-steps", topts.max_steps, "Solver step budget per run");
    tr->add_option("--log-every", topts.log_every, "Log every k-th iteration");
    tr->add_option("--batch", topts.batch, "Series per iteration (0 = all)");
    tr->add_flag("--compare", topts.compare, "Also train the discrete baseline");
    tr->add_flag("--normalize", topts.do_normalize, "Z-score the dataset first");
    tr->add_option("--out", topts.out_dir, "Output directory");

    // -- eval --------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string e_ckpt, e_data, e_out = ".";
    std::int64_t e_refine = 1;
    ev->add_option("--checkpoint", e_ckpt, "checkpoint.json path")->required();
    ev->add_option("--data", e_data, "Dataset CSV")->required();
    ev->add_option("--refine", e_refine, "Query-grid refinement factor");
    ev->add_option("--out", e_out, "Output directory");

    // -- gradcheck ---------------------------------------------------------
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the reverse pass");
    std::string c_model = "ode-gru";
    std::int64_t c_hidden = 4, c_points = 8, c_dobs = 1;
    std::uint64_t c_seed = default_seed();
    double c_eps = 1e-6, c_corrupt = 0.0;
    gc->add_option("--model", c_model, "ode-gru | ode-lstm | discrete-gru | discrete-lstm");
    gc->add_option("--hidden", c_hidden, "Hidden dimension (<= 8)");
    gc->add_option("--points", c_points, "Time points (<= 10)");
    gc->add_option("--dobs", c_dobs, "Observable dimension");
    gc->add_option("--seed", c_seed, "RNG seed");
    gc->add_option("--epsilon", c_eps, "Finite-difference step");
    gc->add_option("--corrupt", c_corrupt, "Test fixture: offset one analytic gradient")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            Dataset ds;
            if (gen->get_subcommand("spiral")->parsed()) {
                ds = gen_spiral(g_series, g_points, g_seed, g_noise);
            } else if (gen->get_subcommand("eight")->parsed()) {
                TimeSeries ts = gen_eight_curve(g_points, g_seed);
                ds.series.push_back(std::move(ts));
                ds.d_obs = 2;
            } else {
                TimeSeries ts = gen_triknot(g_points, g_seed);
                ds.series.push_back(std::move(ts));
                ds.d_obs = 2;
            }
            save_csv(ds, g_out);
            std::cout << "wrote " << g_out << "\n";
            return 0;
        }
        if (tr->parsed()) return run_train(topts);
        if (ev->parsed()) return run_eval(e_ckpt, e_data, e_refine, e_out);
        if (gc->parsed()) return run_gradcheck(c_model, c_hidden, c_points, c_dobs, c_seed, c_eps, c_corrupt);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
