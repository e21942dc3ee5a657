#include "odernn/training.hpp"

#include <chrono>
#include <cmath>

namespace odernn {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "ode-gru" || name == "ode_gru") return ModelKind::OdeGru;
    if (name == "ode-lstm" || name == "ode_lstm") return ModelKind::OdeLstm;
    if (name == "discrete-gru" || name == "discrete_gru") return ModelKind::DiscreteGru;
    if (name == "discrete-lstm" || name == "discrete_lstm") return ModelKind::DiscreteLstm;
    throw UsageError("unknown model kind: " + name);
}

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::OdeGru: return "ode-gru";
        case ModelKind::OdeLstm: return "ode-lstm";
        case ModelKind::DiscreteGru: return "discrete-gru";
        case ModelKind::DiscreteLstm: return "discrete-lstm";
    }
    return "?";
}

bool is_lstm(ModelKind k) { return k == ModelKind::OdeLstm || k == ModelKind::DiscreteLstm; }
bool is_ode(ModelKind k) { return k == ModelKind::OdeGru || k == ModelKind::OdeLstm; }

std::int64_t Model::d_obs() const {
    return std::visit([](const auto& p) { return p.d_obs; }, params);
}
std::int64_t Model::d_h() const {
    return std::visit([](const auto& p) { return p.d_h; }, params);
}
std::vector<std::pair<std::string, Tensor*>> Model::named_params() {
    return std::visit([](auto& p) { return p.named(); }, params);
}
std::vector<std::pair<std::string, const Tensor*>> Model::named_params() const {
    return std::visit([](const auto& p) { return p.named(); }, params);
}

Model make_model(ModelKind kind, std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed,
                 GruFieldVariant variant, bool peepholes) {
    Model m;
    m.kind = kind;
    m.variant = variant;
    if (is_lstm(kind)) {
        m.params = init_lstm_params(d_obs, d_h, seed, peepholes);
    } else {
        m.params = init_gru_params(d_obs, d_h, seed);
    }
    return m;
}

namespace {

struct Lifted {
    std::variant<GruVars, LstmVars> vars;

    const GruVars& gru() const { return std::get<GruVars>(vars); }
    const LstmVars& lstm() const { return std::get<LstmVars>(vars); }
};

Lifted lift_model(Tape& tape, const Model& model) {
    Lifted l;
    if (is_lstm(model.kind)) {
        l.vars = lift(tape, std::get<LstmParams>(model.params));
    } else {
        l.vars = lift(tape, std::get<GruParams>(model.params));
    }
    return l;
}

std::vector<std::pair<std::string, Var>> named_vars(const Model& model, const Lifted& l) {
    if (!is_lstm(model.kind)) {
        const GruVars& v = l.gru();
        return {{"W_r", v.W_r}, {"U_r", v.U_r}, {"b_r", v.b_r}, {"W_z", v.W_z},
                {"U_z", v.U_z}, {"b_z", v.b_z}, {"W_h", v.W_h}, {"U_h", v.U_h},
                {"b_h", v.b_h}, {"W_o", v.W_o}, {"b_o", v.b_o}};
    }
    const LstmVars& v = l.lstm();
    std::vector<std::pair<std::string, Var>> out = {
        {"W_xi", v.W_xi}, {"W_hi", v.W_hi}, {"b_i", v.b_i}, {"W_xf", v.W_xf},
        {"W_hf", v.W_hf}, {"b_f", v.b_f},   {"W_xc", v.W_xc}, {"W_hc", v.W_hc},
        {"b_c", v.b_c},   {"W_xo", v.W_xo}, {"W_ho", v.W_ho}, {"b_o", v.b_o},
        {"W_out", v.W_out}, {"b_out", v.b_out}};
    if (std::get<LstmParams>(model.params).peepholes) {
        out.insert(out.end(), {{"w_ci", v.w_ci}, {"w_cf", v.w_cf}, {"w_co", v.w_co}});
    }
    return out;
}

ForwardResult forward_with(Tape& tape, const Model& model, const Lifted& l,
                           const TimeSeries& series, const SolverConfig& solver) {
    ForwardResult res;
    if (series.d_obs() != model.d_obs()) {
        throw UsageError("series dimension " + std::to_string(series.d_obs()) +
                         " does not match model d_obs " + std::to_string(model.d_obs()));
    }
    if (is_ode(model.kind)) {
        OdeState s0;
        s0.y = tape.leaf(series.row(0));
        s0.h = tape.leaf(Tensor::zeros({model.d_h()}));
        VectorField field;
        if (model.kind == ModelKind::OdeGru) {
            const GruVars& v = l.gru();
            const GruFieldVariant variant = model.variant;
            field = [&v, variant](const OdeState& s, double) { return ode_gru_field(s, v, variant); };
        } else {
            s0.c = tape.leaf(Tensor::zeros({model.d_h()}));
            const LstmVars& v = l.lstm();
            field = [&v](const OdeState& s, double) { return ode_lstm_field(s, v); };
        }
        IntegrationResult ir = integrate(field, s0, series.timestamps, solver);
        for (const auto& s : ir.states) res.preds.push_back(s.y);
        res.final_h = ir.states.back().h;
        res.solver_steps = ir.steps;
        return res;
    }

    // Discrete baselines: teacher-forced steps over the observed values; the
    // prediction at t_i reads out the hidden state after consuming row i-1.
    Var h = tape.leaf(Tensor::zeros({model.d_h()}));
    Var c = h;
    if (model.kind == ModelKind::DiscreteLstm) c = tape.leaf(Tensor::zeros({model.d_h()}));
    res.preds.push_back(tape.leaf(series.row(0)));
    for (std::int64_t i = 1; i < series.n_points(); ++i) {
        Var x = tape.leaf(series.row(i - 1));
        if (model.kind == ModelKind::DiscreteGru) {
            const GruVars& v = l.gru();
            h = discrete_gru_step(x, h, v);
            res.preds.push_back(tape.sigmoid(tape.add(tape.matmul(v.W_o, h), v.b_o)));
        } else {
            const LstmVars& v = l.lstm();
            auto [hn, cn] = discrete_lstm_step(x, h, c, v);
            h = hn;
            c = cn;
            res.preds.push_back(tape.add(tape.matmul(v.W_out, h), v.b_out));
        }
    }
    res.final_h = h;
    return res;
}

ObjectiveResult objective_with(Tape& tape, const Model& model, const Lifted& l,
                               const TimeSeries& series, const TrainConfig& cfg) {
    ForwardResult fw = forward_with(tape, model, l, series, cfg.solver);
    ObjectiveResult res;
    res.solver_steps = fw.solver_steps;
    if (cfg.loss == LossKind::Mse) {
        std::vector<Var> targets;
        targets.reserve(fw.preds.size());
        for (std::int64_t i = 0; i < series.n_points(); ++i) targets.push_back(tape.leaf(series.row(i)));
        res.loss = mse_loss(fw.preds, targets);
    } else {
        if (!series.label) throw UsageError("cross-entropy loss requires labeled series");
        res.loss = tape.cross_entropy(fw.preds.back(), *series.label);
    }
    return res;
}

}  // namespace

Var mse_loss(const std::vector<Var>& pred, const std::vector<Var>& target) {
    if (pred.empty() || pred.size() != target.size()) {
        throw DimensionError("mse_loss: prediction/target lengths differ");
    }
    Tape& tape = *pred.front().tape;
    Var total = tape.leaf(Tensor::scalar(0.0));
    std::int64_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        Var d = tape.sub(pred[i], target[i]);
        total = tape.add(total, tape.sum(tape.mul(d, d)));
        count += pred[i].value().size();
    }
    return tape.scale(total, 1.0 / static_cast<double>(count));
}

ForwardResult forward_series(Tape& tape, const Model& model, const TimeSeries& series,
                             const SolverConfig& solver) {
    Lifted l = lift_model(tape, model);
    return forward_with(tape, model, l, series, solver);
}

ObjectiveResult series_objective(Tape& tape, const Model& model, const TimeSeries& series,
                                 const TrainConfig& cfg) {
    Lifted l = lift_model(tape, model);
    return objective_with(tape, model, l, series, cfg);
}

void optimizer_step(std::vector<std::pair<std::string, Tensor*>> params, const GradMap& grads,
                    OptState& state, const TrainConfig& cfg) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    if (cfg.optimizer == Optimizer::Adam) ++state.t;
    for (auto& [name, p] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) throw UsageError("missing gradient for parameter " + name);
        const Tensor& g = it->second;
        if (!g.same_shape(*p)) throw DimensionError("gradient shape mismatch for " + name);
        if (cfg.optimizer == Optimizer::Sgd) {
            for (std::size_t i = 0; i < p->data.size(); ++i) {
                p->data[i] -= cfg.learning_rate * g.data[i];
            }
            continue;
        }
        if (!state.m.count(name)) {
            state.m.emplace(name, Tensor::zeros(p->shape));
            state.v.emplace(name, Tensor::zeros(p->shape));
        }
        Tensor& m = state.m.at(name);
        Tensor& v = state.v.at(name);
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            m.data[i] = kBeta1 * m.data[i] + (1.0 - kBeta1) * g.data[i];
            v.data[i] = kBeta2 * v.data[i] + (1.0 - kBeta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p->data[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + kEps);
        }
    }
}

namespace {

TrainReport train_impl(Model& model, const std::vector<const TimeSeries*>& all, const TrainConfig& cfg) {
    if (all.empty()) throw UsageError("train: empty dataset");
    if (cfg.learning_rate <= 0.0) throw UsageError("train: learning_rate must be positive");
    if (cfg.iterations < 0) throw UsageError("train: iterations must be >= 0");
    if (cfg.log_every < 1) throw UsageError("train: log_every must be >= 1");
    const auto n = static_cast<std::int64_t>(all.size());
    const std::int64_t batch = (cfg.batch_size <= 0 || cfg.batch_size >= n) ? n : cfg.batch_size;

    TrainReport report;
    OptState opt;
    for (std::int64_t it = 1; it <= cfg.iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        Tape tape;
        Lifted l = lift_model(tape, model);
        Var loss_sum = tape.leaf(Tensor::scalar(0.0));
        std::int64_t steps = 0;
        try {
            for (std::int64_t b = 0; b < batch; ++b) {
                const auto idx = ((it - 1) * batch + b) % n;
                ObjectiveResult obj =
                    objective_with(tape, model, l, *all[static_cast<std::size_t>(idx)], cfg);
                loss_sum = tape.add(loss_sum, obj.loss);
                steps += obj.solver_steps;
            }
        } catch (const NumericError& e) {
            throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
        }
        Var loss = tape.scale(loss_sum, 1.0 / static_cast<double>(batch));
        const double loss_value = loss.value().at(0);
        if (!std::isfinite(loss_value)) {
            throw NumericError("iteration " + std::to_string(it) + ": non-finite loss");
        }
        tape.backward(loss);
        GradMap grads;
        for (const auto& [name, var] : named_vars(model, l)) grads.emplace(name, var.grad());
        optimizer_step(model.named_params(), grads, opt, cfg);

        if ((it - 1) % cfg.log_every == 0 || it == cfg.iterations) {
            const auto t1 = std::chrono::steady_clock::now();
            TrainRecord rec;
            rec.iteration = it;
            rec.loss = loss_value;
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            rec.solver_steps = steps;
            if (report.records.empty() || report.records.back().iteration != it) {
                report.records.push_back(rec);
            }
        }
    }

    // Full objective with the trained parameters (what eval reproduces).
    {
        Tape tape;
        Lifted l = lift_model(tape, model);
        Var loss_sum = tape.leaf(Tensor::scalar(0.0));
        for (const auto* ts : all) {
            loss_sum = tape.add(loss_sum, objective_with(tape, model, l, *ts, cfg).loss);
        }
        report.final_loss = loss_sum.value().at(0) / static_cast<double>(all.size());
    }
    double delta = 0.0;
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        delta += std::abs(report.records[i].loss - report.records[i - 1].loss);
    }
    report.mean_abs_delta =
        report.records.size() > 1 ? delta / static_cast<double>(report.records.size() - 1) : 0.0;
    return report;
}

}  // namespace

TrainReport train(Model& model, const TimeSeries& series, const TrainConfig& cfg) {
    return train_impl(model, {&series}, cfg);
}

TrainReport train(Model& model, const Dataset& dataset, const TrainConfig& cfg) {
    std::vector<const TimeSeries*> all;
    all.reserve(dataset.series.size());
    for (const auto& ts : dataset.series) all.push_back(&ts);
    return train_impl(model, all, cfg);
}

double grad_check(Model& model, const TimeSeries& series, const TrainConfig& cfg, double epsilon,
                  std::map<std::string, double>* per_tensor, double inject_error) {
    if (epsilon <= 0.0) throw UsageError("grad_check: epsilon must be positive");
    GradMap analytic;
    {
        Tape tape;
        Lifted l = lift_model(tape, model);
        ObjectiveResult obj = objective_with(tape, model, l, series, cfg);
        tape.backward(obj.loss);
        for (const auto& [name, var] : named_vars(model, l)) analytic.emplace(name, var.grad());
    }
    if (inject_error != 0.0 && !analytic.empty()) {
        analytic.begin()->second.data[0] += inject_error;
    }
    auto objective_value = [&]() {
        Tape tape;
        Lifted l = lift_model(tape, model);
        return objective_with(tape, model, l, series, cfg).loss.value().at(0);
    };

    double worst = 0.0;
    for (auto& [name, p] : model.named_params()) {
        double tensor_worst = 0.0;
        const Tensor& a = analytic.at(name);
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double orig = p->data[i];
            p->data[i] = orig + epsilon;
            const double up = objective_value();
            p->data[i] = orig - epsilon;
            const double dn = objective_value();
            p->data[i] = orig;
            const double fd = (up - dn) / (2.0 * epsilon);
            const double rel = std::abs(a.data[i] - fd) / std::max(1.0, std::abs(a.data[i]));
            tensor_worst = std::max(tensor_worst, rel);
        }
        if (per_tensor) (*per_tensor)[name] = tensor_worst;
        worst = std::max(worst, tensor_worst);
    }
    return worst;
}

}  // namespace odernn
