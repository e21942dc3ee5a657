#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "odernn/cells.hpp"
#include "odernn/data.hpp"

namespace odernn {

enum class ModelKind { OdeGru, OdeLstm, DiscreteGru, DiscreteLstm };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind k);
bool is_lstm(ModelKind k);
bool is_ode(ModelKind k);

/// A model is a kind plus its parameter record. Parameters are mutated in
/// place by the optimizer; everything else is a pure function of them.
struct Model {
    ModelKind kind = ModelKind::OdeGru;
    GruFieldVariant variant = GruFieldVariant::PaperLiteral;
    std::variant<GruParams, LstmParams> params;

    std::int64_t d_obs() const;
    std::int64_t d_h() const;
    std::vector<std::pair<std::string, Tensor*>> named_params();
    std::vector<std::pair<std::string, const Tensor*>> named_params() const;
};

Model make_model(ModelKind kind, std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed,
                 GruFieldVariant variant = GruFieldVariant::PaperLiteral,
                 bool peepholes = false);

enum class Optimizer { Sgd, Adam };
enum class LossKind { Mse, CrossEntropy };

struct TrainConfig {
    std::int64_t iterations = 200;
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-2;
    LossKind loss = LossKind::Mse;
    std::uint64_t seed = 0;
    GruFieldVariant field_variant = GruFieldVariant::PaperLiteral;
    SolverConfig solver;
    std::int64_t log_every = 1;
    /// Series per iteration when training on a Dataset; 0 means full batch.
    std::int64_t batch_size = 0;
};

struct TrainRecord {
    std::int64_t iteration = 0;  // 1-based
    double loss = 0.0;
    double wall_ms = 0.0;
    std::int64_t solver_steps = 0;
};

struct TrainReport {
    std::vector<TrainRecord> records;
    double final_loss = 0.0;      // full objective with the trained parameters
    double mean_abs_delta = 0.0;  // mean |loss_i - loss_{i-1}| over the log
};

Var mse_loss(const std::vector<Var>& pred, const std::vector<Var>& target);

/// Forward pass over one series: the sequence of observable predictions at
/// the series timestamps. ODE models integrate from (y0, 0[, 0]); discrete
/// models run teacher-forced steps on the observed values.
struct ForwardResult {
    std::vector<Var> preds;
    Var final_h;
    std::int64_t solver_steps = 0;
};
ForwardResult forward_series(Tape& tape, const Model& model, const TimeSeries& series,
                             const SolverConfig& solver);

/// Objective for one series on a fresh tape: mse over all timestamps, or
/// cross-entropy of the final observable against the series label (requires
/// d_obs == n_classes).
struct ObjectiveResult {
    Var loss;
    std::int64_t solver_steps = 0;
};
ObjectiveResult series_objective(Tape& tape, const Model& model, const TimeSeries& series,
                                 const TrainConfig& cfg);

using GradMap = std::map<std::string, Tensor>;

struct OptState {
    std::map<std::string, Tensor> m, v;  // adam moments
    std::int64_t t = 0;
};

void optimizer_step(std::vector<std::pair<std::string, Tensor*>> params, const GradMap& grads,
                    OptState& state, const TrainConfig& cfg);

TrainReport train(Model& model, const TimeSeries& series, const TrainConfig& cfg);
TrainReport train(Model& model, const Dataset& dataset, const TrainConfig& cfg);

/// Central finite differences of the full objective against backward();
/// returns the worst relative error over every parameter element.
/// inject_error is a test fixture: it is added to the first analytic gradient
/// element so detector tests can verify a corrupted reverse rule is caught.
double grad_check(Model& model, const TimeSeries& series, const TrainConfig& cfg, double epsilon,
                  std::map<std::string, double>* per_tensor = nullptr,
                  double inject_error = 0.0);

}  // namespace odernn
