#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "odernn/autodiff.hpp"

namespace odernn {

/// Integrated tuple: observable y, hidden h, optional cell c (LSTM only).
struct OdeState {
    Var y;
    Var h;
    std::optional<Var> c;
};

/// Derivative of the state at (state, t). Must be pure and shape-preserving.
using VectorField = std::function<OdeState(const OdeState&, double)>;

enum class SolverMethod { Euler, Rk4, Rk45Adaptive };

struct SolverConfig {
    SolverMethod method = SolverMethod::Rk4;
    /// Fixed methods: substep size. <= 0 means "derive from data": a quarter
    /// of the smallest consecutive query gap.
    double fixed_step = 0.0;
    double rtol = 1e-3;
    double atol = 1e-4;
    std::int64_t max_steps = 100000;
};

struct IntegrationResult {
    std::vector<OdeState> states;  // one per query time
    std::int64_t steps = 0;        // accepted solver steps
};

OdeState euler_step(const VectorField& f, const OdeState& s, double t, double dt);
OdeState rk4_step(const VectorField& f, const OdeState& s, double t, double dt);

/// Evaluates the state at every query time. query_times must be strictly
/// increasing; the state at query_times[0] is s0 itself. Fixed methods split
/// each gap into ceil(gap/fixed_step) equal substeps, landing exactly on each
/// query time; the adaptive method (Dormand-Prince RK45) controls the local
/// error with rtol/atol. All arithmetic is tape-recorded.
IntegrationResult integrate(const VectorField& f, const OdeState& s0,
                            const std::vector<double>& query_times, const SolverConfig& cfg);

SolverMethod parse_solver_method(const std::string& name);
std::string solver_method_name(SolverMethod m);

}  // namespace odernn
