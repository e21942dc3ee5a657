#include "odernn/odesolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odernn {

namespace {

std::vector<Var> components(const OdeState& s) {
    std::vector<Var> out{s.y, s.h};
    if (s.c) out.push_back(*s.c);
    return out;
}

OdeState from_components(const OdeState& like, const std::vector<Var>& comps) {
    OdeState out;
    out.y = comps[0];
    out.h = comps[1];
    if (like.c) out.c = comps[2];
    return out;
}

void check_field_shapes(const OdeState& s, const OdeState& ds) {
    if (!s.y.value().same_shape(ds.y.value()) || !s.h.value().same_shape(ds.h.value()) ||
        s.c.has_value() != ds.c.has_value() ||
        (s.c && !s.c->value().same_shape(ds.c->value()))) {
        throw DimensionError("vector field output shapes do not match state shapes");
    }
}

/// base + sum_i coef_i * term_i, per component, on the tape.
OdeState state_lincomb(const OdeState& base,
                       const std::vector<std::pair<double, const OdeState*>>& terms) {
    Tape* tape = base.y.tape;
    auto base_c = components(base);
    std::vector<Var> out;
    out.reserve(base_c.size());
    for (std::size_t ci = 0; ci < base_c.size(); ++ci) {
        Var acc = base_c[ci];
        for (const auto& [coef, term] : terms) {
            acc = tape->add(acc, tape->scale(components(*term)[ci], coef));
        }
        out.push_back(acc);
    }
    return from_components(base, out);
}

}  // namespace

OdeState euler_step(const VectorField& f, const OdeState& s, double t, double dt) {
    if (dt <= 0.0) throw UsageError("euler_step: dt must be positive");
    OdeState k1 = f(s, t);
    check_field_shapes(s, k1);
    return state_lincomb(s, {{dt, &k1}});
}

OdeState rk4_step(const VectorField& f, const OdeState& s, double t, double dt) {
    if (dt <= 0.0) throw UsageError("rk4_step: dt must be positive");
    OdeState k1 = f(s, t);
    check_field_shapes(s, k1);
    OdeState s2 = state_lincomb(s, {{dt / 2.0, &k1}});
    OdeState k2 = f(s2, t + dt / 2.0);
    OdeState s3 = state_lincomb(s, {{dt / 2.0, &k2}});
    OdeState k3 = f(s3, t + dt / 2.0);
    OdeState s4 = state_lincomb(s, {{dt, &k3}});
    OdeState k4 = f(s4, t + dt);
    return state_lincomb(s, {{dt / 6.0, &k1}, {dt / 3.0, &k2}, {dt / 3.0, &k3}, {dt / 6.0, &k4}});
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights equal the last a-row; e = b5 - b4 gives the error estimate.
constexpr double kE[7] = {71.0 / 57600, 0.0,           -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

struct AdaptiveStepper {
    const VectorField& f;
    const SolverConfig& cfg;
    std::int64_t attempts = 0;

    // Advances s from t by at most h_try, landing exactly at t_end when close.
    // Returns the accepted step size taken and the suggestion for the next one.
    OdeState step_to(OdeState s, double t_start, double t_end, double& h, std::int64_t& steps) {
        double t = t_start;
        while (t < t_end) {
            double dt = std::min(h, t_end - t);
            OdeState k[7];
            k[0] = f(s, t);
            check_field_shapes(s, k[0]);
            for (int stage = 1; stage < 7; ++stage) {
                std::vector<std::pair<double, const OdeState*>> terms;
                for (int j = 0; j < stage; ++j) {
                    if (kA[stage][j] != 0.0) terms.push_back({dt * kA[stage][j], &k[j]});
                }
                OdeState sj = state_lincomb(s, terms);
                k[stage] = f(sj, t + kC[stage] * dt);
            }
            // 5th-order solution; stage 7 was evaluated at it (c7 = 1, a7 = b5).
            std::vector<std::pair<double, const OdeState*>> terms;
            for (int j = 0; j < 6; ++j) {
                if (kA[6][j] != 0.0) terms.push_back({dt * kA[6][j], &k[j]});
            }
            OdeState s_new = state_lincomb(s, terms);

            // Scaled RMS error norm over all state components, value-only.
            double sumsq = 0.0;
            std::int64_t count = 0;
            auto old_c = components(s);
            auto new_c = components(s_new);
            for (std::size_t ci = 0; ci < old_c.size(); ++ci) {
                const Tensor& yo = old_c[ci].value();
                const Tensor& yn = new_c[ci].value();
                for (std::int64_t e = 0; e < yo.size(); ++e) {
                    double err = 0.0;
                    for (int j = 0; j < 7; ++j) {
                        err += kE[j] * components(k[j])[ci].value().at(e);
                    }
                    err *= dt;
                    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(yo.at(e)), std::abs(yn.at(e)));
                    sumsq += (err / sc) * (err / sc);
                    ++count;
                }
            }
            const double norm = std::sqrt(sumsq / static_cast<double>(count));
            if (++attempts > cfg.max_steps) {
                throw BudgetError("adaptive solver exceeded max_steps = " + std::to_string(cfg.max_steps));
            }
            double factor = (norm == 0.0) ? 5.0 : 0.9 * std::pow(norm, -0.2);
            factor = std::clamp(factor, 0.2, 5.0);
            if (norm <= 1.0) {
                t += dt;
                s = s_new;
                ++steps;
                h = dt * factor;
            } else {
                h = dt * factor;
            }
        }
        return s;
    }
};

double default_fixed_step(const std::vector<double>& times) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < times.size(); ++i) min_gap = std::min(min_gap, times[i] - times[i - 1]);
    return std::isfinite(min_gap) ? min_gap / 4.0 : 1.0;
}

}  // namespace

IntegrationResult integrate(const VectorField& f, const OdeState& s0,
                            const std::vector<double>& query_times, const SolverConfig& cfg) {
    if (query_times.empty()) throw UsageError("integrate: need at least one query time");
    for (std::size_t i = 1; i < query_times.size(); ++i) {
        if (!(query_times[i] > query_times[i - 1])) {
            throw UsageError("integrate: query times must be strictly increasing (index " +
                             std::to_string(i) + ")");
        }
    }
    if (cfg.max_steps < 1) throw UsageError("integrate: max_steps must be >= 1");

    IntegrationResult res;
    res.states.push_back(s0);
    if (query_times.size() == 1) return res;

    if (cfg.method == SolverMethod::Rk45Adaptive) {
        if (cfg.rtol <= 0.0 || cfg.atol <= 0.0) throw UsageError("integrate: rtol/atol must be positive");
        AdaptiveStepper stepper{f, cfg};
        OdeState s = s0;
        double h = query_times[1] - query_times[0];
        for (std::size_t i = 1; i < query_times.size(); ++i) {
            s = stepper.step_to(s, query_times[i - 1], query_times[i], h, res.steps);
            res.states.push_back(s);
        }
        return res;
    }

    const double step = (cfg.fixed_step > 0.0) ? cfg.fixed_step : default_fixed_step(query_times);
    OdeState s = s0;
    for (std::size_t i = 1; i < query_times.size(); ++i) {
        const double gap = query_times[i] - query_times[i - 1];
        const auto nsub = static_cast<std::int64_t>(std::ceil(gap / step - 1e-12));
        const double dt = gap / static_cast<double>(std::max<std::int64_t>(nsub, 1));
        for (std::int64_t j = 0; j < std::max<std::int64_t>(nsub, 1); ++j) {
            if (res.steps >= cfg.max_steps) {
                throw BudgetError("solver exceeded max_steps = " + std::to_string(cfg.max_steps));
            }
            const double t = query_times[i - 1] + dt * static_cast<double>(j);
            s = (cfg.method == SolverMethod::Euler) ? euler_step(f, s, t, dt) : rk4_step(f, s, t, dt);
            ++res.steps;
        }
        res.states.push_back(s);
    }
    return res;
}

SolverMethod parse_solver_method(const std::string& name) {
    if (name == "euler") return SolverMethod::Euler;
    if (name == "rk4") return SolverMethod::Rk4;
    if (name == "rk45" || name == "rk45-adaptive") return SolverMethod::Rk45Adaptive;
    throw UsageError("unknown solver method: " + name);
}

std::string solver_method_name(SolverMethod m) {
    switch (m) {
        case SolverMethod::Euler: return "euler";
        case SolverMethod::Rk4: return "rk4";
        case SolverMethod::Rk45Adaptive: return "rk45-adaptive";
    }
    return "?";
}

}  // namespace odernn
