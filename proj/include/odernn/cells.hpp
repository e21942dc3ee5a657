#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "odernn/odesolve.hpp"

namespace odernn {

enum class GruFieldVariant { PaperLiteral, Contractive };

/// GRU weights. W_* map the observable, U_* the hidden state; W_o/b_o is the
/// sigmoid read-out that doubles as the observable derivative.
struct GruParams {
    std::int64_t d_obs = 0, d_h = 0;
    Tensor W_r, U_r, b_r;
    Tensor W_z, U_z, b_z;
    Tensor W_h, U_h, b_h;
    Tensor W_o, b_o;

    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;
};

/// LSTM weights with optional (default-off) peephole vectors and a linear
/// read-out mapping the gated cell output to observable dimension.
struct LstmParams {
    std::int64_t d_obs = 0, d_h = 0;
    bool peepholes = false;
    Tensor W_xi, W_hi, b_i;
    Tensor W_xf, W_hf, b_f;
    Tensor W_xc, W_hc, b_c;
    Tensor W_xo, W_ho, b_o;
    Tensor w_ci, w_cf, w_co;
    Tensor W_out, b_out;

    /// Trainable tensors only: peephole vectors are listed iff enabled.
    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;
};

GruParams init_gru_params(std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed);
LstmParams init_lstm_params(std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed,
                            bool peepholes = false);

/// Parameter tensors lifted onto a tape as leaves, so gradients reach them.
struct GruVars {
    Var W_r, U_r, b_r, W_z, U_z, b_z, W_h, U_h, b_h, W_o, b_o;
};
struct LstmVars {
    Var W_xi, W_hi, b_i, W_xf, W_hf, b_f, W_xc, W_hc, b_c, W_xo, W_ho, b_o;
    Var w_ci, w_cf, w_co;
    Var W_out, b_out;
};

GruVars lift(Tape& tape, const GruParams& p);
LstmVars lift(Tape& tape, const LstmParams& p);

struct GruGates {
    Var r, z, h_cand, o;
};

/// r = sig(W_r x + U_r h + b_r); z = sig(W_z x + U_z h + b_z);
/// h_cand = tanh(W_h x + U_h (r.h) + b_h); o = sig(W_o h + b_o).
GruGates gru_gates(Var x, Var h, const GruVars& p);

/// dh/dt = (1-z).h_cand   (paper-literal)
///       = (1-z).(h_cand - h)  (contractive)
/// dy/dt = sig(W_o h + b_o).
OdeState ode_gru_field(const OdeState& s, const GruVars& p,
                       GruFieldVariant variant = GruFieldVariant::PaperLiteral);

struct LstmGates {
    Var i, f, g, c_new, o, h_out;
};

/// i = sig(W_xi x + W_hi h + w_ci.c + b_i); f likewise; g = tanh(...);
/// c_new = f.c + i.g; o = sig(W_xo x + W_ho h + w_co.c_new + b_o);
/// h_out = o.tanh(c_new).
LstmGates lstm_gates(Var x, Var h, Var c, const LstmVars& p);

/// dc/dt = f.c + i.g; dh/dt = o.(dc/dt); dy/dt = W_out (o.tanh(c)) + b_out.
OdeState ode_lstm_field(const OdeState& s, const LstmVars& p);

/// h_next = (1-z).h + z.h_cand
Var discrete_gru_step(Var x, Var h, const GruVars& p);
/// (h_next, c_next) from one conventional LSTM update.
std::pair<Var, Var> discrete_lstm_step(Var x, Var h, Var c, const LstmVars& p);

GruFieldVariant parse_gru_variant(const std::string& name);
std::string gru_variant_name(GruFieldVariant v);

}  // namespace odernn
