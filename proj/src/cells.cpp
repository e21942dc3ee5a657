#include "odernn/cells.hpp"

#include <cmath>
#include <random>

namespace odernn {

namespace {

// Portable uniform in [-a, a): top 53 bits of mt19937_64 output, so results
// do not depend on the standard library's distribution internals.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : rng_(seed) {}

    double symmetric(double a) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0,1)
        return a * (2.0 * u - 1.0);
    }

    Tensor glorot(std::int64_t rows, std::int64_t cols) {
        const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Tensor t = Tensor::zeros({rows, cols});
        for (auto& v : t.data) v = symmetric(a);
        return t;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace

std::vector<std::pair<std::string, Tensor*>> GruParams::named() {
    return {{"W_r", &W_r}, {"U_r", &U_r}, {"b_r", &b_r}, {"W_z", &W_z},
            {"U_z", &U_z}, {"b_z", &b_z}, {"W_h", &W_h}, {"U_h", &U_h},
            {"b_h", &b_h}, {"W_o", &W_o}, {"b_o", &b_o}};
}

std::vector<std::pair<std::string, const Tensor*>> GruParams::named() const {
    auto mut = const_cast<GruParams*>(this)->named();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mut.size());
    for (auto& [k, v] : mut) out.emplace_back(k, v);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> LstmParams::named() {
    std::vector<std::pair<std::string, Tensor*>> out = {
        {"W_xi", &W_xi}, {"W_hi", &W_hi}, {"b_i", &b_i}, {"W_xf", &W_xf}, {"W_hf", &W_hf},
        {"b_f", &b_f},   {"W_xc", &W_xc}, {"W_hc", &W_hc}, {"b_c", &b_c}, {"W_xo", &W_xo},
        {"W_ho", &W_ho}, {"b_o", &b_o},   {"W_out", &W_out}, {"b_out", &b_out}};
    if (peepholes) {
        out.insert(out.end(), {{"w_ci", &w_ci}, {"w_cf", &w_cf}, {"w_co", &w_co}});
    }
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> LstmParams::named() const {
    auto mut = const_cast<LstmParams*>(this)->named();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mut.size());
    for (auto& [k, v] : mut) out.emplace_back(k, v);
    return out;
}

GruParams init_gru_params(std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed) {
    if (d_obs < 1 || d_h < 1) throw UsageError("init_gru_params: dimensions must be >= 1");
    UniformSource src(seed);
    GruParams p;
    p.d_obs = d_obs;
    p.d_h = d_h;
    p.W_r = src.glorot(d_h, d_obs);
    p.U_r = src.glorot(d_h, d_h);
    p.b_r = Tensor::zeros({d_h});
    p.W_z = src.glorot(d_h, d_obs);
    p.U_z = src.glorot(d_h, d_h);
    p.b_z = Tensor::zeros({d_h});
    p.W_h = src.glorot(d_h, d_obs);
    p.U_h = src.glorot(d_h, d_h);
    p.b_h = Tensor::zeros({d_h});
    p.W_o = src.glorot(d_obs, d_h);
    p.b_o = Tensor::zeros({d_obs});
    return p;
}

LstmParams init_lstm_params(std::int64_t d_obs, std::int64_t d_h, std::uint64_t seed,
                            bool peepholes) {
    if (d_obs < 1 || d_h < 1) throw UsageError("init_lstm_params: dimensions must be >= 1");
    UniformSource src(seed);
    LstmParams p;
    p.d_obs = d_obs;
    p.d_h = d_h;
    p.peepholes = peepholes;
    p.W_xi = src.glorot(d_h, d_obs);
    p.W_hi = src.glorot(d_h, d_h);
    p.b_i = Tensor::zeros({d_h});
    p.W_xf = src.glorot(d_h, d_obs);
    p.W_hf = src.glorot(d_h, d_h);
    p.b_f = Tensor::zeros({d_h});
    p.W_xc = src.glorot(d_h, d_obs);
    p.W_hc = src.glorot(d_h, d_h);
    p.b_c = Tensor::zeros({d_h});
    p.W_xo = src.glorot(d_h, d_obs);
    p.W_ho = src.glorot(d_h, d_h);
    p.b_o = Tensor::zeros({d_h});
    p.w_ci = Tensor::zeros({d_h});
    p.w_cf = Tensor::zeros({d_h});
    p.w_co = Tensor::zeros({d_h});
    p.W_out = src.glorot(d_obs, d_h);
    p.b_out = Tensor::zeros({d_obs});
    return p;
}

GruVars lift(Tape& tape, const GruParams& p) {
    return GruVars{tape.leaf(p.W_r), tape.leaf(p.U_r), tape.leaf(p.b_r),
                   tape.leaf(p.W_z), tape.leaf(p.U_z), tape.leaf(p.b_z),
                   tape.leaf(p.W_h), tape.leaf(p.U_h), tape.leaf(p.b_h),
                   tape.leaf(p.W_o), tape.leaf(p.b_o)};
}

LstmVars lift(Tape& tape, const LstmParams& p) {
    return LstmVars{tape.leaf(p.W_xi), tape.leaf(p.W_hi), tape.leaf(p.b_i),
                    tape.leaf(p.W_xf), tape.leaf(p.W_hf), tape.leaf(p.b_f),
                    tape.leaf(p.W_xc), tape.leaf(p.W_hc), tape.leaf(p.b_c),
                    tape.leaf(p.W_xo), tape.leaf(p.W_ho), tape.leaf(p.b_o),
                    tape.leaf(p.w_ci), tape.leaf(p.w_cf), tape.leaf(p.w_co),
                    tape.leaf(p.W_out), tape.leaf(p.b_out)};
}

GruGates gru_gates(Var x, Var h, const GruVars& p) {
    Tape& t = *x.tape;
    GruGates g;
    g.r = t.sigmoid(t.add(t.add(t.matmul(p.W_r, x), t.matmul(p.U_r, h)), p.b_r));
    g.z = t.sigmoid(t.add(t.add(t.matmul(p.W_z, x), t.matmul(p.U_z, h)), p.b_z));
    g.h_cand = t.tanh(t.add(t.add(t.matmul(p.W_h, x), t.matmul(p.U_h, t.mul(g.r, h))), p.b_h));
    g.o = t.sigmoid(t.add(t.matmul(p.W_o, h), p.b_o));
    return g;
}

OdeState ode_gru_field(const OdeState& s, const GruVars& p, GruFieldVariant variant) {
    if (s.c) throw UsageError("ode_gru_field: state must not carry a cell component");
    Tape& t = *s.y.tape;
    GruGates g = gru_gates(s.y, s.h, p);
    Var one = t.leaf(Tensor::full(g.z.value().shape, 1.0));
    Var one_minus_z = t.sub(one, g.z);
    Var dh = (variant == GruFieldVariant::PaperLiteral)
                 ? t.mul(one_minus_z, g.h_cand)
                 : t.mul(one_minus_z, t.sub(g.h_cand, s.h));
    OdeState ds;
    ds.y = g.o;
    ds.h = dh;
    return ds;
}

LstmGates lstm_gates(Var x, Var h, Var c, const LstmVars& p) {
    Tape& t = *x.tape;
    LstmGates g;
    g.i = t.sigmoid(t.add(t.add(t.add(t.matmul(p.W_xi, x), t.matmul(p.W_hi, h)),
                                t.mul(p.w_ci, c)),
                          p.b_i));
    g.f = t.sigmoid(t.add(t.add(t.add(t.matmul(p.W_xf, x), t.matmul(p.W_hf, h)),
                                t.mul(p.w_cf, c)),
                          p.b_f));
    g.g = t.tanh(t.add(t.add(t.matmul(p.W_xc, x), t.matmul(p.W_hc, h)), p.b_c));
    g.c_new = t.add(t.mul(g.f, c), t.mul(g.i, g.g));
    g.o = t.sigmoid(t.add(t.add(t.add(t.matmul(p.W_xo, x), t.matmul(p.W_ho, h)),
                                t.mul(p.w_co, g.c_new)),
                          p.b_o));
    g.h_out = t.mul(g.o, t.tanh(g.c_new));
    return g;
}

OdeState ode_lstm_field(const OdeState& s, const LstmVars& p) {
    if (!s.c) throw UsageError("ode_lstm_field: state must carry a cell component");
    Tape& t = *s.y.tape;
    LstmGates g = lstm_gates(s.y, s.h, *s.c, p);
    Var dc = t.add(t.mul(g.f, *s.c), t.mul(g.i, g.g));
    Var dh = t.mul(g.o, dc);
    Var dy = t.add(t.matmul(p.W_out, t.mul(g.o, t.tanh(*s.c))), p.b_out);
    OdeState ds;
    ds.y = dy;
    ds.h = dh;
    ds.c = dc;
    return ds;
}

Var discrete_gru_step(Var x, Var h, const GruVars& p) {
    Tape& t = *x.tape;
    GruGates g = gru_gates(x, h, p);
    Var one = t.leaf(Tensor::full(g.z.value().shape, 1.0));
    return t.add(t.mul(t.sub(one, g.z), h), t.mul(g.z, g.h_cand));
}

std::pair<Var, Var> discrete_lstm_step(Var x, Var h, Var c, const LstmVars& p) {
    LstmGates g = lstm_gates(x, h, c, p);
    return {g.h_out, g.c_new};
}

GruFieldVariant parse_gru_variant(const std::string& name) {
    if (name == "paper-literal" || name == "paper_literal") return GruFieldVariant::PaperLiteral;
    if (name == "contractive") return GruFieldVariant::Contractive;
    throw UsageError("unknown field variant: " + name);
}

std::string gru_variant_name(GruFieldVariant v) {
    return v == GruFieldVariant::PaperLiteral ? "paper-literal" : "contractive";
}

}  // namespace odernn
