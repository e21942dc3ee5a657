// Acceptance checks for the trained-from-scratch continuous-time RNN stack.
// Each check prints one PASS/FAIL line; the process exits 0 only if all pass.
// argv[1] must be the path to the odernn CLI binary (used by the determinism
// and compare-mode checks, which exercise the tool end to end).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "odernn/cells.hpp"
#include "odernn/checkpoint.hpp"
#include "odernn/data.hpp"
#include "odernn/odesolve.hpp"
#include "odernn/training.hpp"

namespace fs = std::filesystem;
using namespace odernn;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Deterministic irregular timestamps on [0, span].
std::vector<double> irregular(std::mt19937_64& rng, std::size_t n, double span) {
    std::vector<double> t(n);
    for (auto& v : t) v = span * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    std::sort(t.begin(), t.end());
    for (std::size_t i = 1; i < n; ++i) {
        if (t[i] <= t[i - 1]) t[i] = t[i - 1] + 1e-9;
    }
    return t;
}

// ---- 1. gradient soundness ------------------------------------------------

void criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(13);
    TimeSeries ts;
    ts.timestamps = irregular(rng, 8, 2.0);
    ts.values = Tensor::zeros({8, 1});
    for (std::int64_t i = 0; i < 8; ++i) {
        ts.values.at(i, 0) = std::exp(-ts.timestamps[static_cast<std::size_t>(i)]) +
                             0.25 * std::sin(3.0 * ts.timestamps[static_cast<std::size_t>(i)]);
    }
    TrainConfig cfg;
    cfg.solver.method = SolverMethod::Rk4;
    cfg.solver.fixed_step = 0.1;
    double worst = 0.0;
    for (auto kind : {ModelKind::OdeGru, ModelKind::OdeLstm}) {
        Model model = make_model(kind, 1, 4, 21);
        worst = std::max(worst, grad_check(model, ts, cfg, 1e-6));
    }
    const double secs = seconds_since(t0);
    report(1, worst < 1e-5 && secs < 30.0,
           "gradcheck worst relative error " + fmt(worst) + " (< 1e-5), " + fmt(secs) + "s");
}

// ---- 2. solver convergence order ------------------------------------------

double growth_error(SolverMethod method, double dt) {
    Tape tape;
    SolverConfig cfg;
    cfg.method = method;
    cfg.fixed_step = dt;
    OdeState s0;
    s0.y = tape.leaf(Tensor::vec({1.0}));
    s0.h = tape.leaf(Tensor::vec({0.0}));
    auto res = integrate(
        [&tape](const OdeState& s, double) {
            OdeState ds;
            ds.y = s.y;  // dy/dt = y
            ds.h = tape.scale(s.h, 0.0);
            return ds;
        },
        s0, {0.0, 1.0}, cfg);
    return std::abs(res.states.back().y.value().at(0) - std::exp(1.0));
}

void criterion_orders() {
    const auto t0 = std::chrono::steady_clock::now();
    const double e_eu = growth_error(SolverMethod::Euler, 0.1);
    const double e_eu2 = growth_error(SolverMethod::Euler, 0.05);
    const double order_eu = std::log2(e_eu / e_eu2);
    const double e_rk = growth_error(SolverMethod::Rk4, 0.1);
    const double e_rk2 = growth_error(SolverMethod::Rk4, 0.05);
    const double order_rk = std::log2(e_rk / e_rk2);
    const double secs = seconds_since(t0);
    const bool pass = std::abs(order_eu - 1.0) < 0.1 && std::abs(order_rk - 4.0) < 0.2 &&
                      secs < 1.0;
    report(2, pass,
           "euler order " + fmt(order_eu) + " (1.0±0.1), rk4 order " + fmt(order_rk) +
               " (4.0±0.2), " + fmt(secs) + "s");
}

// ---- 3. zero-field constancy ----------------------------------------------

void criterion_zero_field() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(99);
    auto times = irregular(rng, 1000, 50.0);
    bool pass = true;
    for (auto method : {SolverMethod::Euler, SolverMethod::Rk4}) {
        Tape tape;
        SolverConfig cfg;
        cfg.method = method;
        cfg.fixed_step = 0.37;
        Tensor y0 = Tensor::vec({0.1, -2.5, 1e-8});
        Tensor h0 = Tensor::vec({3.0, -0.75});
        OdeState s0;
        s0.y = tape.leaf(y0);
        s0.h = tape.leaf(h0);
        auto res = integrate(
            [&tape](const OdeState& s, double) {
                OdeState ds;
                ds.y = tape.scale(s.y, 0.0);
                ds.h = tape.scale(s.h, 0.0);
                return ds;
            },
            s0, times, cfg);
        for (const auto& st : res.states) {
            pass = pass && st.y.value().data == y0.data && st.h.value().data == h0.data;
        }
    }
    const double secs = seconds_since(t0);
    report(3, pass && secs < 1.0,
           std::string("zero field over 1000 irregular points, state bit-identical ") +
               (pass ? "for euler and rk4" : "VIOLATED") + ", " + fmt(secs) + "s");
}

// ---- 4. gate-oracle equivalence --------------------------------------------

double sig(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

std::vector<double> affine(const Tensor& W, const std::vector<double>& x, const Tensor& b) {
    std::vector<double> out(static_cast<std::size_t>(W.shape[0]));
    for (std::int64_t i = 0; i < W.shape[0]; ++i) {
        double acc = b.at(i);
        for (std::int64_t j = 0; j < W.shape[1]; ++j) acc += W.at(i, j) * x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

void criterion_gate_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(7);
    auto u = [&rng]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::int64_t d_obs = 1 + static_cast<std::int64_t>(rng() % 4);
        const std::int64_t d_h = 1 + static_cast<std::int64_t>(rng() % 6);
        const bool peep = (inst % 2) == 1;
        GruParams gp = init_gru_params(d_obs, d_h, rng());
        LstmParams lp = init_lstm_params(d_obs, d_h, rng(), peep);
        std::vector<double> x(static_cast<std::size_t>(d_obs)), h(static_cast<std::size_t>(d_h)),
            c(static_cast<std::size_t>(d_h));
        for (auto& v : x) v = u();
        for (auto& v : h) v = u();
        for (auto& v : c) v = u();

        Tape tape;
        Tensor tx = Tensor::zeros({d_obs}), th = Tensor::zeros({d_h}), tc = Tensor::zeros({d_h});
        tx.data = x;
        th.data = h;
        tc.data = c;
        GruGates gg = gru_gates(tape.leaf(tx), tape.leaf(th), lift(tape, gp));
        LstmGates lg = lstm_gates(tape.leaf(tx), tape.leaf(th), tape.leaf(tc), lift(tape, lp));

        // scalar-loop oracle, gru: r, z, candidate, observable rate
        auto r = affine(gp.W_r, x, Tensor::zeros({d_h}));
        auto z = affine(gp.W_z, x, Tensor::zeros({d_h}));
        auto hc = affine(gp.W_h, x, Tensor::zeros({d_h}));
        for (std::int64_t i = 0; i < d_h; ++i) {
            double ar = gp.b_r.at(i), az = gp.b_z.at(i);
            for (std::int64_t j = 0; j < d_h; ++j) {
                ar += gp.U_r.at(i, j) * h[static_cast<std::size_t>(j)];
                az += gp.U_z.at(i, j) * h[static_cast<std::size_t>(j)];
            }
            r[static_cast<std::size_t>(i)] = sig(r[static_cast<std::size_t>(i)] + ar);
            z[static_cast<std::size_t>(i)] = sig(z[static_cast<std::size_t>(i)] + az);
        }
        for (std::int64_t i = 0; i < d_h; ++i) {
            double acc = gp.b_h.at(i);
            for (std::int64_t j = 0; j < d_h; ++j) {
                acc += gp.U_h.at(i, j) * r[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
            }
            hc[static_cast<std::size_t>(i)] = std::tanh(hc[static_cast<std::size_t>(i)] + acc);
        }
        auto obs = affine(gp.W_o, h, gp.b_o);
        for (auto& v : obs) v = sig(v);
        for (std::int64_t i = 0; i < d_h; ++i) {
            worst = std::max(worst, std::abs(gg.r.value().at(i) - r[static_cast<std::size_t>(i)]));
            worst = std::max(worst, std::abs(gg.z.value().at(i) - z[static_cast<std::size_t>(i)]));
            worst = std::max(worst, std::abs(gg.h_cand.value().at(i) - hc[static_cast<std::size_t>(i)]));
        }
        for (std::int64_t i = 0; i < d_obs; ++i) {
            worst = std::max(worst, std::abs(gg.o.value().at(i) - obs[static_cast<std::size_t>(i)]));
        }

        // scalar-loop oracle, lstm: i, f, g, c_new, o, h_out
        auto gi = affine(lp.W_xi, x, lp.b_i);
        auto gf = affine(lp.W_xf, x, lp.b_f);
        auto gc = affine(lp.W_xc, x, lp.b_c);
        auto go = affine(lp.W_xo, x, lp.b_o);
        for (std::int64_t i = 0; i < d_h; ++i) {
            for (std::int64_t j = 0; j < d_h; ++j) {
                const double hj = h[static_cast<std::size_t>(j)];
                gi[static_cast<std::size_t>(i)] += lp.W_hi.at(i, j) * hj;
                gf[static_cast<std::size_t>(i)] += lp.W_hf.at(i, j) * hj;
                gc[static_cast<std::size_t>(i)] += lp.W_hc.at(i, j) * hj;
                go[static_cast<std::size_t>(i)] += lp.W_ho.at(i, j) * hj;
            }
        }
        std::vector<double> cn(static_cast<std::size_t>(d_h)), ho(static_cast<std::size_t>(d_h));
        for (std::int64_t i = 0; i < d_h; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double ii = sig(gi[k] + lp.w_ci.at(i) * c[k]);
            const double ff = sig(gf[k] + lp.w_cf.at(i) * c[k]);
            const double g = std::tanh(gc[k]);
            cn[k] = ff * c[k] + ii * g;
            const double oo = sig(go[k] + lp.w_co.at(i) * cn[k]);
            ho[k] = oo * std::tanh(cn[k]);
            worst = std::max(worst, std::abs(lg.i.value().at(i) - ii));
            worst = std::max(worst, std::abs(lg.f.value().at(i) - ff));
            worst = std::max(worst, std::abs(lg.g.value().at(i) - g));
            worst = std::max(worst, std::abs(lg.c_new.value().at(i) - cn[k]));
            worst = std::max(worst, std::abs(lg.o.value().at(i) - oo));
            worst = std::max(worst, std::abs(lg.h_out.value().at(i) - ho[k]));
        }
    }
    const double secs = seconds_since(t0);
    report(4, worst < 1e-12 && secs < 5.0,
           "100 gate instances, worst |gate - oracle| " + fmt(worst) + " (< 1e-12), " +
               fmt(secs) + "s");
}

// ---- 5. spiral learning ----------------------------------------------------

void criterion_spiral() {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset ds = gen_spiral(100, 100, 42, 0.02);
    Model model = make_model(ModelKind::OdeGru, 2, 50, 1, GruFieldVariant::Contractive);
    TrainConfig cfg;
    cfg.iterations = 200;
    cfg.optimizer = Optimizer::Adam;
    cfg.learning_rate = 1e-2;
    cfg.seed = 1;
    cfg.field_variant = GruFieldVariant::Contractive;
    cfg.solver.method = SolverMethod::Euler;
    cfg.solver.fixed_step = 0.5;
    cfg.batch_size = 50;
    cfg.log_every = 1;
    TrainReport rep = train(model, ds, cfg);
    const double first = rep.records.front().loss;
    const double last = rep.records.back().loss;
    const double secs = seconds_since(t0);
    report(5, last < 0.1 * first && secs < 600.0,
           "spiral mse " + fmt(first) + " -> " + fmt(last) + " after 200 iterations (ratio " +
               fmt(last / first) + " < 0.1), " + fmt(secs) + "s");
}

// ---- 6. curve learning -----------------------------------------------------

void criterion_curves() {
    bool pass = true;
    std::string detail;
    for (int which = 0; which < 2; ++which) {
        const auto t0 = std::chrono::steady_clock::now();
        TimeSeries ts = which == 0 ? gen_eight_curve(100, 11) : gen_triknot(100, 11);
        Model model = make_model(ModelKind::OdeGru, 2, 50, 1, GruFieldVariant::Contractive);
        TrainConfig cfg;
        cfg.iterations = 20;
        cfg.learning_rate = 1e-2;
        cfg.seed = 1;
        cfg.field_variant = GruFieldVariant::Contractive;
        cfg.solver.method = SolverMethod::Euler;
        cfg.solver.fixed_step = 0.1;
        TrainReport rep = train(model, ts, cfg);
        const double first = rep.records.front().loss;
        const double last = rep.records.back().loss;
        const double secs = seconds_since(t0);
        pass = pass && last < 0.5 * first && secs < 120.0;
        detail += std::string(which == 0 ? "eight " : "; triknot ") + fmt(first) + " -> " +
                  fmt(last) + " in " + fmt(secs) + "s";
    }
    report(6, pass, detail + " (loss at iteration 20 < 50% of iteration 1)");
}

// ---- 7/8. CLI determinism and compare mode ---------------------------------

int run_cli(const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return rc;
}

void criterion_determinism(const std::string& cli, const fs::path& work) {
    const fs::path data = work / "spiral_small.csv";
    const fs::path run1 = work / "run1";
    const fs::path run2 = work / "run2";
    fs::create_directories(run1);
    fs::create_directories(run2);
    bool pass = run_cli(cli + " generate spiral --series 10 --points 30 --seed 5 --out " +
                        data.string()) == 0;
    const std::string train_cmd = cli +
        " train --model ode-gru --data " + data.string() +
        " --hidden 8 --iters 15 --lr 1e-2 --seed 3 --solver euler --step 0.5 --out ";
    pass = pass && run_cli(train_cmd + run1.string()) == 0;
    pass = pass && run_cli(train_cmd + run2.string()) == 0;
    const bool metrics_same = slurp(run1 / "metrics.csv") == slurp(run2 / "metrics.csv");
    const bool ckpt_same = slurp(run1 / "checkpoint.json") == slurp(run2 / "checkpoint.json");
    pass = pass && metrics_same && ckpt_same && !slurp(run1 / "metrics.csv").empty();
    report(7, pass,
           std::string("repeated train run: metrics.csv ") +
               (metrics_same ? "byte-identical" : "DIFFERS") + ", checkpoint.json " +
               (ckpt_same ? "byte-identical" : "DIFFERS"));
}

void criterion_compare(const std::string& cli, const fs::path& work) {
    // regular grid: the discrete baseline assumes uniform sampling
    const fs::path data = work / "regular.csv";
    {
        std::ofstream out(data);
        out << "series_id,time,v1,v2\n";
        for (int i = 0; i < 40; ++i) {
            const double t = 0.1 * i;
            out << "curve," << t << "," << std::sin(t) << "," << std::sin(t) * std::cos(t) << "\n";
        }
    }
    const fs::path dir = work / "compare";
    fs::create_directories(dir);
    bool pass = run_cli(cli + " train --model ode-gru --data " + data.string() +
                        " --hidden 8 --iters 10 --seed 2 --solver euler --step 0.05 --compare --out " +
                        dir.string()) == 0;
    std::ifstream in(dir / "metrics_compare.csv");
    std::string header;
    pass = pass && static_cast<bool>(std::getline(in, header));
    pass = pass && header == "iteration,loss_ode-gru,loss_discrete-gru";
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string it, l1, l2;
        pass = pass && std::getline(ss, it, ',') && std::getline(ss, l1, ',') &&
               std::getline(ss, l2, ',');
        pass = pass && std::isfinite(std::stod(l1)) && std::isfinite(std::stod(l2));
        ++rows;
    }
    pass = pass && rows == 10;
    report(8, pass,
           "compare mode wrote joint metrics with header + " + std::to_string(rows) +
               " finite rows for both models");
}

// ---- 9. checkpoint round-trip ----------------------------------------------

void criterion_roundtrip(const fs::path& work) {
    bool pass = true;
    std::mt19937_64 rng(31);
    for (int i = 0; i < 10; ++i) {
        const auto kinds = std::vector<ModelKind>{ModelKind::OdeGru, ModelKind::OdeLstm,
                                                  ModelKind::DiscreteGru, ModelKind::DiscreteLstm};
        Model model = make_model(kinds[static_cast<std::size_t>(i) % 4],
                                 1 + static_cast<std::int64_t>(rng() % 3),
                                 1 + static_cast<std::int64_t>(rng() % 8), rng(),
                                 GruFieldVariant::PaperLiteral, (i % 3) == 0);
        nlohmann::json config = {{"round", i}, {"note", "acceptance"}};
        const fs::path p1 = work / ("ck_" + std::to_string(i) + "_a.json");
        const fs::path p2 = work / ("ck_" + std::to_string(i) + "_b.json");
        save_checkpoint(model, config, 0.125 * i, p1.string());
        LoadedCheckpoint loaded = load_checkpoint(p1.string());
        save_checkpoint(loaded.model, loaded.run_config, loaded.final_loss, p2.string());
        pass = pass && !slurp(p1).empty() && slurp(p1) == slurp(p2);
    }
    report(9, pass, "save -> load -> save byte-identical across 10 random models");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-odernn-cli>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = fs::temp_directory_path() / "odernn_acceptance";
    std::error_code ec;
    fs::remove_all(work, ec);
    fs::create_directories(work);

    criterion_gradients();
    criterion_orders();
    criterion_zero_field();
    criterion_gate_oracles();
    criterion_spiral();
    criterion_curves();
    criterion_determinism(cli, work);
    criterion_compare(cli, work);
    criterion_roundtrip(work);

    if (g_failures == 0) {
        std::printf("all 9 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
