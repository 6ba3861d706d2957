// End-to-end acceptance harness. Each check prints one [PASS]/[FAIL]
// line; the exit code is the number of failed checks. The gearshift CLI
// path is taken from argv[1] for the artifact-determinism check.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gs/cycle.hpp"
#include "gs/io.hpp"
#include "gs/mpc.hpp"
#include "gs/nn.hpp"
#include "gs/ocp.hpp"
#include "gs/vehicle.hpp"

using namespace gs;
namespace fs = std::filesystem;

namespace {

struct Env {
    VehicleParams p;
    MotorModel mm;
    DrivingCycle cycle;
    std::vector<Scenario> wins;
    std::string cli;  // gearshift binary, may be empty

    // Filled by the training check, reused by the closed-loop and
    // timing checks.
    bool trained = false;
    MlpParams params;
};

std::string fm(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> sample_indices(std::mt19937_64& rng, std::size_t n, std::size_t count) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(count);
    for (std::size_t& i : idx) i = pick(rng);
    return idx;
}

// ---------------------------------------------------------------------
// 1. The enumeration solver must be optimal against an independent
//    re-enumeration of all 2^N committed plans.

bool check_exhaustive_optimality(Env& env, std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    const std::size_t N = 8;

    for (std::size_t idx : sample_indices(rng, env.wins.size(), 100)) {
        const Scenario& s = env.wins[idx];
        const ExhaustiveResult ex = exhaustive_solve(s, env.p, env.mm);
        if (ex.candidates != 256) {
            detail = "candidate count != 256";
            return false;
        }
        double best = 0.0;
        bool any = false;
        std::size_t feasible = 0;
        std::vector<int> gears(N);
        for (unsigned code = 0; code < 256; ++code) {
            for (std::size_t k = 0; k < N; ++k) gears[k] = static_cast<int>((code >> k) & 1u) + 1;
            const PlanEval pe = rollout_integer(s, gears, env.p, env.mm);
            if (!pe.feasible) continue;
            ++feasible;
            if (ex.x_N > pe.x_N) {
                detail = "a re-enumerated plan beat the solver on window " + std::to_string(idx);
                return false;
            }
            if (!any || pe.x_N < best) best = pe.x_N, any = true;
        }
        if (!any || ex.x_N != best || ex.feasible_candidates != feasible) {
            detail = "solver result does not equal the re-enumerated optimum";
            return false;
        }
    }
    const double dt = seconds_since(t0);
    detail = "100 windows x 256 plans, " + fm("%.2f", dt) + " s";
    return dt < 5.0;
}

// ---------------------------------------------------------------------
// 2. Analytic gradients: the training backward pass against central
//    finite differences of the loss, and the rollout gradient against
//    finite differences of an independently coded recurrence.

double loss_value(const Scenario& s, const MlpParams& params, const TrainConfig& cfg,
                  const VehicleParams& p, const MotorModel& mm) {
    return loss(forward(s, params), s, cfg, p, mm).total;
}

bool check_gradients(Env& env, std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2002);
    NetConfig net;
    TrainConfig cfg;
    cfg.E_ref = 3.0e5;

    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        MlpParams params = init_params(net, 4000 + static_cast<std::uint64_t>(trial));
        for (std::size_t idx : sample_indices(rng, env.wins.size(), 10)) {
            const Scenario& s = env.wins[idx];

            std::vector<Eigen::VectorXd> features{featurize(s, params)};
            std::vector<std::size_t> samples{0};
            std::vector<MlpTensors> grad(1, MlpTensors::zeros(net));
            std::vector<LossParts> parts(1);
            batch_backward_serial(samples, features, std::span<const Scenario>(&s, 1), params,
                                  cfg, env.p, env.mm, 1.0, grad, parts);

            // Probe a random subset of every tensor and compare the two
            // gradients norm-wise, so finite-difference noise on
            // near-zero coordinates cannot dominate.
            double num = 0.0, den = 0.0;
            auto probe_at = [&](double& coord, double an) {
                const double keep = coord;
                coord = keep + h;
                const double up = loss_value(s, params, cfg, env.p, env.mm);
                coord = keep - h;
                const double dn = loss_value(s, params, cfg, env.p, env.mm);
                coord = keep;
                const double fd = (up - dn) / (2.0 * h);
                num += (an - fd) * (an - fd);
                den += fd * fd;
            };
            Eigen::MatrixXd* mats[] = {&params.theta.W1, &params.theta.W2, &params.theta.W3};
            const Eigen::MatrixXd* gmats[] = {&grad[0].W1, &grad[0].W2, &grad[0].W3};
            for (int m = 0; m < 3; ++m)
                for (int probe = 0; probe < 40; ++probe) {
                    const Eigen::Index r = static_cast<Eigen::Index>(rng() % mats[m]->rows());
                    const Eigen::Index c = static_cast<Eigen::Index>(rng() % mats[m]->cols());
                    probe_at((*mats[m])(r, c), (*gmats[m])(r, c));
                }
            Eigen::VectorXd* vecs[] = {&params.theta.b1, &params.theta.b2, &params.theta.b3};
            const Eigen::VectorXd* gvecs[] = {&grad[0].b1, &grad[0].b2, &grad[0].b3};
            for (int m = 0; m < 3; ++m)
                for (int probe = 0; probe < 10; ++probe) {
                    const Eigen::Index r = static_cast<Eigen::Index>(rng() % vecs[m]->size());
                    probe_at((*vecs[m])(r), (*gvecs[m])(r));
                }
            if (den > 1e-20) worst = std::max(worst, std::sqrt(num / den));
        }
    }
    if (worst > 1e-5) {
        detail = "backward vs finite differences: worst relative error " + fm("%.3g", worst);
        return false;
    }

    // Rollout gradient against a plain unchecked recurrence, so the
    // perturbed selector rows need not satisfy the row-sum constraint.
    double worst_ro = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Scenario& s = env.wins[sample_indices(rng, env.wins.size(), 1)[0]];
        const std::size_t N = s.horizon();
        RelaxedPlan plan = RelaxedPlan::uniform(N, 2);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        for (std::size_t k = 0; k < N; ++k) {
            const double b = u(rng);
            plan.at(k, 0) = b;
            plan.at(k, 1) = 1.0 - b;
        }
        const std::vector<double> g = rollout_grad(s, plan, env.p, env.mm);

        auto value = [&](const RelaxedPlan& q) {
            double x = s.x0;
            for (std::size_t k = 0; k < N; ++k) {
                double next = 0.0;
                for (int i = 0; i < 2; ++i)
                    next += q.at(k, static_cast<std::size_t>(i)) *
                            (x + mode_power(s, k, i + 1, env.p, env.mm).power * 1.0);
                x = next;
            }
            return x;
        };
        const double hb = 1e-6;
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t i = 0; i < 2; ++i) {
                RelaxedPlan q = plan;
                q.at(k, i) = plan.at(k, i) + hb;
                const double up = value(q);
                q.at(k, i) = plan.at(k, i) - hb;
                const double dn = value(q);
                const double fd = (up - dn) / (2.0 * hb);
                const double an = g[k * 2 + i];
                worst_ro =
                    std::max(worst_ro, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
            }
        }
    }
    if (worst_ro > 1e-6) {
        detail = "rollout gradient vs finite differences: worst error " + fm("%.3g", worst_ro);
        return false;
    }

    const double dt = seconds_since(t0);
    detail = "backward worst rel err " + fm("%.2g", worst) + ", rollout worst " +
             fm("%.2g", worst_ro) + ", " + fm("%.2f", dt) + " s";
    return dt < 30.0;
}

// ---------------------------------------------------------------------
// 3. Soft-argmax head: fixed-point values at (1.7, 2.0, 1.5), hard
//    saturation at K=50, and monotone sharpening in K.

bool check_soft_argmax(Env&, std::string& detail) {
    Eigen::VectorXd z(3);
    z << 1.7, 2.0, 1.5;
    const Eigen::VectorXd s1 = soft_argmax(z, 1.0);
    const double want[3] = {0.31559783331281435, 0.42601251494920577, 0.25838965173797988};
    for (int i = 0; i < 3; ++i)
        if (std::abs(s1[i] - want[i]) > 1e-9) {
            detail = "K=1 distribution off at component " + std::to_string(i);
            return false;
        }
    if (soft_argmax(z, 50.0).maxCoeff() <= 0.999) {
        detail = "K=50 does not saturate the argmax component";
        return false;
    }

    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double ladder[] = {0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0};
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd v(2 + static_cast<Eigen::Index>(rng() % 3));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
        double prev = 0.0;
        for (double K : ladder) {
            const double m = soft_argmax(v, K).maxCoeff();
            if (m < prev - 1e-15) {
                detail = "max component decreased when K grew";
                return false;
            }
            prev = m;
        }
    }
    detail = "fixed distribution at K=1, saturation at K=50, 1000 monotonicity trials";
    return true;
}

// ---------------------------------------------------------------------
// 4. Training with the shipped defaults drives the selector rows to
//    near-binary values.

bool check_binarity(Env& env, std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    NetConfig net;
    TrainConfig cfg;  // shipped defaults: 300 epochs, seed 4
    const TrainResult tr = train(env.wins, env.p, env.mm, net, cfg);
    env.params = tr.params;
    env.trained = true;
    const double dt = seconds_since(t0);

    double gap = 0.0;
    std::size_t rows = 0, sharp = 0;
    for (const Scenario& s : env.wins) {
        const RelaxedPlan plan = forward(s, env.params);
        gap += binarity_gap(plan);
        for (std::size_t k = 0; k < plan.N; ++k) {
            ++rows;
            if (std::max(plan.at(k, 0), plan.at(k, 1)) > 0.9) ++sharp;
        }
    }
    gap /= static_cast<double>(env.wins.size());
    const double frac = static_cast<double>(sharp) / static_cast<double>(rows);

    detail = "gap " + fm("%.4f", gap) + ", " + fm("%.1f", 100.0 * frac) + "% rows > 0.9, " +
             fm("%.0f", dt) + " s";
    return gap < 0.05 && frac >= 0.95 && dt < 600.0;
}

// ---------------------------------------------------------------------
// 5. Closed-loop energy ordering: network close to the enumeration
//    optimum, both below the hysteresis baseline.

bool check_closed_loop(Env& env, std::string& detail) {
    if (!env.trained) {
        detail = "no trained network (training check failed)";
        return false;
    }
    const std::vector<Strategy> strategies{Strategy::make_rule(RuleShiftConfig{}),
                                           Strategy::make_exact(),
                                           Strategy::make_nn(env.params)};
    const CompareResult cr = compare(env.cycle, strategies, 8, env.p, env.mm);
    const double e_rule = cr.rows[0].energy_kwh;
    const double e_exact = cr.rows[1].energy_kwh;
    const double e_nn = cr.rows[2].energy_kwh;

    detail = "rule " + fm("%.4f", e_rule) + ", exact " + fm("%.4f", e_exact) + ", nn " +
             fm("%.4f", e_nn) + " kWh (nn vs exact " +
             fm("%+.2f", 100.0 * (e_nn - e_exact) / e_exact) + "%)";
    return std::abs(e_nn - e_exact) / e_exact <= 0.02 && e_nn < e_rule && e_exact < e_rule;
}

// ---------------------------------------------------------------------
// 6. Per-step solve time: the network under 1 ms, enumeration under
//    10 ms, and at least a 10x separation.

bool check_timing(Env& env, std::string& detail) {
    if (!env.trained) {
        detail = "no trained network (training check failed)";
        return false;
    }
    const TimingStats nn =
        bench_solve_time(Strategy::make_nn(env.params), env.wins, 2, env.p, env.mm);
    const TimingStats ex =
        bench_solve_time(Strategy::make_exact(), env.wins, 2, env.p, env.mm);
    const double ratio = ex.mean_ms / nn.mean_ms;
    detail = "nn " + fm("%.4f", nn.mean_ms) + " ms, exact " + fm("%.4f", ex.mean_ms) +
             " ms, ratio " + fm("%.1f", ratio) + "x";
    return nn.mean_ms < 1.0 && ex.mean_ms < 10.0 && ratio >= 10.0;
}

// ---------------------------------------------------------------------
// 7. Structural identities: the gear-indexed polynomial equals the
//    torque/speed polynomial composed with the speed map, the torque
//    split closes the force balance, and forward outputs satisfy the
//    row-sum constraint.

bool check_identities(Env& env, std::string& detail) {
    std::mt19937_64 rng(7007);
    std::uniform_real_distribution<double> uv(0.0, 33.0), ut(-250.0, 250.0),
        uf(-8000.0, 2500.0);

    for (int trial = 0; trial < 100; ++trial) {
        const double v = uv(rng);
        const int gear = 1 + static_cast<int>(rng() % 2);
        const double T = ut(rng);
        const double n = motor_speed(v, gear, env.p);
        double composed = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                composed += env.mm.rho[i][j] * std::pow(T, i) * std::pow(n, j);
        const double direct = motor_power_poly(v, gear, T, env.mm, env.p);
        if (std::abs(direct - composed) > 1e-9 * std::max(1.0, std::abs(composed))) {
            detail = "polynomial composition mismatch at v=" + fm("%.2f", v);
            return false;
        }
    }

    for (int trial = 0; trial < 100; ++trial) {
        const double v = uv(rng);
        const int gear = 1 + static_cast<int>(rng() % 2);
        double F = uf(rng);
        const double drive_ratio = env.p.ratio(gear) * env.p.I0 * env.p.eta_t;
        if (F * env.p.r_w / drive_ratio > env.mm.T_max) F = 0.5 * uf(rng);  // stay feasible
        TorqueSplit ts;
        try {
            ts = torque_split(F, gear, v, env.p, env.mm);
        } catch (const InfeasibleError&) {
            continue;
        }
        const double back = (ts.T_m * drive_ratio + ts.T_b) / env.p.r_w;
        if (std::abs(back - F) > 1e-9 * std::max(1.0, std::abs(F))) {
            detail = "force balance residual " + fm("%.3g", std::abs(back - F));
            return false;
        }
    }

    std::size_t rows = 0;
    auto scan = [&](const MlpParams& params, std::size_t stride) {
        for (std::size_t w = 0; w < env.wins.size(); w += stride) {
            const RelaxedPlan plan = forward(env.wins[w], params);
            for (std::size_t k = 0; k < plan.N; ++k) {
                ++rows;
                if (std::abs(plan.at(k, 0) + plan.at(k, 1) - 1.0) > 1e-12) return false;
            }
        }
        return true;
    };
    NetConfig net;
    for (std::uint64_t seed = 90; seed < 95; ++seed)
        if (!scan(init_params(net, seed), 23)) {
            detail = "selector row sum off by more than 1e-12";
            return false;
        }
    if (env.trained && !scan(env.params, 1)) {
        detail = "selector row sum off by more than 1e-12 (trained net)";
        return false;
    }
    detail = "100 composition points, 100 force balances, " + std::to_string(rows) +
             " selector rows";
    return true;
}

// ---------------------------------------------------------------------
// 8. Rerunning train + compare with one config and seed reproduces
//    every artifact byte for byte (wall-clock CSVs excluded).

bool run_cli(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

bool check_determinism(Env& env, std::string& detail) {
    if (env.cli.empty()) {
        detail = "gearshift binary path not given on the command line";
        return false;
    }
    const fs::path root = fs::temp_directory_path() / "gs_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cfg_path = (root / "run.json").string();
    write_text_file(cfg_path, "{\"train\": {\"epochs\": 40, \"binarity_warmup\": 20}}\n");

    for (const char* run : {"a", "b"}) {
        const std::string out = (root / run).string();
        const std::string log = " >> " + (root / "cli.log").string() + " 2>&1";
        if (!run_cli(env.cli + " train --config " + cfg_path + " --out " + out + log) ||
            !run_cli(env.cli + " compare --config " + cfg_path + " --out " + out + log)) {
            detail = "CLI run failed, see " + (root / "cli.log").string();
            return false;
        }
    }

    auto names = [](const fs::path& dir) {
        std::vector<std::string> v;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file()) v.push_back(e.path().filename().string());
        std::sort(v.begin(), v.end());
        return v;
    };
    const std::vector<std::string> a = names(root / "a"), b = names(root / "b");
    if (a != b) {
        detail = "the two runs produced different artifact sets";
        return false;
    }
    std::size_t compared = 0;
    for (const std::string& name : a) {
        if (name == "comparison.csv" || name == "bench.csv") continue;  // wall-clock columns
        if (read_text_file((root / "a" / name).string()) !=
            read_text_file((root / "b" / name).string())) {
            detail = name + " differs between identical runs";
            return false;
        }
        ++compared;
    }
    detail = std::to_string(compared) + " artifacts byte-identical across reruns";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    Env env;
    if (argc > 1) env.cli = argv[1];
    fit_power_poly(env.mm, FitGrid{}, env.p);
    env.cycle = gen_nedc();
    env.wins = windows(env.cycle, 8);

    struct Check {
        const char* name;
        bool (*fn)(Env&, std::string&);
    };
    const Check checks[] = {
        {"exhaustive solver optimal vs independent re-enumeration", check_exhaustive_optimality},
        {"analytic gradients match finite differences", check_gradients},
        {"soft-argmax distribution, saturation, K-monotonicity", check_soft_argmax},
        {"default training yields near-binary selector rows", check_binarity},
        {"closed-loop energy: nn near exact, both beat rule", check_closed_loop},
        {"per-step solve time separation", check_timing},
        {"surrogate identity, force balance, row-sum constraint", check_identities},
        {"train + compare artifacts reproducible byte for byte", check_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < std::size(checks); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = checks[i].fn(env, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        std::printf("[%s] %zu %s (%s)\n", ok ? "PASS" : "FAIL", i + 1, checks[i].name,
                    detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
