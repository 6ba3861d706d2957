#include "gs/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "gs/errors.hpp"

namespace gs {

namespace {

void ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.paths.out);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

void cmd_fit_motor(const RunConfig& cfg) {
    MotorModel mm = cfg.motor;
    if (!cfg.paths.motor.empty()) mm = MotorModel::from_json(read_json_file(cfg.paths.motor));
    const FitStats st = fit_power_poly(mm, FitGrid{}, cfg.vehicle);

    ensure_out_dir(cfg);
    nlohmann::json j = mm.to_json();
    j["fit"] = {{"rms_residual_w", st.rms_residual},
                {"mean_abs_power_w", st.mean_abs_power},
                {"relative_rms", st.relative_rms}};
    const std::string path = cfg.paths.out + "/motor.json";
    write_json_file(path, j);

    std::printf("wrote %s\n", path.c_str());
    std::printf("fit residual: rms %.1f W over mean |P| %.1f W (%.2f%%)\n", st.rms_residual,
                st.mean_abs_power, 100.0 * st.relative_rms);
}

void cmd_gen_cycle(const RunConfig& cfg) {
    const DrivingCycle c = resolve_cycle(cfg);
    ensure_out_dir(cfg);
    const std::string path = cfg.paths.out + "/cycle.csv";
    write_text_file(path, cycle_csv(c));
    std::printf("wrote %s\n", path.c_str());
    std::printf("cycle: %zu samples, %.0f s, %.3f km\n", c.size(), c.t.back(),
                cycle_distance(c) / 1000.0);
}

void cmd_train(const RunConfig& cfg) {
    const DrivingCycle c = resolve_cycle(cfg);
    const MotorModel mm = resolve_motor(cfg);
    const std::vector<Scenario> data = windows(c, static_cast<std::size_t>(cfg.horizon.N));

    NetConfig net;
    net.n_heads = cfg.horizon.N;
    net.head_width = cfg.vehicle.n_gears();
    net.input_dim = 2 * cfg.horizon.N;

    const TrainResult tr = train(data, cfg.vehicle, mm, net, cfg.train, cfg.horizon.dt);

    ensure_out_dir(cfg);
    TrainConfig echo = cfg.train;
    echo.E_ref = tr.E_ref;
    write_json_file(cfg.params_path(), params_to_json(tr.params, echo));
    write_text_file(cfg.paths.out + "/loss.csv", loss_history_csv(tr.history));
    write_text_file(cfg.paths.out + "/loss.svg", svg_loss_curve(tr.history));

    double gap = 0.0, frac = 0.0;
    for (const Scenario& s : data) {
        const RelaxedPlan plan = forward(s, tr.params);
        gap += binarity_gap(plan);
        frac += binary_fraction(plan);
    }
    gap /= static_cast<double>(data.size());
    frac /= static_cast<double>(data.size());

    const EpochStats& last = tr.history.back();
    std::printf("trained on %zu windows for %d epochs (E_ref %.1f J)\n", data.size(),
                cfg.train.epochs, tr.E_ref);
    std::printf("final loss %.6f (energy %.6f, binarity %.6f)\n", last.mean_loss,
                last.energy_term, last.binarity_term);
    std::printf("binarity gap %.4f, rows above 0.9: %.1f%%\n", gap, 100.0 * frac);
    std::printf("wrote %s\n", cfg.params_path().c_str());
}

void cmd_compare(const RunConfig& cfg) {
    const DrivingCycle c = resolve_cycle(cfg);
    const MotorModel mm = resolve_motor(cfg);
    const MlpParams params = params_from_json(read_json_file(cfg.params_path()));

    const std::vector<Strategy> strategies = {
        Strategy::make_rule(cfg.rule),
        Strategy::make_exact(),
        Strategy::make_nn(params),
    };
    const std::size_t N = static_cast<std::size_t>(cfg.horizon.N);
    const CompareResult cr = compare(c, strategies, N, cfg.vehicle, mm);

    // Open-loop per-window suboptimality of the rounded network plans
    // against the enumerated optimum, aggregated over the whole cycle.
    const std::vector<Scenario> wins = windows(c, N);
    double gap_num = 0.0, gap_den = 0.0;
    std::size_t rounded_infeasible = 0;
    for (const Scenario& s : wins) {
        const ExhaustiveResult ex = exhaustive_solve(s, cfg.vehicle, mm, cfg.horizon.dt);
        const IntegerPlan ip = round_sos1(forward(s, params));
        const PlanEval nn = rollout_integer(s, ip.gear, cfg.vehicle, mm, cfg.horizon.dt);
        if (!nn.feasible) ++rounded_infeasible;
        gap_num += nn.x_N - ex.x_N;
        gap_den += std::abs(ex.x_N);
    }
    const double gap_pct = 100.0 * gap_num / gap_den;

    ensure_out_dir(cfg);
    write_text_file(cfg.paths.out + "/comparison.csv", comparison_csv(cr.rows));
    write_text_file(cfg.paths.out + "/gear_trace.csv", gear_trace_csv(cr.reports));
    write_text_file(cfg.paths.out + "/working_points.csv",
                    working_points_csv(cr.reports, mm));
    write_text_file(cfg.paths.out + "/gear_trace.svg", svg_gear_trace(cr.reports));
    write_text_file(cfg.paths.out + "/working_points.svg",
                    svg_working_points(cr.reports, mm));
    for (const SimReport& rep : cr.reports) {
        write_text_file(cfg.paths.out + "/steps_" + rep.method + ".csv", step_csv(rep));
        nlohmann::json j = report_to_json(rep);
        if (rep.method == "nn") {
            j["window_gap_vs_exact_pct"] = gap_pct;
            j["rounded_infeasible_windows"] = rounded_infeasible;
        }
        write_json_file(cfg.paths.out + "/report_" + rep.method + ".json", j);
    }

    for (const CompareRow& r : cr.rows)
        std::printf("%-11s %.4f kWh  savings %6.2f%%  solve mean %.4f ms worst %.4f ms\n",
                    r.method.c_str(), r.energy_kwh, r.savings_pct, r.mean_ms, r.worst_ms);
    std::printf("per-window gap nn vs exact: %.3f%% (%zu of %zu rounded plans infeasible)\n",
                gap_pct, rounded_infeasible, wins.size());
    std::printf("wrote %s/comparison.csv\n", cfg.paths.out.c_str());
}

void cmd_bench(const RunConfig& cfg) {
    const DrivingCycle c = resolve_cycle(cfg);
    const MotorModel mm = resolve_motor(cfg);
    const MlpParams params = params_from_json(read_json_file(cfg.params_path()));

    std::vector<Scenario> wins = windows(c, static_cast<std::size_t>(cfg.horizon.N));
    if (cfg.bench.max_windows > 0 &&
        wins.size() > static_cast<std::size_t>(cfg.bench.max_windows))
        wins.resize(static_cast<std::size_t>(cfg.bench.max_windows));

    const Strategy nn = Strategy::make_nn(params);
    const Strategy exact = Strategy::make_exact();
    const TimingStats nn_st =
        bench_solve_time(nn, wins, cfg.bench.repetitions, cfg.vehicle, mm);
    const TimingStats ex_st =
        bench_solve_time(exact, wins, cfg.bench.repetitions, cfg.vehicle, mm);

    ensure_out_dir(cfg);
    const std::vector<std::pair<std::string, TimingStats>> rows = {{"nn", nn_st},
                                                                   {"exact", ex_st}};
    write_text_file(cfg.paths.out + "/bench.csv", bench_csv(rows));

    for (const auto& [method, st] : rows)
        std::printf("%-6s mean %.4f ms  worst %.4f ms  p99 %.4f ms  (%zu solves)\n",
                    method.c_str(), st.mean_ms, st.worst_ms, st.p99_ms, st.samples);
    std::printf("wrote %s/bench.csv\n", cfg.paths.out.c_str());
}

}  // namespace gs
