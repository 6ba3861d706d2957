#include "gs/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gs/errors.hpp"

namespace gs {

std::string Strategy::name() const {
    switch (kind) {
        case Kind::rule_based: return "rule_based";
        case Kind::exact: return "exact";
        case Kind::nn: return "nn";
    }
    return "unknown";
}

Strategy Strategy::make_rule(const RuleShiftConfig& cfg, int initial_gear) {
    Strategy s;
    s.kind = Kind::rule_based;
    s.rule = cfg;
    s.initial_gear = initial_gear;
    return s;
}

Strategy Strategy::make_exact() {
    Strategy s;
    s.kind = Kind::exact;
    return s;
}

Strategy Strategy::make_nn(MlpParams params) {
    Strategy s;
    s.kind = Kind::nn;
    s.params = std::move(params);
    return s;
}

TimingStats timing_from_ns(const std::vector<std::int64_t>& ns) {
    TimingStats st;
    st.samples = ns.size();
    if (ns.empty()) return st;
    std::int64_t worst = ns[0];
    double sum = 0.0;
    for (std::int64_t v : ns) {
        sum += static_cast<double>(v);
        worst = std::max(worst, v);
    }
    std::vector<std::int64_t> sorted = ns;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
    const std::size_t idx = std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1);
    st.mean_ms = sum / static_cast<double>(ns.size()) / 1e6;
    st.worst_ms = static_cast<double>(worst) / 1e6;
    st.p99_ms = static_cast<double>(sorted[idx]) / 1e6;
    return st;
}

Scenario make_scenario(const DrivingCycle& c, const std::vector<double>& accel, std::size_t k,
                       std::size_t N) {
    const std::size_t L = c.size();
    if (k >= L) throw std::invalid_argument("make_scenario: start index past the cycle end");
    if (accel.size() != L)
        throw std::invalid_argument("make_scenario: acceleration length does not match the cycle");
    if (N == 0) throw std::invalid_argument("make_scenario: empty horizon");

    Scenario s;
    s.x0 = 0.0;
    s.v_ref.resize(N);
    s.a_ref.resize(N);
    s.alpha_ref.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t i = k + j;
        if (i < L) {
            s.v_ref[j] = c.v[i];
            s.a_ref[j] = accel[i];
            s.alpha_ref[j] = c.alpha[i];
        } else {
            s.v_ref[j] = c.v[L - 1];
            s.a_ref[j] = 0.0;
            s.alpha_ref[j] = c.alpha[L - 1];
        }
    }
    return s;
}

namespace {

int strategy_decide(const Strategy& strat, const Scenario& s, int current_gear,
                    const VehicleParams& p, const MotorModel& mm) {
    switch (strat.kind) {
        case Strategy::Kind::rule_based:
            return rule_based_gear(s.v_ref[0], current_gear, strat.rule, p.n_gears());
        case Strategy::Kind::exact:
            return exhaustive_solve(s, p, mm).plan.gear[0];
        case Strategy::Kind::nn:
            return round_sos1(forward(s, strat.params)).gear[0];
    }
    throw std::logic_error("strategy_decide: unknown strategy kind");
}

}  // namespace

MpcStepResult mpc_step(const DrivingCycle& c, const std::vector<double>& accel, std::size_t k,
                       int current_gear, const Strategy& strat, std::size_t N,
                       const VehicleParams& p, const MotorModel& mm) {
    const Scenario s = make_scenario(c, accel, k, N);
    MpcStepResult res;
    const auto t0 = std::chrono::steady_clock::now();
    res.gear = strategy_decide(strat, s, current_gear, p, mm);
    const auto t1 = std::chrono::steady_clock::now();
    res.ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    return res;
}

SimReport simulate_cycle(const DrivingCycle& c, const Strategy& strat, std::size_t N,
                         const VehicleParams& p, const MotorModel& mm) {
    c.validate();
    const std::vector<double> accel = derive_accel(c);
    const double dt = c.dt();
    const std::size_t L = c.size();

    SimReport rep;
    rep.method = strat.name();
    rep.steps.reserve(L);
    rep.solve_ns.reserve(L);

    int current = strat.initial_gear;
    double x = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
        const MpcStepResult dec = mpc_step(c, accel, k, current, strat, N, p, mm);
        const int gear = dec.gear;

        const double v = c.v[k];
        const double n_m = motor_speed(v, gear, p);
        if (n_m > mm.n_max)
            throw InfeasibleError("simulate_cycle: motor overspeed in gear " +
                                  std::to_string(gear) + " at step " + std::to_string(k));
        const double F = required_traction_force(v, accel[k], c.alpha[k], p);
        TorqueSplit ts;
        try {
            ts = torque_split(F, gear, v, p, mm);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError(std::string(e.what()) + " at step " + std::to_string(k));
        }

        const double P_m = motor_power_map(n_m, ts.T_m, mm);
        x = energy_step(x, P_m, dt);

        StepRecord rec;
        rec.t = c.t[k];
        rec.v = v;
        rec.a = accel[k];
        rec.gear = gear;
        rec.T_m = ts.T_m;
        rec.T_b = ts.T_b;
        rec.n_m = n_m;
        rec.P_m = P_m;
        rec.W = x;
        rep.steps.push_back(rec);
        rep.solve_ns.push_back(dec.ns);

        if (k > 0 && gear != rep.steps[k - 1].gear) ++rep.gear_shift_count;
        current = gear;
    }
    rep.total_energy = x;
    return rep;
}

CompareResult compare(const DrivingCycle& c, const std::vector<Strategy>& strategies,
                      std::size_t N, const VehicleParams& p, const MotorModel& mm) {
    if (strategies.size() < 2)
        throw std::invalid_argument("compare: need at least a baseline and one contender");

    CompareResult res;
    res.reports.reserve(strategies.size());
    for (const Strategy& s : strategies) res.reports.push_back(simulate_cycle(c, s, N, p, mm));

    const double base = res.reports[0].energy_kwh();
    for (const SimReport& rep : res.reports) {
        CompareRow row;
        row.method = rep.method;
        row.energy_kwh = rep.energy_kwh();
        row.savings_pct = &rep == &res.reports[0]
                              ? 0.0
                              : (base - rep.energy_kwh()) / base * 100.0;
        const TimingStats ts = rep.timing();
        row.mean_ms = ts.mean_ms;
        row.worst_ms = ts.worst_ms;
        res.rows.push_back(row);
    }
    return res;
}

TimingStats bench_solve_time(const Strategy& strat, std::span<const Scenario> windows,
                             int repetitions, const VehicleParams& p, const MotorModel& mm) {
    if (repetitions < 1) throw ConfigError("bench: repetitions must be >= 1");
    if (windows.empty()) throw ConfigError("bench: no benchmark windows");

    // Warm-up pass (caches, allocator, lazy init) excluded from the stats.
    const std::size_t warm = std::min<std::size_t>(windows.size(), 32);
    int guard = 0;
    for (std::size_t w = 0; w < warm; ++w)
        guard += strategy_decide(strat, windows[w], strat.initial_gear, p, mm);

    std::vector<std::int64_t> ns;
    ns.reserve(windows.size() * static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
        for (const Scenario& s : windows) {
            const auto t0 = std::chrono::steady_clock::now();
            guard += strategy_decide(strat, s, strat.initial_gear, p, mm);
            const auto t1 = std::chrono::steady_clock::now();
            ns.push_back(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
        }
    }
    // Keep the solves observable so the optimizer cannot drop them.
    volatile int sink = guard;
    (void)sink;
    return timing_from_ns(ns);
}

}  // namespace gs
