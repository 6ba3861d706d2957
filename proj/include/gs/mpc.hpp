#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gs/cycle.hpp"
#include "gs/nn.hpp"
#include "gs/ocp.hpp"
#include "gs/vehicle.hpp"

namespace gs {

// A gear-selection policy for the receding-horizon loop. Rule-based keeps
// its own current-gear state; the NN strategy carries trained parameters.
struct Strategy {
    enum class Kind { rule_based, exact, nn };
    Kind kind = Kind::rule_based;
    RuleShiftConfig rule{};
    int initial_gear = 1;
    MlpParams params;  // nn only

    std::string name() const;
    static Strategy make_rule(const RuleShiftConfig& cfg, int initial_gear = 1);
    static Strategy make_exact();
    static Strategy make_nn(MlpParams params);
};

struct StepRecord {
    double t = 0.0;    // s
    double v = 0.0;    // m/s
    double a = 0.0;    // m/s^2
    int gear = 1;
    double T_m = 0.0;  // N*m
    double T_b = 0.0;  // N*m
    double n_m = 0.0;  // rpm
    double P_m = 0.0;  // W, map-based plant power
    double W = 0.0;    // J, cumulative energy after this step
};

struct TimingStats {
    double mean_ms = 0.0;
    double worst_ms = 0.0;
    double p99_ms = 0.0;
    std::size_t samples = 0;
};

TimingStats timing_from_ns(const std::vector<std::int64_t>& ns);

struct SimReport {
    std::string method;
    std::vector<StepRecord> steps;
    double total_energy = 0.0;  // J, regeneration counts negative
    int gear_shift_count = 0;
    std::vector<std::int64_t> solve_ns;  // per-step decision times

    double energy_kwh() const { return total_energy / 3.6e6; }
    TimingStats timing() const { return timing_from_ns(solve_ns); }
};

// The N-step reference window starting at cycle index k; past the end the
// last speed is held with zero acceleration. x0 = 0 (argmin-invariant).
Scenario make_scenario(const DrivingCycle& c, const std::vector<double>& accel, std::size_t k,
                       std::size_t N);

struct MpcStepResult {
    int gear = 1;
    std::int64_t ns = 0;  // decision wall time
};

// One receding-horizon decision at cycle index k. The NN and exact paths
// solve over the window and apply its first gear; rule-based looks only
// at the current speed and its own gear state.
MpcStepResult mpc_step(const DrivingCycle& c, const std::vector<double>& accel, std::size_t k,
                       int current_gear, const Strategy& strat, std::size_t N,
                       const VehicleParams& p, const MotorModel& mm);

// Full closed-loop pass over the cycle. Gear decisions come from the
// strategy; the energy ledger uses the map-based motor power (the plant),
// not the fitted polynomial the optimizers see. Throws InfeasibleError
// naming the step if an applied gear violates a motor limit.
SimReport simulate_cycle(const DrivingCycle& c, const Strategy& strat, std::size_t N,
                         const VehicleParams& p, const MotorModel& mm);

struct CompareRow {
    std::string method;
    double energy_kwh = 0.0;
    double savings_pct = 0.0;  // vs the first (baseline) strategy
    double mean_ms = 0.0;
    double worst_ms = 0.0;
};

struct CompareResult {
    std::vector<SimReport> reports;
    std::vector<CompareRow> rows;
};

// Simulate every strategy on the cycle; the first one is the savings
// baseline.
CompareResult compare(const DrivingCycle& c, const std::vector<Strategy>& strategies,
                      std::size_t N, const VehicleParams& p, const MotorModel& mm);

// Wall-clock per-solve statistics over windows x repetitions, after a
// short warm-up pass that is not counted.
TimingStats bench_solve_time(const Strategy& strat, std::span<const Scenario> windows,
                             int repetitions, const VehicleParams& p, const MotorModel& mm);

}  // namespace gs
