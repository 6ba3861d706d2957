#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gs/cycle.hpp"
#include "gs/vehicle.hpp"

namespace gs {

// N x n_b matrix of relaxed mode selectors, row-major. Row k mixes the
// per-gear dynamics at step k; a valid plan has each row in [0,1]^n_b
// summing to 1.
struct RelaxedPlan {
    std::size_t N = 0;
    std::size_t n_b = 0;
    std::vector<double> b;  // row-major, N * n_b

    static RelaxedPlan zeros(std::size_t N, std::size_t n_b) {
        return RelaxedPlan{N, n_b, std::vector<double>(N * n_b, 0.0)};
    }
    static RelaxedPlan one_hot(std::size_t N, std::size_t n_b, std::span<const int> gears);
    static RelaxedPlan uniform(std::size_t N, std::size_t n_b);

    double at(std::size_t k, std::size_t i) const { return b[k * n_b + i]; }
    double& at(std::size_t k, std::size_t i) { return b[k * n_b + i]; }

    // Throws std::invalid_argument if any row violates the selector
    // constraints beyond `tol`.
    void check_sos1(double tol = 1e-9) const;
};

// A committed gear sequence, 1-based gear indices.
struct IntegerPlan {
    std::vector<int> gear;
};

enum class InfeasibleReason { none, overspeed, torque };

// Per-(step, gear) evaluation of the surrogate power. Infeasible modes
// carry the penalty power so rollouts stay finite and smooth.
struct ModeEval {
    double power = 0.0;  // W
    bool feasible = true;
    InfeasibleReason reason = InfeasibleReason::none;
};

struct InfeasibleStep {
    std::size_t step;
    int gear;
    InfeasibleReason reason;
};

struct RolloutResult {
    std::vector<double> x_traj;      // N+1 energies, x_traj[0] = x0
    std::vector<double> step_power;  // N blended powers
    bool feasible = true;            // no actively-weighted infeasible mode
    std::vector<InfeasibleStep> infeasible_steps;

    double x_N() const { return x_traj.back(); }
};

struct PlanEval {
    double x_N = 0.0;
    bool feasible = true;
};

struct ExhaustiveResult {
    IntegerPlan plan;
    double x_N = 0.0;
    std::size_t candidates = 0;           // always n_b^N
    std::size_t feasible_candidates = 0;  // plans without infeasible steps
};

// Finite stand-in power for modes outside the speed/torque limits: ten
// times the corner mechanical power. Large enough that no optimal plan
// ever selects an infeasible mode, small enough to keep gradients finite.
double penalty_power(const MotorModel& mm);

// Surrogate electrical power of one gear at one step of the scenario:
// traction force -> torque split -> fitted polynomial. Speed or drive
// torque beyond the motor limits makes the mode infeasible (a value, not
// an error: solvers must see it).
ModeEval mode_power(const Scenario& s, std::size_t k, int gear, const VehicleParams& p,
                    const MotorModel& mm);

// Single-shooting rollout of the convex mode mix:
//   x_{k+1} = sum_i b_{i,k} * (x_k + P_{i,k} * dt).
// Requires a valid selector plan.
RolloutResult rollout(const Scenario& s, const RelaxedPlan& plan, const VehicleParams& p,
                      const MotorModel& mm, double dt = 1.0);

// Analytic d x_N / d b_{i,k} of the rollout above, N x n_b row-major.
// Matches central finite differences of rollout() entry-wise.
std::vector<double> rollout_grad(const Scenario& s, const RelaxedPlan& plan,
                                 const VehicleParams& p, const MotorModel& mm,
                                 double dt = 1.0);

// Evaluate one committed gear sequence step by step.
PlanEval rollout_integer(const Scenario& s, std::span<const int> gears,
                         const VehicleParams& p, const MotorModel& mm, double dt = 1.0);

// Globally optimal gear sequence by full enumeration of the n_b^N
// candidates, each evaluated with its own rollout. Plans with any
// infeasible step are excluded; ties prefer the lexicographically
// smallest sequence (lower gears first). Throws InfeasibleError when no
// candidate survives.
ExhaustiveResult exhaustive_solve(const Scenario& s, const VehicleParams& p,
                                  const MotorModel& mm, double dt = 1.0);

// Hysteresis gear schedule. Speeds in m/s.
struct RuleShiftConfig {
    double v_up = 24.0 / 3.6;
    double v_down = 18.0 / 3.6;
};

int rule_based_gear(double v, int current_gear, const RuleShiftConfig& cfg, int n_gears);

// Per-row argmax projection onto one-hot plans; ties pick the lower gear.
IntegerPlan round_sos1(const RelaxedPlan& plan);

// Exhaustive solves over a batch of scenarios. The parallel version
// distributes scenarios over OpenMP threads and is bitwise identical to
// the serial one (each solve is independent and written to its own slot).
std::vector<ExhaustiveResult> solve_windows_serial(std::span<const Scenario> windows,
                                                   const VehicleParams& p,
                                                   const MotorModel& mm, double dt = 1.0);
std::vector<ExhaustiveResult> solve_windows_parallel(std::span<const Scenario> windows,
                                                     const VehicleParams& p,
                                                     const MotorModel& mm, double dt = 1.0);

}  // namespace gs
