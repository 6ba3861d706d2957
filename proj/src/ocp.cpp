#include "gs/ocp.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gs/errors.hpp"

namespace gs {

RelaxedPlan RelaxedPlan::one_hot(std::size_t N, std::size_t n_b, std::span<const int> gears) {
    if (gears.size() != N)
        throw std::invalid_argument("one_hot: gear sequence length does not match N");
    RelaxedPlan plan = zeros(N, n_b);
    for (std::size_t k = 0; k < N; ++k) {
        const int g = gears[k];
        if (g < 1 || static_cast<std::size_t>(g) > n_b)
            throw std::invalid_argument("one_hot: gear index out of range");
        plan.at(k, static_cast<std::size_t>(g - 1)) = 1.0;
    }
    return plan;
}

RelaxedPlan RelaxedPlan::uniform(std::size_t N, std::size_t n_b) {
    RelaxedPlan plan = zeros(N, n_b);
    const double w = 1.0 / static_cast<double>(n_b);
    for (double& v : plan.b) v = w;
    return plan;
}

void RelaxedPlan::check_sos1(double tol) const {
    if (b.size() != N * n_b)
        throw std::invalid_argument("selector plan: storage size does not match N x n_b");
    for (std::size_t k = 0; k < N; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_b; ++i) {
            const double v = at(k, i);
            if (!(v >= -tol && v <= 1.0 + tol)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "selector plan: entry (%zu,%zu) outside [0,1]", k, i);
                throw std::invalid_argument(buf);
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "selector plan: row %zu sums to %.12g", k, sum);
            throw std::invalid_argument(buf);
        }
    }
}

double penalty_power(const MotorModel& mm) {
    return 10.0 * mm.T_max * rpm_to_rad(mm.n_max);
}

ModeEval mode_power(const Scenario& s, std::size_t k, int gear, const VehicleParams& p,
                    const MotorModel& mm) {
    if (k >= s.horizon()) throw std::invalid_argument("mode_power: step index out of range");

    const double v = s.v_ref[k];
    const double a = s.a_ref[k];
    const double alpha = s.alpha_ref[k];

    ModeEval ev;
    const double n_m = motor_speed(v, gear, p);
    if (n_m > mm.n_max) {
        ev.feasible = false;
        ev.reason = InfeasibleReason::overspeed;
        ev.power = penalty_power(mm);
        return ev;
    }

    const double F = required_traction_force(v, a, alpha, p);
    const double drive_ratio = p.ratio(gear) * p.I0 * p.eta_t;
    if (F >= 0.0 && F * p.r_w / drive_ratio > mm.T_max) {
        ev.feasible = false;
        ev.reason = InfeasibleReason::torque;
        ev.power = penalty_power(mm);
        return ev;
    }

    const TorqueSplit ts = torque_split(F, gear, v, p, mm);
    ev.power = motor_power_poly(v, gear, ts.T_m, mm, p);
    return ev;
}

RolloutResult rollout(const Scenario& s, const RelaxedPlan& plan, const VehicleParams& p,
                      const MotorModel& mm, double dt) {
    const std::size_t N = s.horizon();
    if (plan.N != N) throw std::invalid_argument("rollout: plan horizon does not match scenario");
    if (plan.n_b != static_cast<std::size_t>(p.n_gears()))
        throw std::invalid_argument("rollout: plan mode count does not match gear count");
    if (dt <= 0.0) throw std::domain_error("rollout: dt must be positive");
    plan.check_sos1();

    RolloutResult res;
    res.x_traj.resize(N + 1);
    res.step_power.resize(N);
    res.x_traj[0] = s.x0;

    for (std::size_t k = 0; k < N; ++k) {
        const double x_k = res.x_traj[k];
        double x_next = 0.0;
        double power = 0.0;
        for (std::size_t i = 0; i < plan.n_b; ++i) {
            const ModeEval ev = mode_power(s, k, static_cast<int>(i) + 1, p, mm);
            const double w = plan.at(k, i);
            x_next += w * (x_k + ev.power * dt);
            power += w * ev.power;
            if (!ev.feasible) {
                res.infeasible_steps.push_back({k, static_cast<int>(i) + 1, ev.reason});
                if (w > 0.0) res.feasible = false;
            }
        }
        res.x_traj[k + 1] = x_next;
        res.step_power[k] = power;
    }
    return res;
}

std::vector<double> rollout_grad(const Scenario& s, const RelaxedPlan& plan,
                                 const VehicleParams& p, const MotorModel& mm, double dt) {
    const std::size_t N = s.horizon();
    if (plan.N != N) throw std::invalid_argument("rollout_grad: plan horizon does not match scenario");
    if (dt <= 0.0) throw std::domain_error("rollout_grad: dt must be positive");

    // Forward pass, keeping the state and each row's selector sum. The
    // state recursion is x_{k+1} = sum_i b_{i,k} (x_k + P_{i,k} dt), so
    //   d x_N / d b_{i,k} = (x_k + P_{i,k} dt) * prod_{j>k} (sum_i b_{i,j}),
    // where the trailing product is the sensitivity of x_N to x_{k+1}.
    std::vector<double> x(N + 1);
    std::vector<double> row_sum(N);
    std::vector<double> power(N * plan.n_b);
    x[0] = s.x0;
    for (std::size_t k = 0; k < N; ++k) {
        double sum = 0.0;
        double x_next = 0.0;
        for (std::size_t i = 0; i < plan.n_b; ++i) {
            const ModeEval ev = mode_power(s, k, static_cast<int>(i) + 1, p, mm);
            power[k * plan.n_b + i] = ev.power;
            const double w = plan.at(k, i);
            sum += w;
            x_next += w * (x[k] + ev.power * dt);
        }
        row_sum[k] = sum;
        x[k + 1] = x_next;
    }

    std::vector<double> grad(N * plan.n_b);
    double suffix = 1.0;  // prod of row sums over steps k+1 .. N-1
    for (std::size_t k = N; k-- > 0;) {
        for (std::size_t i = 0; i < plan.n_b; ++i)
            grad[k * plan.n_b + i] = (x[k] + power[k * plan.n_b + i] * dt) * suffix;
        suffix *= row_sum[k];
    }
    return grad;
}

PlanEval rollout_integer(const Scenario& s, std::span<const int> gears, const VehicleParams& p,
                         const MotorModel& mm, double dt) {
    const std::size_t N = s.horizon();
    if (gears.size() != N)
        throw std::invalid_argument("rollout_integer: gear sequence length does not match horizon");
    PlanEval ev;
    double x = s.x0;
    for (std::size_t k = 0; k < N; ++k) {
        const ModeEval m = mode_power(s, k, gears[k], p, mm);
        if (!m.feasible) ev.feasible = false;
        x += m.power * dt;
    }
    ev.x_N = x;
    return ev;
}

ExhaustiveResult exhaustive_solve(const Scenario& s, const VehicleParams& p,
                                  const MotorModel& mm, double dt) {
    const std::size_t N = s.horizon();
    const std::size_t n_b = static_cast<std::size_t>(p.n_gears());
    if (N == 0) throw std::invalid_argument("exhaustive_solve: empty scenario");

    std::size_t total = 1;
    for (std::size_t k = 0; k < N; ++k) {
        if (total > 10'000'000 / n_b)
            throw std::invalid_argument("exhaustive_solve: candidate count too large to enumerate");
        total *= n_b;
    }

    ExhaustiveResult res;
    res.candidates = total;

    // Odometer over gear digits, most significant digit first, so
    // candidates appear in lexicographic order and the strict < below
    // keeps the lowest-gear sequence on ties.
    std::vector<int> gears(N, 1);
    bool found = false;
    double best = 0.0;
    for (std::size_t c = 0; c < total; ++c) {
        const PlanEval ev = rollout_integer(s, gears, p, mm, dt);
        if (ev.feasible) {
            ++res.feasible_candidates;
            if (!found || ev.x_N < best) {
                found = true;
                best = ev.x_N;
                res.plan.gear = gears;
            }
        }
        for (std::size_t k = N; k-- > 0;) {
            if (gears[k] < static_cast<int>(n_b)) {
                ++gears[k];
                break;
            }
            gears[k] = 1;
        }
    }

    if (!found) throw InfeasibleError("exhaustive_solve: every candidate plan hits a motor limit");
    res.x_N = best;
    return res;
}

int rule_based_gear(double v, int current_gear, const RuleShiftConfig& cfg, int n_gears) {
    if (current_gear < 1 || current_gear > n_gears)
        throw std::invalid_argument("rule_based_gear: current gear out of range");
    if (v > cfg.v_up && current_gear < n_gears) return current_gear + 1;
    if (v < cfg.v_down && current_gear > 1) return current_gear - 1;
    return current_gear;
}

IntegerPlan round_sos1(const RelaxedPlan& plan) {
    IntegerPlan ip;
    ip.gear.resize(plan.N);
    for (std::size_t k = 0; k < plan.N; ++k) {
        std::size_t arg = 0;
        double best = plan.at(k, 0);
        for (std::size_t i = 1; i < plan.n_b; ++i) {
            if (plan.at(k, i) > best) {
                best = plan.at(k, i);
                arg = i;
            }
        }
        ip.gear[k] = static_cast<int>(arg) + 1;
    }
    return ip;
}

std::vector<ExhaustiveResult> solve_windows_serial(std::span<const Scenario> windows,
                                                   const VehicleParams& p, const MotorModel& mm,
                                                   double dt) {
    std::vector<ExhaustiveResult> out(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w)
        out[w] = exhaustive_solve(windows[w], p, mm, dt);
    return out;
}

std::vector<ExhaustiveResult> solve_windows_parallel(std::span<const Scenario> windows,
                                                     const VehicleParams& p, const MotorModel& mm,
                                                     double dt) {
    std::vector<ExhaustiveResult> out(windows.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t w = 0; w < n; ++w)
        out[w] = exhaustive_solve(windows[w], p, mm, dt);
    return out;
}

}  // namespace gs
