#include "gs/vehicle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace gs {

double VehicleParams::ratio(int gear) const {
    if (gear < 1 || gear > n_gears()) {
        throw std::invalid_argument("gear index " + std::to_string(gear) +
                                    " out of [1, " + std::to_string(n_gears()) + "]");
    }
    return gears[static_cast<std::size_t>(gear - 1)];
}

void VehicleParams::validate() const {
    if (mass <= 0.0) throw ConfigError("vehicle mass must be positive");
    if (delta < 1.0) throw ConfigError("rotating-mass coefficient must be >= 1");
    if (eta_t <= 0.0 || eta_t > 1.0) throw ConfigError("eta_t must be in (0, 1]");
    if (Av < 0.0) throw ConfigError("Av must be nonnegative");
    if (r_w <= 0.0) throw ConfigError("wheel radius must be positive");
    if (I0 <= 0.0) throw ConfigError("final drive ratio must be positive");
    if (gears.empty()) throw ConfigError("at least one gear ratio required");
    for (std::size_t i = 0; i < gears.size(); ++i) {
        if (gears[i] <= 0.0) throw ConfigError("gear ratios must be positive");
        if (i > 0 && gears[i] >= gears[i - 1]) {
            throw ConfigError("gear ratios must be strictly decreasing");
        }
    }
}

VehicleParams VehicleParams::from_json(const nlohmann::json& j) {
    VehicleParams p;
    p.mass = j.at("mass").get<double>();
    p.delta = j.at("delta").get<double>();
    p.f = j.at("f").get<double>();
    p.g = j.at("g").get<double>();
    p.Av = j.at("Av").get<double>();
    p.eta_t = j.at("eta_t").get<double>();
    p.I0 = j.at("I0").get<double>();
    p.gears = j.at("gears").get<std::vector<double>>();
    p.r_w = j.at("r_w").get<double>();
    p.validate();
    return p;
}

nlohmann::json VehicleParams::to_json() const {
    return {{"mass", mass}, {"delta", delta}, {"f", f},         {"g", g},
            {"Av", Av},     {"eta_t", eta_t}, {"I0", I0},       {"gears", gears},
            {"r_w", r_w}};
}

double MotorModel::eta(double n_rpm, double T_m) const {
    const double p_mech = std::abs(T_m) * rpm_to_rad(n_rpm);
    const double losses = loss.c0 + loss.c1 * n_rpm + loss.c2 * n_rpm * n_rpm +
                          loss.c3 * T_m * T_m;
    return std::max(loss.eta_floor, p_mech / (p_mech + losses));
}

void MotorModel::validate() const {
    if (T_max <= 0.0) throw ConfigError("T_max must be positive");
    if (n_max <= 0.0) throw ConfigError("n_max must be positive");
    if (loss.c0 <= 0.0) throw ConfigError("idle loss c0 must be positive");
    if (loss.c1 < 0.0 || loss.c2 < 0.0 || loss.c3 < 0.0) {
        throw ConfigError("loss coefficients must be nonnegative");
    }
    if (loss.eta_floor <= 0.0 || loss.eta_floor >= 1.0) {
        throw ConfigError("eta_floor must be in (0, 1)");
    }
}

MotorModel MotorModel::from_json(const nlohmann::json& j) {
    MotorModel mm;
    mm.T_max = j.at("T_max").get<double>();
    mm.n_max = j.at("n_max").get<double>();
    const auto& lc = j.at("loss_coeffs");
    mm.loss.c0 = lc.at("c0").get<double>();
    mm.loss.c1 = lc.at("c1").get<double>();
    mm.loss.c2 = lc.at("c2").get<double>();
    mm.loss.c3 = lc.at("c3").get<double>();
    if (lc.contains("eta_floor")) mm.loss.eta_floor = lc.at("eta_floor").get<double>();
    if (j.contains("rho") && j.contains("phi")) {
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) {
                mm.rho[i][k] = j.at("rho").at(i).at(k).get<double>();
                mm.phi[i][k] = j.at("phi").at(i).at(k).get<double>();
            }
        }
        mm.fitted = true;
    }
    mm.validate();
    return mm;
}

nlohmann::json MotorModel::to_json() const {
    nlohmann::json j{{"T_max", T_max},
                     {"n_max", n_max},
                     {"loss_coeffs",
                      {{"c0", loss.c0},
                       {"c1", loss.c1},
                       {"c2", loss.c2},
                       {"c3", loss.c3},
                       {"eta_floor", loss.eta_floor}}}};
    if (fitted) {
        j["rho"] = rho;
        j["phi"] = phi;
    }
    return j;
}

double air_resistance(double v, const VehicleParams& p) {
    if (v < 0.0) throw std::domain_error("air_resistance: negative speed");
    return p.Av * v * v;
}

double required_traction_force(double v, double a, double alpha, const VehicleParams& p) {
    if (v < 0.0) throw std::domain_error("required_traction_force: negative speed");
    return p.delta * p.mass * a + p.Av * v * v +
           p.mass * p.g * (std::sin(alpha) + p.f * std::cos(alpha));
}

double motor_speed(double v, int gear, const VehicleParams& p) {
    if (v < 0.0) throw std::domain_error("motor_speed: negative speed");
    return p.speed_factor() * p.ratio(gear) * v;
}

TorqueSplit torque_split(double F_req, int gear, double v, const VehicleParams& p,
                         const MotorModel& mm) {
    const double drive_ratio = p.ratio(gear) * p.I0 * p.eta_t;
    TorqueSplit ts;
    ts.gear = gear;
    const double T_demand = F_req * p.r_w / drive_ratio;
    if (F_req >= 0.0) {
        if (T_demand > mm.T_max) {
            std::ostringstream os;
            os << "drive demand " << T_demand << " N*m exceeds T_max in gear " << gear
               << " at v=" << v;
            throw InfeasibleError(os.str());
        }
        ts.T_m = T_demand;
        ts.T_b = 0.0;
    } else {
        ts.T_m = std::max(T_demand, -mm.T_max);
        // Friction brakes take the remainder so the force balance closes;
        // rounding residue is clamped to the dissipative side.
        ts.T_b = std::min(0.0, F_req * p.r_w - ts.T_m * drive_ratio);
    }
    return ts;
}

double motor_power_map(double n_rpm, double T_m, const MotorModel& mm) {
    const double p_mech = T_m * rpm_to_rad(n_rpm);
    const double e = mm.eta(n_rpm, T_m);
    return T_m >= 0.0 ? p_mech / e : p_mech * e;
}

namespace {

// Row of the 9-column design matrix for the basis T^i * n^j, i,j in 0..2,
// flattened as column 3*i + j.
void basis_row(double T, double n, double* row) {
    const double tp[3] = {1.0, T, T * T};
    const double np[3] = {1.0, n, n * n};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) row[3 * i + j] = tp[i] * np[j];
    }
}

}  // namespace

FitStats fit_power_poly(MotorModel& mm, const FitGrid& grid, const VehicleParams& p) {
    if (grid.n_speed_points < 9 || grid.n_torque_points < 9) {
        throw FitError("fit grid needs at least 9 distinct points per axis");
    }
    const int rows = grid.n_speed_points * grid.n_torque_points;
    // Fit in unit-scaled variables (T/T_max, n/n_max) so the nine basis
    // columns are comparably sized; the raw-variable coefficients follow
    // by dividing the scale powers back out.
    Eigen::MatrixXd A(rows, 9);
    Eigen::VectorXd y(rows);
    double row9[9];
    int r = 0;
    for (int si = 0; si < grid.n_speed_points; ++si) {
        const double n = mm.n_max * si / (grid.n_speed_points - 1);
        for (int ti = 0; ti < grid.n_torque_points; ++ti) {
            const double T = -mm.T_max + 2.0 * mm.T_max * ti / (grid.n_torque_points - 1);
            basis_row(T / mm.T_max, n / mm.n_max, row9);
            for (int c9 = 0; c9 < 9; ++c9) A(r, c9) = row9[c9];
            y(r) = motor_power_map(n, T, mm);
            ++r;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 9) {
        throw FitError("rank-deficient design matrix in power fit");
    }
    const Eigen::VectorXd c = qr.solve(y);

    for (int i = 0; i < 3; ++i) {
        double ti = i == 0 ? 1.0 : (i == 1 ? mm.T_max : mm.T_max * mm.T_max);
        for (int j = 0; j < 3; ++j) {
            const double nj = j == 0 ? 1.0 : (j == 1 ? mm.n_max : mm.n_max * mm.n_max);
            mm.rho[i][j] = c(3 * i + j) / (ti * nj);
        }
    }
    // Substituting n_m = speed_factor * I_g * v turns T^i n^j into
    // T^i (v*I_g)^j scaled by speed_factor^j, so the rebased coefficients
    // are an exact image of rho.
    const double sf = p.speed_factor();
    for (int i = 0; i < 3; ++i) {
        double sj = 1.0;
        for (int j = 0; j < 3; ++j) {
            mm.phi[i][j] = mm.rho[i][j] * sj;
            sj *= sf;
        }
    }
    mm.fitted = true;

    FitStats stats;
    const Eigen::VectorXd resid = A * c - y;
    stats.rms_residual = std::sqrt(resid.squaredNorm() / rows);
    stats.mean_abs_power = y.cwiseAbs().mean();
    stats.relative_rms = stats.rms_residual / stats.mean_abs_power;
    return stats;
}

double motor_power_poly(double v, int gear, double T_m, const MotorModel& mm,
                        const VehicleParams& p) {
    const double w = v * p.ratio(gear);
    const double tp[3] = {1.0, T_m, T_m * T_m};
    const double wp[3] = {1.0, w, w * w};
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) sum += mm.phi[i][j] * tp[i] * wp[j];
    }
    return sum;
}

double energy_step(double x, double P_m, double dt) {
    if (dt <= 0.0) throw std::domain_error("energy_step: dt must be positive");
    return x + P_m * dt;
}

}  // namespace gs
