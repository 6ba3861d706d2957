#pragma once

#include <array>
#include <vector>

#include "gs/errors.hpp"

#include "json.hpp"

namespace gs {

inline constexpr double kPi = 3.14159265358979323846;

// rpm for a 1 rad/s shaft, and back.
inline double rpm_to_rad(double n_rpm) { return n_rpm * kPi / 30.0; }

using Coeffs3x3 = std::array<std::array<double, 3>, 3>;

// Chassis and driveline constants. Gear ratios are ordered from the
// shortest (gear 1, largest ratio) to the tallest.
struct VehicleParams {
    double mass = 1533.0;   // kg
    double delta = 1.05;    // rotating-mass conversion coefficient
    double f = 0.01;        // rolling resistance factor
    double g = 9.81;        // m/s^2
    double Av = 0.45864;    // lumped aero coefficient, kg/m
    double eta_t = 0.96;    // transmission efficiency
    double I0 = 3.94;       // final drive ratio
    std::vector<double> gears{3.4, 1.5};
    double r_w = 0.31;      // wheel radius, m

    int n_gears() const { return static_cast<int>(gears.size()); }

    // 1-based gear index.
    double ratio(int gear) const;

    // Motor speed per unit vehicle speed in gear 1 ratio terms:
    // 30 * I0 / (pi * r_w), in rpm per (m/s) before the gear ratio.
    double speed_factor() const { return 30.0 * I0 / (kPi * r_w); }

    void validate() const;
    static VehicleParams from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Loss-polynomial coefficients of the synthetic efficiency surface.
// Losses in W: c0 + c1*n + c2*n^2 + c3*T^2 with n in rpm, T in N*m.
struct MotorLossCoeffs {
    double c0 = 350.0;
    double c1 = 0.25;
    double c2 = 3.0e-5;
    double c3 = 0.085;
    double eta_floor = 0.05;
};

struct FitStats {
    double rms_residual = 0.0;    // W
    double mean_abs_power = 0.0;  // W
    double relative_rms = 0.0;    // rms_residual / mean_abs_power
};

// Torque/speed limits, the efficiency surface, and the fitted power
// polynomials. `rho` is in (T_m, n_m) variables, `phi` is the same
// polynomial rebased to (T_m, v * I_g) so the optimizer never needs the
// motor speed explicitly.
struct MotorModel {
    double T_max = 250.0;    // N*m
    double n_max = 12000.0;  // rpm
    MotorLossCoeffs loss;
    Coeffs3x3 rho{};
    Coeffs3x3 phi{};
    bool fitted = false;

    // Efficiency in (0,1]; the floor keeps the ratio away from zero where
    // the mechanical power vanishes.
    double eta(double n_rpm, double T_m) const;

    void validate() const;
    static MotorModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Split of a wheel force demand into motor torque and friction-brake
// torque. T_b is never positive and only becomes negative once the motor
// has saturated at its regeneration limit.
struct TorqueSplit {
    double T_m = 0.0;  // N*m, signed (negative = regeneration)
    double T_b = 0.0;  // N*m, <= 0
    int gear = 1;
};

// Aerodynamic drag Av * v^2. v must be nonnegative.
double air_resistance(double v, const VehicleParams& p);

// Wheel force needed to track (v, a) on slope alpha:
//   F = delta*m*a + Av*v^2 + m*g*(sin(alpha) + f*cos(alpha)).
// Positive is drive demand, negative is brake demand.
double required_traction_force(double v, double a, double alpha, const VehicleParams& p);

// Motor speed in rpm for vehicle speed v in the given gear.
double motor_speed(double v, int gear, const VehicleParams& p);

// Invert the driveline: motor torque covering F_req through the given
// gear, friction brakes absorbing whatever regeneration cannot.
// Throws InfeasibleError when a drive demand exceeds T_max.
TorqueSplit torque_split(double F_req, int gear, double v, const VehicleParams& p,
                         const MotorModel& mm);

// Electrical power from the efficiency surface. Driving divides the
// mechanical power by eta, braking multiplies; positive means battery
// discharge.
double motor_power_map(double n_rpm, double T_m, const MotorModel& mm);

struct FitGrid {
    int n_speed_points = 33;
    int n_torque_points = 33;
};

// Least-squares fit of the 3x3 power polynomial against the map over a
// uniform grid on [0, n_max] x [-T_max, T_max]; fills rho, derives phi.
FitStats fit_power_poly(MotorModel& mm, const FitGrid& grid, const VehicleParams& p);

// The fitted surrogate sum_{i,j} phi[i][j] * T_m^i * (v*I_g)^j.
double motor_power_poly(double v, int gear, double T_m, const MotorModel& mm,
                        const VehicleParams& p);

// Forward-Euler energy update.
double energy_step(double x, double P_m, double dt);

}  // namespace gs
