#include "gs/cycle.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

namespace gs {

namespace {

constexpr double kStepTol = 1e-9;

// Piecewise-linear speed segment: `seconds` long, km/h at both ends.
struct Segment {
    int seconds;
    double v0_kmh;
    double v1_kmh;
};

// ECE-15 urban block, 195 s. Gear-change holds are part of the official
// profile and matter for the total distance.
constexpr Segment kUrban[] = {
    {11, 0, 0},   {4, 0, 15},   {8, 15, 15},  {5, 15, 0},   {21, 0, 0},
    {5, 0, 15},   {2, 15, 15},  {5, 15, 32},  {24, 32, 32}, {11, 32, 0},
    {21, 0, 0},   {5, 0, 15},   {2, 15, 15},  {9, 15, 35},  {2, 35, 35},
    {8, 35, 50},  {12, 50, 50}, {8, 50, 35},  {13, 35, 35}, {12, 35, 0},
    {7, 0, 0},
};

// Extra-urban block, 400 s.
constexpr Segment kExtraUrban[] = {
    {20, 0, 0},     {5, 0, 15},    {2, 15, 15},    {9, 15, 35},   {2, 35, 35},
    {8, 35, 50},    {2, 50, 50},   {13, 50, 70},   {50, 70, 70},  {8, 70, 50},
    {69, 50, 50},   {13, 50, 70},  {50, 70, 70},   {35, 70, 100}, {30, 100, 100},
    {20, 100, 120}, {10, 120, 120}, {16, 120, 80}, {8, 80, 50},   {10, 50, 0},
    {20, 0, 0},
};

void append_segment(DrivingCycle& c, const Segment& s, double dt, double t_start) {
    const int steps = static_cast<int>(std::llround(s.seconds / dt));
    const double v0 = s.v0_kmh / 3.6;
    const double v1 = s.v1_kmh / 3.6;
    for (int k = 1; k <= steps; ++k) {
        const double frac = static_cast<double>(k) / steps;
        c.t.push_back(t_start + k * dt);
        c.v.push_back(v0 + (v1 - v0) * frac);
        c.alpha.push_back(0.0);
    }
}

}  // namespace

double DrivingCycle::dt() const {
    if (t.size() < 2) throw Error("cycle needs at least 2 samples to define a step");
    return t[1] - t[0];
}

void DrivingCycle::validate() const {
    if (t.size() != v.size() || t.size() != alpha.size()) {
        throw Error("cycle sequences must have equal length");
    }
    if (t.size() < 2) throw Error("cycle too short");
    const double step = dt();
    if (step <= 0.0) throw Error("cycle timestep must be positive");
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs((t[k] - t[k - 1]) - step) > kStepTol) {
            throw Error("cycle timestep is not uniform");
        }
    }
    for (double speed : v) {
        if (speed < 0.0) throw Error("cycle contains negative speed");
    }
}

DrivingCycle load_cycle(std::istream& in) {
    DrivingCycle c;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError("empty cycle file", 1);
    ++lineno;
    if (line.rfind("t,v", 0) != 0) {
        throw ParseError("expected header 't,v' or 't,v,alpha'", lineno);
    }

    double expected_dt = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double vals[3] = {0.0, 0.0, 0.0};
        int nf = 0;
        while (std::getline(row, field, ',') && nf < 3) {
            try {
                std::size_t used = 0;
                vals[nf] = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + field + "'", lineno);
            }
            ++nf;
        }
        if (nf < 2) throw ParseError("need at least t and v columns", lineno);
        if (vals[1] < 0.0) throw ParseError("negative speed", lineno);

        if (!c.t.empty()) {
            const double step = vals[0] - c.t.back();
            if (step <= 0.0) throw ParseError("non-increasing timestamp", lineno);
            if (c.t.size() == 1) {
                expected_dt = step;
            } else if (std::abs(step - expected_dt) > kStepTol) {
                throw ParseError("non-uniform timestep", lineno);
            }
        }
        c.t.push_back(vals[0]);
        c.v.push_back(vals[1]);
        c.alpha.push_back(nf >= 3 ? vals[2] : 0.0);
    }
    if (c.t.size() < 2) throw ParseError("cycle needs at least 2 rows", lineno);
    return c;
}

DrivingCycle gen_nedc(double dt) {
    if (dt <= 0.0) throw ConfigError("gen_nedc: dt must be positive");
    auto divides = [dt](int seconds) {
        const double ratio = seconds / dt;
        return std::abs(ratio - std::llround(ratio)) < kStepTol;
    };
    for (const auto& s : kUrban) {
        if (!divides(s.seconds)) throw ConfigError("gen_nedc: dt does not divide segment durations");
    }
    for (const auto& s : kExtraUrban) {
        if (!divides(s.seconds)) throw ConfigError("gen_nedc: dt does not divide segment durations");
    }

    DrivingCycle c;
    c.t.push_back(0.0);
    c.v.push_back(0.0);
    c.alpha.push_back(0.0);
    double t_start = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
        for (const auto& s : kUrban) {
            append_segment(c, s, dt, t_start);
            t_start += s.seconds;
        }
    }
    for (const auto& s : kExtraUrban) {
        append_segment(c, s, dt, t_start);
        t_start += s.seconds;
    }
    c.validate();
    return c;
}

std::vector<double> derive_accel(const DrivingCycle& c) {
    if (c.size() < 2) throw Error("derive_accel: cycle length must be >= 2");
    const double step = c.dt();
    std::vector<double> a(c.size());
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        a[k] = (c.v[k + 1] - c.v[k]) / step;
    }
    a[c.size() - 1] = a[c.size() - 2];
    return a;
}

std::vector<Scenario> windows(const DrivingCycle& c, std::size_t N, std::size_t stride) {
    if (N < 1) throw std::invalid_argument("windows: horizon must be >= 1");
    if (stride < 1) throw std::invalid_argument("windows: stride must be >= 1");
    if (c.size() < N + 1) throw Error("windows: horizon longer than cycle");

    const std::vector<double> a = derive_accel(c);
    std::vector<Scenario> out;
    for (std::size_t start = 0; start + N < c.size(); start += stride) {
        Scenario s;
        s.x0 = 0.0;
        s.v_ref.assign(c.v.begin() + start, c.v.begin() + start + N);
        s.a_ref.assign(a.begin() + start, a.begin() + start + N);
        s.alpha_ref.assign(c.alpha.begin() + start, c.alpha.begin() + start + N);
        out.push_back(std::move(s));
    }
    return out;
}

double cycle_distance(const DrivingCycle& c) {
    double d = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        d += 0.5 * (c.v[k] + c.v[k - 1]) * (c.t[k] - c.t[k - 1]);
    }
    return d;
}

}  // namespace gs
