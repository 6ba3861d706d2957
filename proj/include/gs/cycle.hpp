#pragma once

#include <cstddef>
#include <istream>
#include <vector>

#include "gs/errors.hpp"

namespace gs {

// A sampled reference speed profile with uniform timestep. Slopes default
// to zero everywhere.
struct DrivingCycle {
    std::vector<double> t;      // s
    std::vector<double> v;      // m/s
    std::vector<double> alpha;  // rad

    std::size_t size() const { return t.size(); }
    double dt() const;
    void validate() const;
};

// One optimization sample: an initial energy state plus the per-step
// references over the horizon.
struct Scenario {
    double x0 = 0.0;                // J
    std::vector<double> v_ref;      // m/s
    std::vector<double> a_ref;      // m/s^2
    std::vector<double> alpha_ref;  // rad

    std::size_t horizon() const { return v_ref.size(); }
};

// Parse a `t,v[,alpha]` CSV (SI units, header required). Malformed rows,
// non-uniform steps, and negative speeds raise ParseError with the
// offending line number.
DrivingCycle load_cycle(std::istream& in);

// The urban x4 + extra-urban reference cycle, sampled at dt. dt must
// divide every embedded segment duration.
DrivingCycle gen_nedc(double dt = 1.0);

// Forward differences; the last element repeats the previous one.
std::vector<double> derive_accel(const DrivingCycle& c);

// Sliding windows of N steps starting at 0, stride, 2*stride, ...
// Every scenario is emitted with x0 = 0: the energy dynamics are additive
// in the initial state, so the optimal gear sequence does not depend on it
// (property-tested on the rollout).
std::vector<Scenario> windows(const DrivingCycle& c, std::size_t N, std::size_t stride = 1);

// Total distance by trapezoidal integration, in meters.
double cycle_distance(const DrivingCycle& c);

}  // namespace gs
