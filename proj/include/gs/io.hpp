#pragma once

#include <string>
#include <vector>

#include "gs/cycle.hpp"
#include "gs/mpc.hpp"
#include "gs/nn.hpp"
#include "gs/ocp.hpp"
#include "gs/vehicle.hpp"

#include "json.hpp"

namespace gs {

// One JSON document with optional sections; missing keys fall back to
// the built-in defaults. CLI flags override the path/seed fields after
// loading.
struct RunConfig {
    VehicleParams vehicle;
    MotorModel motor;  // may be unfitted; resolve_motor() completes it
    struct Horizon {
        int N = 8;
        double dt = 1.0;
    } horizon;
    TrainConfig train;
    RuleShiftConfig rule;
    struct Bench {
        int repetitions = 3;
        int max_windows = 0;  // 0 = all
    } bench;
    struct Paths {
        std::string cycle = "nedc";  // "nedc" or a CSV path
        std::string out = "out";
        std::string params;  // empty = <out>/params.json
        std::string motor;   // empty = fit in process
    } paths;

    std::string params_path() const;
};

// "" loads pure defaults. Missing file, malformed JSON, or invalid values
// raise ConfigError naming the offender.
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

// gen_nedc at the configured dt, or the referenced CSV.
DrivingCycle resolve_cycle(const RunConfig& cfg);

// A ready-to-use motor model: loaded from paths.motor when given,
// otherwise fitted in process (deterministic, < 100 ms).
MotorModel resolve_motor(const RunConfig& cfg, FitStats* stats = nullptr);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

std::string loss_history_csv(const std::vector<EpochStats>& history);
std::string cycle_csv(const DrivingCycle& c);
std::string step_csv(const SimReport& rep);
std::string comparison_csv(const std::vector<CompareRow>& rows);
std::string gear_trace_csv(const std::vector<SimReport>& reports);
std::string working_points_csv(const std::vector<SimReport>& reports, const MotorModel& mm);
std::string bench_csv(const std::vector<std::pair<std::string, TimingStats>>& rows);

// Report summary without wall-clock fields, so reruns are byte-identical.
nlohmann::json report_to_json(const SimReport& rep);

// Self-contained SVG renderings of the comparison outputs.
std::string svg_gear_trace(const std::vector<SimReport>& reports);
std::string svg_working_points(const std::vector<SimReport>& reports, const MotorModel& mm);
std::string svg_loss_curve(const std::vector<EpochStats>& history);

}  // namespace gs
