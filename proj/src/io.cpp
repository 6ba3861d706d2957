#include "gs/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gs/errors.hpp"

namespace gs {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string RunConfig::params_path() const {
    if (!paths.params.empty()) return paths.params;
    return paths.out + "/params.json";
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) {
        j = read_json_file(path);
        if (!j.is_object()) throw ConfigError("config " + path + ": top level must be an object");
    }

    if (j.contains("vehicle")) {
        nlohmann::json merged = cfg.vehicle.to_json();
        merged.update(j["vehicle"]);
        cfg.vehicle = VehicleParams::from_json(merged);
    }
    if (j.contains("motor")) {
        nlohmann::json merged = cfg.motor.to_json();
        merged.update(j["motor"]);
        cfg.motor = MotorModel::from_json(merged);
    }
    if (j.contains("horizon")) {
        cfg.horizon.N = j["horizon"].value("N", cfg.horizon.N);
        cfg.horizon.dt = j["horizon"].value("dt", cfg.horizon.dt);
    }
    if (j.contains("train")) cfg.train = TrainConfig::from_json(j["train"]);
    if (j.contains("rule_based")) {
        const auto& r = j["rule_based"];
        cfg.rule.v_up = r.value("v_up_kmh", cfg.rule.v_up * 3.6) / 3.6;
        cfg.rule.v_down = r.value("v_down_kmh", cfg.rule.v_down * 3.6) / 3.6;
    }
    if (j.contains("bench")) {
        cfg.bench.repetitions = j["bench"].value("repetitions", cfg.bench.repetitions);
        cfg.bench.max_windows = j["bench"].value("max_windows", cfg.bench.max_windows);
    }
    if (j.contains("paths")) {
        const auto& pp = j["paths"];
        cfg.paths.cycle = pp.value("cycle", cfg.paths.cycle);
        cfg.paths.out = pp.value("out", cfg.paths.out);
        cfg.paths.params = pp.value("params", cfg.paths.params);
        cfg.paths.motor = pp.value("motor", cfg.paths.motor);
    }

    if (cfg.horizon.N < 1) throw ConfigError("config: horizon.N must be >= 1");
    if (!(cfg.horizon.dt > 0.0)) throw ConfigError("config: horizon.dt must be positive");
    if (cfg.rule.v_down < 0.0 || cfg.rule.v_down > cfg.rule.v_up)
        throw ConfigError("config: rule_based thresholds need 0 <= v_down <= v_up");
    cfg.train.validate();
    cfg.vehicle.validate();
    cfg.motor.validate();

    if (cfg.paths.cycle != "nedc" && !std::filesystem::exists(cfg.paths.cycle))
        throw ConfigError("config: cycle file not found: " + cfg.paths.cycle);
    if (!cfg.paths.motor.empty() && !std::filesystem::exists(cfg.paths.motor))
        throw ConfigError("config: motor file not found: " + cfg.paths.motor);
    return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return {{"vehicle", cfg.vehicle.to_json()},
            {"motor", cfg.motor.to_json()},
            {"horizon", {{"N", cfg.horizon.N}, {"dt", cfg.horizon.dt}}},
            {"train", cfg.train.to_json()},
            {"rule_based",
             {{"v_up_kmh", cfg.rule.v_up * 3.6}, {"v_down_kmh", cfg.rule.v_down * 3.6}}},
            {"bench",
             {{"repetitions", cfg.bench.repetitions}, {"max_windows", cfg.bench.max_windows}}},
            {"paths",
             {{"cycle", cfg.paths.cycle},
              {"out", cfg.paths.out},
              {"params", cfg.paths.params},
              {"motor", cfg.paths.motor}}}};
}

DrivingCycle resolve_cycle(const RunConfig& cfg) {
    if (cfg.paths.cycle == "nedc") return gen_nedc(cfg.horizon.dt);
    std::ifstream in(cfg.paths.cycle);
    if (!in) throw ConfigError("cannot open cycle file: " + cfg.paths.cycle);
    return load_cycle(in);
}

MotorModel resolve_motor(const RunConfig& cfg, FitStats* stats) {
    MotorModel mm = cfg.motor;
    if (!cfg.paths.motor.empty()) mm = MotorModel::from_json(read_json_file(cfg.paths.motor));
    if (!mm.fitted) {
        const FitStats st = fit_power_poly(mm, FitGrid{}, cfg.vehicle);
        if (stats) *stats = st;
    }
    return mm;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string loss_history_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,mean_loss,energy_term,binarity_term\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        out += std::to_string(e);
        out += ',' + fmt("%.12g", history[e].mean_loss);
        out += ',' + fmt("%.12g", history[e].energy_term);
        out += ',' + fmt("%.12g", history[e].binarity_term);
        out += '\n';
    }
    return out;
}

std::string cycle_csv(const DrivingCycle& c) {
    std::string out = "t,v,alpha\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        out += fmt("%.9g", c.t[i]);
        out += ',' + fmt("%.9g", c.v[i]);
        out += ',' + fmt("%.9g", c.alpha[i]);
        out += '\n';
    }
    return out;
}

std::string step_csv(const SimReport& rep) {
    std::string out = "t,v,a,gear,Tm,Tb,nm,Pm,W\n";
    for (const StepRecord& r : rep.steps) {
        out += fmt("%.9g", r.t);
        out += ',' + fmt("%.9g", r.v);
        out += ',' + fmt("%.9g", r.a);
        out += ',' + std::to_string(r.gear);
        out += ',' + fmt("%.9g", r.T_m);
        out += ',' + fmt("%.9g", r.T_b);
        out += ',' + fmt("%.9g", r.n_m);
        out += ',' + fmt("%.9g", r.P_m);
        out += ',' + fmt("%.9g", r.W);
        out += '\n';
    }
    return out;
}

std::string comparison_csv(const std::vector<CompareRow>& rows) {
    std::string out = "method,energy_kwh,savings_pct,mean_ms,worst_ms\n";
    for (const CompareRow& r : rows) {
        out += r.method;
        out += ',' + fmt("%.6f", r.energy_kwh);
        out += ',' + fmt("%.4f", r.savings_pct);
        out += ',' + fmt("%.6f", r.mean_ms);
        out += ',' + fmt("%.6f", r.worst_ms);
        out += '\n';
    }
    return out;
}

std::string gear_trace_csv(const std::vector<SimReport>& reports) {
    std::string out = "t";
    for (const SimReport& rep : reports) out += ",gear_" + rep.method;
    out += '\n';
    if (reports.empty()) return out;
    const std::size_t L = reports[0].steps.size();
    for (std::size_t k = 0; k < L; ++k) {
        out += fmt("%.9g", reports[0].steps[k].t);
        for (const SimReport& rep : reports) out += ',' + std::to_string(rep.steps[k].gear);
        out += '\n';
    }
    return out;
}

std::string working_points_csv(const std::vector<SimReport>& reports, const MotorModel& mm) {
    std::string out = "method,t,nm,Tm,eta\n";
    for (const SimReport& rep : reports) {
        for (const StepRecord& r : rep.steps) {
            out += rep.method;
            out += ',' + fmt("%.9g", r.t);
            out += ',' + fmt("%.9g", r.n_m);
            out += ',' + fmt("%.9g", r.T_m);
            out += ',' + fmt("%.9g", mm.eta(r.n_m, r.T_m));
            out += '\n';
        }
    }
    return out;
}

std::string bench_csv(const std::vector<std::pair<std::string, TimingStats>>& rows) {
    std::string out = "method,mean_ms,worst_ms,p99_ms,samples\n";
    for (const auto& [method, st] : rows) {
        out += method;
        out += ',' + fmt("%.6f", st.mean_ms);
        out += ',' + fmt("%.6f", st.worst_ms);
        out += ',' + fmt("%.6f", st.p99_ms);
        out += ',' + std::to_string(st.samples);
        out += '\n';
    }
    return out;
}

nlohmann::json report_to_json(const SimReport& rep) {
    return {{"method", rep.method},
            {"energy_kwh", rep.energy_kwh()},
            {"total_energy_J", rep.total_energy},
            {"gear_shift_count", rep.gear_shift_count},
            {"n_steps", rep.steps.size()}};
}

namespace {

constexpr const char* kMethodColors[] = {"#7f7f7f", "#1f77b4", "#d62728", "#2ca02c"};

struct Frame {
    double x0, x1, y0, y1;        // data range
    double px0, px1, py0, py1;    // pixel box
    double X(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double Y(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

std::string svg_header(int w, int h) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\" font-family=\"sans-serif\" font-size=\"12\">\n"
                  "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n",
                  w, h, w, h, w, h);
    return buf;
}

std::string polyline(const std::string& pts, const char* color, double width) {
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"" +
           fmt("%.2f", width) + "\" points=\"" + pts + "\"/>\n";
}

std::string text_at(double x, double y, const char* color, const std::string& s) {
    return "<text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", y) + "\" fill=\"" + color +
           "\">" + s + "</text>\n";
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    std::string s;
    s += "<rect x=\"" + fmt("%.1f", f.px0) + "\" y=\"" + fmt("%.1f", f.py0) + "\" width=\"" +
         fmt("%.1f", f.px1 - f.px0) + "\" height=\"" + fmt("%.1f", f.py1 - f.py0) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
    s += text_at(f.px0, f.py1 + 28, "#333", xlabel);
    s += text_at(f.px0, f.py0 - 8, "#333", ylabel);
    return s;
}

}  // namespace

std::string svg_gear_trace(const std::vector<SimReport>& reports) {
    const int W = 1000, H = 420;
    std::string svg = svg_header(W, H);
    if (reports.empty() || reports[0].steps.empty()) return svg + "</svg>\n";

    const std::size_t L = reports[0].steps.size();
    const double t0 = reports[0].steps.front().t;
    const double t1 = reports[0].steps.back().t;
    double vmax = 1.0;
    for (const StepRecord& r : reports[0].steps) vmax = std::max(vmax, r.v);

    // Upper panel: the speed profile; lower panel: one step-line per
    // strategy, vertically offset so identical traces stay visible.
    Frame fv{t0, t1, 0.0, vmax, 50, W - 20.0, 30, 170};
    Frame fg{t0, t1, 0.5, 2.8, 50, W - 20.0, 210, H - 40.0};

    std::string pts;
    for (const StepRecord& r : reports[0].steps)
        pts += fmt("%.1f", fv.X(r.t)) + "," + fmt("%.1f", fv.Y(r.v)) + " ";
    svg += axes(fv, "", "speed m/s");
    svg += polyline(pts, "#444", 1.0);

    svg += axes(fg, "time s", "gear");
    for (std::size_t m = 0; m < reports.size(); ++m) {
        const double off = 0.06 * static_cast<double>(m);
        std::string gp;
        for (std::size_t k = 0; k < L; ++k) {
            const double y = fg.Y(reports[m].steps[k].gear + off);
            const double xa = fg.X(reports[m].steps[k].t);
            if (k > 0 && reports[m].steps[k].gear != reports[m].steps[k - 1].gear)
                gp += fmt("%.1f", xa) + "," +
                      fmt("%.1f", fg.Y(reports[m].steps[k - 1].gear + off)) + " ";
            gp += fmt("%.1f", xa) + "," + fmt("%.1f", y) + " ";
        }
        const char* color = kMethodColors[m % 4];
        svg += polyline(gp, color, 1.4);
        svg += text_at(60 + 150.0 * static_cast<double>(m), 200, color, reports[m].method);
    }
    return svg + "</svg>\n";
}

std::string svg_working_points(const std::vector<SimReport>& reports, const MotorModel& mm) {
    const int W = 900, H = 520;
    std::string svg = svg_header(W, H);
    Frame f{0.0, mm.n_max, -mm.T_max, mm.T_max, 60, W - 20.0, 30, H - 50.0};
    svg += axes(f, "motor speed rpm", "motor torque N*m");
    svg += polyline(fmt("%.1f", f.X(0)) + "," + fmt("%.1f", f.Y(0)) + " " +
                        fmt("%.1f", f.X(mm.n_max)) + "," + fmt("%.1f", f.Y(0)),
                    "#bbb", 1.0);
    for (std::size_t m = 0; m < reports.size(); ++m) {
        const char* color = kMethodColors[m % 4];
        for (const StepRecord& r : reports[m].steps) {
            svg += "<circle cx=\"" + fmt("%.1f", f.X(r.n_m)) + "\" cy=\"" +
                   fmt("%.1f", f.Y(r.T_m)) + "\" r=\"1.6\" fill=\"" + color +
                   "\" fill-opacity=\"0.45\"/>\n";
        }
        svg += text_at(70 + 150.0 * static_cast<double>(m), 20, color, reports[m].method);
    }
    return svg + "</svg>\n";
}

std::string svg_loss_curve(const std::vector<EpochStats>& history) {
    const int W = 800, H = 420;
    std::string svg = svg_header(W, H);
    if (history.empty()) return svg + "</svg>\n";

    double lo = history[0].mean_loss, hi = history[0].mean_loss;
    for (const EpochStats& e : history) {
        lo = std::min({lo, e.mean_loss, e.energy_term, e.binarity_term});
        hi = std::max({hi, e.mean_loss, e.energy_term, e.binarity_term});
    }
    if (hi <= lo) hi = lo + 1.0;
    Frame f{0.0, static_cast<double>(history.size() - 1), lo, hi, 60, W - 20.0, 30, H - 50.0};
    svg += axes(f, "epoch", "loss");

    const char* colors[] = {"#333", "#1f77b4", "#d62728"};
    const char* names[] = {"mean_loss", "energy_term", "binarity_term"};
    for (int series = 0; series < 3; ++series) {
        std::string pts;
        for (std::size_t e = 0; e < history.size(); ++e) {
            const double y = series == 0   ? history[e].mean_loss
                             : series == 1 ? history[e].energy_term
                                           : history[e].binarity_term;
            pts += fmt("%.1f", f.X(static_cast<double>(e))) + "," + fmt("%.1f", f.Y(y)) + " ";
        }
        svg += polyline(pts, colors[series], 1.4);
        svg += text_at(70 + 150.0 * series, 20, colors[series], names[series]);
    }
    return svg + "</svg>\n";
}

}  // namespace gs
