#include "gs/nn.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gs/errors.hpp"

namespace gs {

void NetConfig::validate() const {
    if (n_hidden_layers != 2)
        throw ConfigError("net: backward pass is derived for exactly 2 hidden layers");
    if (hidden_width < 1) throw ConfigError("net: hidden_width must be >= 1");
    if (n_heads < 1) throw ConfigError("net: n_heads must be >= 1");
    if (head_width < 2) throw ConfigError("net: head_width must be >= 2");
    if (!(K > 0.0)) throw ConfigError("net: softmax scale K must be positive");
    if (input_dim != 2 * n_heads)
        throw ConfigError("net: input_dim must be 2 * n_heads (speed and acceleration per step)");
}

NetConfig NetConfig::from_json(const nlohmann::json& j) {
    NetConfig c;
    c.n_hidden_layers = j.value("n_hidden_layers", c.n_hidden_layers);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.head_width = j.value("head_width", c.head_width);
    c.K = j.value("K", c.K);
    c.input_dim = j.value("input_dim", 2 * c.n_heads);
    return c;
}

nlohmann::json NetConfig::to_json() const {
    return {{"n_hidden_layers", n_hidden_layers}, {"hidden_width", hidden_width},
            {"n_heads", n_heads},                 {"head_width", head_width},
            {"K", K},                             {"input_dim", input_dim}};
}

MlpTensors MlpTensors::zeros(const NetConfig& net) {
    MlpTensors t;
    t.W1 = Eigen::MatrixXd::Zero(net.hidden_width, net.input_dim);
    t.b1 = Eigen::VectorXd::Zero(net.hidden_width);
    t.W2 = Eigen::MatrixXd::Zero(net.hidden_width, net.hidden_width);
    t.b2 = Eigen::VectorXd::Zero(net.hidden_width);
    t.W3 = Eigen::MatrixXd::Zero(net.output_dim(), net.hidden_width);
    t.b3 = Eigen::VectorXd::Zero(net.output_dim());
    return t;
}

void MlpTensors::setZero() {
    W1.setZero();
    b1.setZero();
    W2.setZero();
    b2.setZero();
    W3.setZero();
    b3.setZero();
}

void MlpTensors::add_scaled(const MlpTensors& other, double scale) {
    W1 += scale * other.W1;
    b1 += scale * other.b1;
    W2 += scale * other.W2;
    b2 += scale * other.b2;
    W3 += scale * other.W3;
    b3 += scale * other.b3;
}

void MlpParams::validate() const {
    net.validate();
    if (theta.W1.rows() != net.hidden_width || theta.W1.cols() != net.input_dim ||
        theta.W2.rows() != net.hidden_width || theta.W2.cols() != net.hidden_width ||
        theta.W3.rows() != net.output_dim() || theta.W3.cols() != net.hidden_width ||
        theta.b1.size() != net.hidden_width || theta.b2.size() != net.hidden_width ||
        theta.b3.size() != net.output_dim())
        throw ConfigError("params: layer shapes do not match the network config");
    if (feat_mean.size() != net.input_dim || feat_scale.size() != net.input_dim)
        throw ConfigError("params: normalization length does not match input_dim");
    for (Eigen::Index i = 0; i < feat_scale.size(); ++i)
        if (!(feat_scale[i] > 0.0))
            throw ConfigError("params: normalization scales must be positive");
}

void TrainConfig::validate() const {
    if (!(omega1 > 0.0)) throw ConfigError("train: omega1 must be positive");
    if (!(omega2 > 0.0)) throw ConfigError("train: omega2 must be positive");
    if (!(eta > 0.0)) throw ConfigError("train: eta must be positive");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch < 1) throw ConfigError("train: batch must be >= 1");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("train: optimizer must be \"adam\" or \"sgd\"");
    if (binarity_warmup < 0) throw ConfigError("train: binarity_warmup must be >= 0");
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.omega1 = j.value("omega1", c.omega1);
    c.omega2 = j.value("omega2", c.omega2);
    c.eta = j.value("eta", c.eta);
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    c.seed = j.value("seed", c.seed);
    c.optimizer = j.value("optimizer", c.optimizer);
    c.binarity_warmup = j.value("binarity_warmup", c.binarity_warmup);
    c.E_ref = j.value("E_ref", c.E_ref);
    c.parallel = j.value("parallel", c.parallel);
    return c;
}

nlohmann::json TrainConfig::to_json() const {
    return {{"omega1", omega1},       {"omega2", omega2},
            {"eta", eta},             {"epochs", epochs},
            {"batch", batch},         {"seed", seed},
            {"optimizer", optimizer}, {"binarity_warmup", binarity_warmup},
            {"E_ref", E_ref},         {"parallel", parallel}};
}

namespace {

MlpParams init_with(const NetConfig& net, std::mt19937_64& rng) {
    net.validate();
    MlpParams p;
    p.net = net;
    p.theta = MlpTensors::zeros(net);

    auto fill = [&rng](Eigen::MatrixXd& W, double scale) {
        const double limit = scale * std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = dist(rng);
    };
    fill(p.theta.W1, 1.0);
    fill(p.theta.W2, 1.0);
    // Small output layer: initial logits near zero keep the K-scaled
    // softmax away from its flat saturated corners, where the energy
    // gradient would vanish before it can shape the gear choices.
    fill(p.theta.W3, 0.05);

    p.feat_mean = Eigen::VectorXd::Zero(net.input_dim);
    p.feat_scale = Eigen::VectorXd::Ones(net.input_dim);
    return p;
}

}  // namespace

MlpParams init_params(const NetConfig& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return init_with(net, rng);
}

Eigen::VectorXd featurize(const Scenario& s, const MlpParams& params) {
    const int N = params.net.n_heads;
    if (static_cast<int>(s.horizon()) != N)
        throw std::invalid_argument("featurize: scenario length does not match the network horizon");
    Eigen::VectorXd u(params.net.input_dim);
    for (int k = 0; k < N; ++k) {
        u[k] = s.v_ref[static_cast<std::size_t>(k)];
        u[N + k] = s.a_ref[static_cast<std::size_t>(k)];
    }
    return (u - params.feat_mean).cwiseQuotient(params.feat_scale);
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& u, const MlpParams& params) {
    if (u.size() != params.feat_mean.size())
        throw std::invalid_argument("denormalize: vector length does not match normalization");
    return u.cwiseProduct(params.feat_scale) + params.feat_mean;
}

Eigen::VectorXd soft_argmax(const Eigen::VectorXd& z, double K) {
    if (z.size() == 0) throw std::invalid_argument("soft_argmax: empty logit vector");
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (!std::isfinite(z[i])) throw std::invalid_argument("soft_argmax: non-finite logit");
    const double zmax = z.maxCoeff();
    Eigen::VectorXd e = (K * (z.array() - zmax)).exp().matrix();
    return e / e.sum();
}

ForwardTrace forward_trace(const Eigen::VectorXd& u, const MlpParams& params) {
    const NetConfig& net = params.net;
    ForwardTrace tr;
    tr.u = u;
    tr.h1 = (params.theta.W1 * u + params.theta.b1).array().tanh().matrix();
    tr.h2 = (params.theta.W2 * tr.h1 + params.theta.b2).array().tanh().matrix();
    tr.y = params.theta.W3 * tr.h2 + params.theta.b3;

    tr.plan = RelaxedPlan::zeros(static_cast<std::size_t>(net.n_heads),
                                 static_cast<std::size_t>(net.head_width));
    for (int k = 0; k < net.n_heads; ++k) {
        const Eigen::VectorXd s = soft_argmax(tr.y.segment(k * net.head_width, net.head_width),
                                              net.K);
        for (int i = 0; i < net.head_width; ++i)
            tr.plan.at(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = s[i];
    }
    return tr;
}

RelaxedPlan forward(const Scenario& s, const MlpParams& params) {
    return forward_trace(featurize(s, params), params).plan;
}

LossParts loss(const RelaxedPlan& plan, const Scenario& s, const TrainConfig& cfg,
               const VehicleParams& p, const MotorModel& mm, double dt) {
    if (!(cfg.E_ref > 0.0)) throw std::invalid_argument("loss: E_ref must be resolved (> 0)");
    const RolloutResult r = rollout(s, plan, p, mm, dt);
    LossParts parts;
    parts.energy = cfg.omega1 * r.x_N() / cfg.E_ref;
    double xi = 0.0;
    for (double b : plan.b) xi += b * (1.0 - b);
    parts.binarity = cfg.omega2 * xi;
    parts.total = parts.energy + parts.binarity;
    return parts;
}

std::vector<double> loss_grad_plan(const RelaxedPlan& plan, const Scenario& s,
                                   const TrainConfig& cfg, const VehicleParams& p,
                                   const MotorModel& mm, double dt) {
    if (!(cfg.E_ref > 0.0))
        throw std::invalid_argument("loss_grad_plan: E_ref must be resolved (> 0)");
    std::vector<double> g = rollout_grad(s, plan, p, mm, dt);
    const double w = cfg.omega1 / cfg.E_ref;
    for (std::size_t idx = 0; idx < g.size(); ++idx)
        g[idx] = w * g[idx] + cfg.omega2 * (1.0 - 2.0 * plan.b[idx]);
    return g;
}

MlpTensors backward(const Scenario& s, const MlpParams& params, const ForwardTrace& trace,
                    const TrainConfig& cfg, const VehicleParams& p, const MotorModel& mm,
                    double dt, LossParts* parts) {
    const NetConfig& net = params.net;
    if (trace.plan.N != static_cast<std::size_t>(net.n_heads) ||
        trace.plan.n_b != static_cast<std::size_t>(net.head_width))
        throw std::invalid_argument("backward: trace shape does not match the network config");

    const std::vector<double> g_b = loss_grad_plan(trace.plan, s, cfg, p, mm, dt);
    if (parts) *parts = loss(trace.plan, s, cfg, p, mm, dt);

    // Softmax Jacobian per head: dy_i = K * s_i * (g_i - s . g).
    Eigen::VectorXd dy(net.output_dim());
    for (int k = 0; k < net.n_heads; ++k) {
        double dot = 0.0;
        for (int i = 0; i < net.head_width; ++i)
            dot += trace.plan.at(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) *
                   g_b[static_cast<std::size_t>(k * net.head_width + i)];
        for (int i = 0; i < net.head_width; ++i) {
            const double si =
                trace.plan.at(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
            dy[k * net.head_width + i] =
                net.K * si * (g_b[static_cast<std::size_t>(k * net.head_width + i)] - dot);
        }
    }

    MlpTensors g;
    const Eigen::VectorXd dh2 = params.theta.W3.transpose() * dy;
    const Eigen::VectorXd dz2 =
        dh2.cwiseProduct((1.0 - trace.h2.array().square()).matrix());
    const Eigen::VectorXd dh1 = params.theta.W2.transpose() * dz2;
    const Eigen::VectorXd dz1 =
        dh1.cwiseProduct((1.0 - trace.h1.array().square()).matrix());

    g.W3 = dy * trace.h2.transpose();
    g.b3 = dy;
    g.W2 = dz2 * trace.h1.transpose();
    g.b2 = dz2;
    g.W1 = dz1 * trace.u.transpose();
    g.b1 = dz1;
    return g;
}

double reference_energy(std::span<const Scenario> data, const VehicleParams& p,
                        const MotorModel& mm, double dt) {
    if (data.empty()) throw std::invalid_argument("reference_energy: empty training set");
    bool found = false;
    double best = 0.0;
    for (const Scenario& s : data) {
        const std::size_t N = s.horizon();
        for (int gear = 1; gear <= p.n_gears(); ++gear) {
            const std::vector<int> gears(N, gear);
            const PlanEval ev = rollout_integer(s, gears, p, mm, dt);
            if (!ev.feasible) continue;
            if (!found || ev.x_N > best) {
                found = true;
                best = ev.x_N;
            }
        }
    }
    if (!found)
        throw Error("reference_energy: no feasible single-gear rollout in the training set");
    if (!(best > 0.0))
        throw Error("reference_energy: largest feasible window energy is not positive");
    return best;
}

void batch_backward_serial(std::span<const std::size_t> samples,
                           const std::vector<Eigen::VectorXd>& features,
                           std::span<const Scenario> data, const MlpParams& params,
                           const TrainConfig& cfg, const VehicleParams& p, const MotorModel& mm,
                           double dt, std::span<MlpTensors> grad_slots,
                           std::span<LossParts> loss_slots) {
    if (grad_slots.size() < samples.size() || loss_slots.size() < samples.size())
        throw std::invalid_argument("batch_backward: slot spans shorter than the batch");
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const std::size_t idx = samples[s];
        const ForwardTrace tr = forward_trace(features[idx], params);
        grad_slots[s] = backward(data[idx], params, tr, cfg, p, mm, dt, &loss_slots[s]);
    }
}

void batch_backward_parallel(std::span<const std::size_t> samples,
                             const std::vector<Eigen::VectorXd>& features,
                             std::span<const Scenario> data, const MlpParams& params,
                             const TrainConfig& cfg, const VehicleParams& p, const MotorModel& mm,
                             double dt, std::span<MlpTensors> grad_slots,
                             std::span<LossParts> loss_slots) {
    if (grad_slots.size() < samples.size() || loss_slots.size() < samples.size())
        throw std::invalid_argument("batch_backward: slot spans shorter than the batch");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
    // An exception escaping an OpenMP loop terminates the process, so
    // capture the first one and rethrow after the join.
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n; ++s) {
        try {
            const std::size_t idx = samples[static_cast<std::size_t>(s)];
            const ForwardTrace tr = forward_trace(features[idx], params);
            grad_slots[static_cast<std::size_t>(s)] =
                backward(data[idx], params, tr, cfg, p, mm, dt,
                         &loss_slots[static_cast<std::size_t>(s)]);
        } catch (...) {
#pragma omp critical(gs_batch_backward_err)
            {
                if (!err) err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
}

namespace {

struct AdamState {
    MlpTensors m, v;
    long t = 0;
};

void adam_update_one(Eigen::MatrixXd& theta, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                     Eigen::MatrixXd& v, double eta, long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * g;
    v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
    const double mc = 1.0 - std::pow(b1, static_cast<double>(t));
    const double vc = 1.0 - std::pow(b2, static_cast<double>(t));
    theta.array() -= eta * (m.array() / mc) / ((v.array() / vc).sqrt() + eps);
}

void adam_update_one(Eigen::VectorXd& theta, const Eigen::VectorXd& g, Eigen::VectorXd& m,
                     Eigen::VectorXd& v, double eta, long t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * g;
    v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
    const double mc = 1.0 - std::pow(b1, static_cast<double>(t));
    const double vc = 1.0 - std::pow(b2, static_cast<double>(t));
    theta.array() -= eta * (m.array() / mc) / ((v.array() / vc).sqrt() + eps);
}

void apply_update(MlpTensors& theta, const MlpTensors& g, AdamState& st, const TrainConfig& cfg) {
    if (cfg.optimizer == "sgd") {
        theta.add_scaled(g, -cfg.eta);
        return;
    }
    ++st.t;
    adam_update_one(theta.W1, g.W1, st.m.W1, st.v.W1, cfg.eta, st.t);
    adam_update_one(theta.b1, g.b1, st.m.b1, st.v.b1, cfg.eta, st.t);
    adam_update_one(theta.W2, g.W2, st.m.W2, st.v.W2, cfg.eta, st.t);
    adam_update_one(theta.b2, g.b2, st.m.b2, st.v.b2, cfg.eta, st.t);
    adam_update_one(theta.W3, g.W3, st.m.W3, st.v.W3, cfg.eta, st.t);
    adam_update_one(theta.b3, g.b3, st.m.b3, st.v.b3, cfg.eta, st.t);
}

}  // namespace

TrainResult train(std::span<const Scenario> data, const VehicleParams& p, const MotorModel& mm,
                  const NetConfig& net, const TrainConfig& cfg, double dt) {
    net.validate();
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train: empty training set");
    for (const Scenario& s : data)
        if (s.horizon() != static_cast<std::size_t>(net.n_heads))
            throw std::invalid_argument("train: scenario length does not match the network horizon");

    std::mt19937_64 rng(cfg.seed);
    TrainResult res;
    res.params = init_with(net, rng);

    // Per-input normalization from the raw feature matrix; constant
    // features keep scale 1 so they map to exactly zero.
    {
        const int D = net.input_dim;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
        Eigen::VectorXd sq = Eigen::VectorXd::Zero(D);
        const int N = net.n_heads;
        for (const Scenario& s : data) {
            for (int k = 0; k < N; ++k) {
                mean[k] += s.v_ref[static_cast<std::size_t>(k)];
                mean[N + k] += s.a_ref[static_cast<std::size_t>(k)];
                sq[k] += s.v_ref[static_cast<std::size_t>(k)] * s.v_ref[static_cast<std::size_t>(k)];
                sq[N + k] +=
                    s.a_ref[static_cast<std::size_t>(k)] * s.a_ref[static_cast<std::size_t>(k)];
            }
        }
        mean /= static_cast<double>(data.size());
        sq /= static_cast<double>(data.size());
        res.params.feat_mean = mean;
        res.params.feat_scale.resize(D);
        for (int i = 0; i < D; ++i) {
            const double var = std::max(0.0, sq[i] - mean[i] * mean[i]);
            const double sd = std::sqrt(var);
            res.params.feat_scale[i] = sd > 1e-9 ? sd : 1.0;
        }
    }

    TrainConfig run_cfg = cfg;
    run_cfg.E_ref = cfg.E_ref > 0.0 ? cfg.E_ref : reference_energy(data, p, mm, dt);
    res.E_ref = run_cfg.E_ref;

    std::vector<Eigen::VectorXd> features;
    features.reserve(data.size());
    for (const Scenario& s : data) features.push_back(featurize(s, res.params));

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t B = static_cast<std::size_t>(cfg.batch);
    std::vector<MlpTensors> grad_slots(B, MlpTensors::zeros(net));
    std::vector<LossParts> loss_slots(B);
    MlpTensors g_mean = MlpTensors::zeros(net);
    AdamState adam{MlpTensors::zeros(net), MlpTensors::zeros(net), 0};

    res.history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        if (cfg.binarity_warmup > 0)
            run_cfg.omega2 = cfg.omega2 * std::min(1.0, static_cast<double>(epoch) /
                                                            static_cast<double>(cfg.binarity_warmup));

        EpochStats st;
        for (std::size_t start = 0; start < order.size(); start += B) {
            const std::size_t count = std::min(B, order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, count);
            const std::span<MlpTensors> gs(grad_slots.data(), count);
            const std::span<LossParts> ls(loss_slots.data(), count);
            if (cfg.parallel)
                batch_backward_parallel(batch, features, data, res.params, run_cfg, p, mm, dt,
                                        gs, ls);
            else
                batch_backward_serial(batch, features, data, res.params, run_cfg, p, mm, dt, gs,
                                      ls);

            // Fixed-order reduction: the mean gradient is bitwise
            // independent of how the slots were produced.
            g_mean.setZero();
            const double w = 1.0 / static_cast<double>(count);
            for (std::size_t s = 0; s < count; ++s) g_mean.add_scaled(grad_slots[s], w);
            for (std::size_t s = 0; s < count; ++s) {
                st.mean_loss += loss_slots[s].total;
                st.energy_term += loss_slots[s].energy;
                st.binarity_term += loss_slots[s].binarity;
            }
            // A non-finite batch would poison the weights on the next
            // update; stop before applying it.
            if (!std::isfinite(st.mean_loss))
                throw TrainError("train: loss became non-finite", epoch);

            apply_update(res.params.theta, g_mean, adam, cfg);
        }

        const double n = static_cast<double>(order.size());
        st.mean_loss /= n;
        st.energy_term /= n;
        st.binarity_term /= n;
        if (!std::isfinite(st.mean_loss))
            throw TrainError("train: loss became non-finite", epoch);
        res.history.push_back(st);
    }
    return res;
}

double binarity_gap(const RelaxedPlan& plan) {
    if (plan.N == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < plan.N; ++k) {
        double best = 0.0;
        for (std::size_t i = 0; i < plan.n_b; ++i) best = std::max(best, plan.at(k, i));
        sum += 1.0 - best;
    }
    return sum / static_cast<double>(plan.N);
}

double binary_fraction(const RelaxedPlan& plan, double threshold) {
    if (plan.N == 0) return 1.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < plan.N; ++k) {
        double best = 0.0;
        for (std::size_t i = 0; i < plan.n_b; ++i) best = std::max(best, plan.at(k, i));
        if (best > threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(plan.N);
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& W) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) arr.push_back(W(r, c));
    return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr, Eigen::Index rows,
                                 Eigen::Index cols, const char* name) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw ConfigError(std::string("params: layer \"") + name +
                          "\" has the wrong number of weights");
    Eigen::MatrixXd W(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) W(r, c) = arr[i++].get<double>();
    return W;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr, Eigen::Index n, const char* name) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != n)
        throw ConfigError(std::string("params: vector \"") + name + "\" has the wrong length");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = arr[i].get<double>();
    return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

nlohmann::json layer_to_json(const char* name, const Eigen::MatrixXd& W,
                             const Eigen::VectorXd& b) {
    return {{"name", name},
            {"rows", W.rows()},
            {"cols", W.cols()},
            {"W", matrix_to_json(W)},
            {"b", vector_to_json(b)}};
}

}  // namespace

nlohmann::json params_to_json(const MlpParams& params, const TrainConfig& cfg) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["net"] = params.net.to_json();
    j["normalization"] = {{"mean", vector_to_json(params.feat_mean)},
                          {"scale", vector_to_json(params.feat_scale)}};
    j["layers"] = nlohmann::json::array({
        layer_to_json("hidden1", params.theta.W1, params.theta.b1),
        layer_to_json("hidden2", params.theta.W2, params.theta.b2),
        layer_to_json("output", params.theta.W3, params.theta.b3),
    });
    j["train"] = cfg.to_json();
    return j;
}

MlpParams params_from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1)
        throw ConfigError("params: unsupported or missing format_version");
    if (!j.contains("net") || !j.contains("layers") || !j.contains("normalization"))
        throw ConfigError("params: missing net, layers, or normalization section");

    MlpParams p;
    p.net = NetConfig::from_json(j["net"]);

    const nlohmann::json& layers = j["layers"];
    if (!layers.is_array() || layers.size() != 3)
        throw ConfigError("params: expected exactly 3 layers");
    const int H = p.net.hidden_width;
    const int D = p.net.input_dim;
    const int O = p.net.output_dim();
    p.theta.W1 = matrix_from_json(layers[0]["W"], H, D, "hidden1");
    p.theta.b1 = vector_from_json(layers[0]["b"], H, "hidden1.b");
    p.theta.W2 = matrix_from_json(layers[1]["W"], H, H, "hidden2");
    p.theta.b2 = vector_from_json(layers[1]["b"], H, "hidden2.b");
    p.theta.W3 = matrix_from_json(layers[2]["W"], O, H, "output");
    p.theta.b3 = vector_from_json(layers[2]["b"], O, "output.b");

    p.feat_mean = vector_from_json(j["normalization"]["mean"], D, "normalization.mean");
    p.feat_scale = vector_from_json(j["normalization"]["scale"], D, "normalization.scale");
    p.validate();
    return p;
}

}  // namespace gs
