#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gs/cycle.hpp"
#include "gs/ocp.hpp"
#include "gs/vehicle.hpp"

#include "json.hpp"

namespace gs {

// Fixed two-hidden-layer architecture; the backward pass is hand-derived
// for exactly this shape, so the depth is not a free parameter.
struct NetConfig {
    int n_hidden_layers = 2;
    int hidden_width = 64;
    int n_heads = 8;     // one head per horizon step
    int head_width = 2;  // one logit per gear
    double K = 10.0;     // logit scale inside the per-head softmax
    int input_dim = 16;  // 2 * n_heads: (v, a) over the horizon

    int output_dim() const { return n_heads * head_width; }
    void validate() const;
    static NetConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Weights and biases of the three affine layers.
struct MlpTensors {
    Eigen::MatrixXd W1, W2, W3;
    Eigen::VectorXd b1, b2, b3;

    static MlpTensors zeros(const NetConfig& net);
    void setZero();
    void add_scaled(const MlpTensors& other, double scale);
};

struct MlpParams {
    NetConfig net;
    MlpTensors theta;
    Eigen::VectorXd feat_mean;   // per-input
    Eigen::VectorXd feat_scale;  // per-input, strictly positive

    void validate() const;
};

struct TrainConfig {
    double omega1 = 1.0;   // energy term weight
    double omega2 = 0.1;   // binarity penalty weight
    double eta = 0.001;    // learning rate
    int epochs = 300;
    int batch = 32;
    std::uint64_t seed = 4;
    std::string optimizer = "adam";  // or "sgd"
    // Epochs over which the binarity penalty ramps linearly from 0 to
    // omega2. Applying the full penalty from the start hardens the
    // softmax heads before the energy signal has sorted borderline
    // windows, freezing wrong gear choices behind a vanishing Jacobian;
    // the ramp defers that lock-in. 0 disables the schedule.
    int binarity_warmup = 175;
    // Energy normalization in J; values <= 0 mean "derive from the
    // training set" (largest feasible pure-gear window energy).
    double E_ref = 0.0;
    bool parallel = true;

    void validate() const;
    static TrainConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Seeded scaled-uniform (fan-based) initialization; biases start at zero.
// Normalization statistics are left as identity (mean 0, scale 1).
MlpParams init_params(const NetConfig& net, std::uint64_t seed);

// (v_ref, a_ref) over the horizon, normalized entry-wise by the stored
// statistics. x0 is deliberately not an input: shifting it moves every
// candidate plan's terminal energy by the same constant.
Eigen::VectorXd featurize(const Scenario& s, const MlpParams& params);
Eigen::VectorXd denormalize(const Eigen::VectorXd& u, const MlpParams& params);

// exp(K z_i) / sum_j exp(K z_j), max-subtracted. NaN logits are a
// contract violation.
Eigen::VectorXd soft_argmax(const Eigen::VectorXd& z, double K);

struct ForwardTrace {
    Eigen::VectorXd u;   // normalized input
    Eigen::VectorXd h1;  // tanh(W1 u + b1)
    Eigen::VectorXd h2;  // tanh(W2 h1 + b2)
    Eigen::VectorXd y;   // head logits, n_heads * head_width
    RelaxedPlan plan;
};

RelaxedPlan forward(const Scenario& s, const MlpParams& params);
ForwardTrace forward_trace(const Eigen::VectorXd& u, const MlpParams& params);

struct LossParts {
    double total = 0.0;
    double energy = 0.0;    // omega1 * x_N / E_ref
    double binarity = 0.0;  // omega2 * sum b (1 - b)
};

// cfg.E_ref must already be resolved (> 0) here and in the gradient
// functions below; train() handles the auto case.
LossParts loss(const RelaxedPlan& plan, const Scenario& s, const TrainConfig& cfg,
               const VehicleParams& p, const MotorModel& mm, double dt = 1.0);

// dL/db, same row-major layout as the plan.
std::vector<double> loss_grad_plan(const RelaxedPlan& plan, const Scenario& s,
                                   const TrainConfig& cfg, const VehicleParams& p,
                                   const MotorModel& mm, double dt = 1.0);

// Analytic gradient of the loss w.r.t. every weight and bias: the plan
// gradient above, pulled through each head's softmax Jacobian
//   d y_i = K * s_i * (g_i - sum_j s_j g_j),
// then through the two tanh layers.
MlpTensors backward(const Scenario& s, const MlpParams& params, const ForwardTrace& trace,
                    const TrainConfig& cfg, const VehicleParams& p, const MotorModel& mm,
                    double dt = 1.0, LossParts* parts = nullptr);

// Largest feasible single-gear window energy: the loss normalizer when
// TrainConfig.E_ref is left automatic.
double reference_energy(std::span<const Scenario> data, const VehicleParams& p,
                        const MotorModel& mm, double dt = 1.0);

// Per-sample gradients for a batch, written to caller-owned slots so the
// reduction order (and therefore the update) is independent of the thread
// count. The parallel variant is bitwise identical to the serial one.
void batch_backward_serial(std::span<const std::size_t> samples,
                           const std::vector<Eigen::VectorXd>& features,
                           std::span<const Scenario> data, const MlpParams& params,
                           const TrainConfig& cfg, const VehicleParams& p,
                           const MotorModel& mm, double dt, std::span<MlpTensors> grad_slots,
                           std::span<LossParts> loss_slots);
void batch_backward_parallel(std::span<const std::size_t> samples,
                             const std::vector<Eigen::VectorXd>& features,
                             std::span<const Scenario> data, const MlpParams& params,
                             const TrainConfig& cfg, const VehicleParams& p,
                             const MotorModel& mm, double dt, std::span<MlpTensors> grad_slots,
                             std::span<LossParts> loss_slots);

struct EpochStats {
    double mean_loss = 0.0;
    double energy_term = 0.0;
    double binarity_term = 0.0;
};

struct TrainResult {
    MlpParams params;
    std::vector<EpochStats> history;
    double E_ref = 0.0;  // the resolved normalizer
};

// Mini-batch training with Adam (or plain SGD), deterministic under the
// seed. Throws TrainError naming the epoch if the loss goes non-finite.
TrainResult train(std::span<const Scenario> data, const VehicleParams& p, const MotorModel& mm,
                  const NetConfig& net, const TrainConfig& cfg, double dt = 1.0);

// Mean over rows of (1 - max_i b_i): 0 for perfectly binary plans.
double binarity_gap(const RelaxedPlan& plan);
// Fraction of rows whose max component exceeds the threshold.
double binary_fraction(const RelaxedPlan& plan, double threshold = 0.9);

nlohmann::json params_to_json(const MlpParams& params, const TrainConfig& cfg);
MlpParams params_from_json(const nlohmann::json& j);

}  // namespace gs
