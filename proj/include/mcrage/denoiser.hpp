#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcrage/diffusion.hpp"
#include "mcrage/schedule.hpp"

namespace mcrage {

// Weights of the eps-prediction MLP. Input is [x_t | time embedding | class
// embedding], two SiLU hidden layers, linear output back to d. The class
// embedding table has G+1 rows; row G is the unconditional token.
struct DenoiserParams {
    int d = 0;
    int group_count = 0; // G
    int embed_dim = 0;   // e, shared by time and class embeddings
    int hidden = 0;
    int t_prime = 0;     // bound at training time; needed to normalize t

    Eigen::MatrixXd w1, w2, w3; // (d+2e)xH, HxH, Hxd
    Eigen::RowVectorXd b1, b2, b3;
    Eigen::MatrixXd embedding;  // (G+1) x e

    int input_dim() const { return d + 2 * embed_dim; }
    int unconditional_token() const { return group_count; }
    bool finite() const;
};

// Gradients (and Adam moments) are stored congruently to the parameters.
using ParamGrads = DenoiserParams;

struct TrainConfig {
    double learning_rate = 1e-3;
    double dropout_rate = 0.0;   // [0,1)
    int epochs = 2000;
    int batch_size = 256;
    double p_uncond = 0.1;       // probability of the unconditional token
    int checkpoint_every = 100;  // probe cadence in epochs
    double validation_fraction = 0.1; // (0, 0.5]
    int hidden = 128;
    int embed_dim = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Checkpoint {
    DenoiserParams params;
    int epoch = 0;
    double f1 = 0.0; // probe score; NaN when no probe ran
};

struct ProbePoint {
    int epoch;
    double f1;
};

struct TrainResult {
    Checkpoint best;
    std::vector<double> loss_curve;     // per-epoch mean of L_simple
    std::vector<ProbePoint> f1_probes;
};

// e/2 sin + e/2 cos of (t/T') against log-spaced frequencies.
Eigen::RowVectorXd time_embedding(int t, int t_prime, int embed_dim);

// Zero-mean uniform init scaled by 1/sqrt(fan_in); zero biases.
DenoiserParams init_params(int d, int group_count, int embed_dim, int hidden, std::uint64_t seed,
                           int t_prime = 0);

// Inverted-dropout masks for the two hidden layers (entries 0 or 1/(1-p)).
struct DropoutMask {
    Eigen::MatrixXd h1, h2; // batch x hidden
};

DropoutMask make_dropout_mask(int batch, int hidden, double rate, class Rng& rng);

// eps_hat for a batch; t and class id per row. Deterministic given inputs
// and mask.
Eigen::MatrixXd forward(const DenoiserParams& params, const Eigen::MatrixXd& x_t,
                        const std::vector<int>& t, const std::vector<int>& cls,
                        const DropoutMask* mask = nullptr);

// Mean over the batch of ||eps - eps_hat(x_t,t,c)||^2 with x_t built by the
// closed-form forward noising.
double loss_simple(const DenoiserParams& params, const Eigen::MatrixXd& x0,
                   const std::vector<int>& t, const Eigen::MatrixXd& eps,
                   const std::vector<int>& cls, const NoiseSchedule& sched,
                   const DropoutMask* mask = nullptr);

// Reverse-mode gradient of loss_simple in the parameters. Embedding rows of
// classes absent from the batch stay zero.
ParamGrads gradient(const DenoiserParams& params, const Eigen::MatrixXd& x0,
                    const std::vector<int>& t, const Eigen::MatrixXd& eps,
                    const std::vector<int>& cls, const NoiseSchedule& sched,
                    const DropoutMask* mask = nullptr, double* loss_out = nullptr);

struct AdamState {
    ParamGrads m, v;
    long step = 0;
};

AdamState init_adam(const DenoiserParams& params);

// Standard Adam with bias correction; beta1 0.9, beta2 0.999, eps 1e-8.
void adam_step(DenoiserParams& params, const ParamGrads& grads, AdamState& state, double lr);

// Mid-training evaluation hook: given current params and the epoch, returns
// a downstream F1 (see rebalance::make_f1_probe). The argmax checkpoint is
// retained, first max on ties.
using ProbeFn = std::function<double(const DenoiserParams& params, int epoch)>;

// Minibatch training of L_simple: per epoch rows are reshuffled, t drawn
// uniform on [1,T'], eps fresh per row, class replaced by the unconditional
// token with probability p_uncond. Throws a diverged-training error naming
// the last finite epoch if the loss leaves the reals.
TrainResult train(const Eigen::MatrixXd& features, const std::vector<int>& group_ids,
                  int group_count, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const ProbeFn& probe = nullptr);

// Spec-shaped sampler: wraps diffusion sampling with this network as eps_fn.
Eigen::MatrixXd sample(const DenoiserParams& params, const NoiseSchedule& sched, int class_id,
                       int count, const GuidanceConfig& guidance, std::uint64_t seed);

EpsFn make_eps_fn(const DenoiserParams& params);

// --- checkpoint file ------------------------------------------------------
// Versioned header (magic, format version, d, G, e, hidden, T') followed by
// flat little-endian f64 tensors in declared order: w1, b1, w2, b2, w3, b3,
// embedding. Row-major within each tensor.

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mcrage
