#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "mcrage/schedule.hpp"

namespace mcrage {

struct GuidanceConfig {
    double weight = 0.0;          // w >= 0; 0 disables the unconditional branch
    int unconditional_token = -1; // reserved class id G (one past the last group)
    // Posterior variance: false -> beta_tilde_t = (1-abar_{t-1})/(1-abar_t)*beta_t,
    // true -> the barless (1-alpha_t)/(1-alpha_{t-1})*beta_t variant.
    bool paper_variance = false;
};

// x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                               const NoiseSchedule& sched);

// Batched form; rows are independent samples, t per row.
Eigen::MatrixXd forward_sample_batch(const Eigen::MatrixXd& x0, const std::vector<int>& t,
                                     const Eigen::MatrixXd& eps, const NoiseSchedule& sched);

// Posterior step x_{t-1} = mu + sigma_t z with
// mu = (x_t - beta_t/sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t).
// sigma_1 is always 0 (callers pass z = 0 at t = 1).
Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t, int t, const Eigen::VectorXd& eps_hat,
                             const NoiseSchedule& sched, const Eigen::VectorXd& z,
                             bool paper_variance = false);

double posterior_variance(int t, const NoiseSchedule& sched, bool paper_variance = false);

// Denoiser evaluation: eps_hat for a batch of rows at a common step t with a
// per-row class id. Supplied by denoiser_net or rigged in tests.
using EpsFn =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x, int t, const std::vector<int>& cls)>;

// Ancestral sampling with classifier-free guidance:
// eps_hat = (1+w) eps(x,t,c) - w eps(x,t,uncond). With w == 0 the
// unconditional branch is never evaluated. Each output row has its own
// deterministic substream derived from (seed, row index), so any partition
// of rows across workers reproduces the same matrix. Throws a
// sampling-diverged error naming the step if values go non-finite.
Eigen::MatrixXd sample_rows(const EpsFn& eps_fn, int dim, const NoiseSchedule& sched, int class_id,
                            std::int64_t row_begin, std::int64_t row_end,
                            const GuidanceConfig& guidance, std::uint64_t seed);

inline Eigen::MatrixXd sample(const EpsFn& eps_fn, int dim, const NoiseSchedule& sched,
                              int class_id, int count, const GuidanceConfig& guidance,
                              std::uint64_t seed) {
    return sample_rows(eps_fn, dim, sched, class_id, 0, count, guidance, seed);
}

}  // namespace mcrage
