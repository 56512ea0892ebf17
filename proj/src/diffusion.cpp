#include "mcrage/diffusion.hpp"

#include <cmath>
#include <string>

#include "mcrage/rng.hpp"

namespace mcrage {

namespace {

void check_step(int t, const NoiseSchedule& sched, const char* where) {
    if (t < 1 || t > sched.t_prime)
        throw Error(std::string(where) + ": step " + std::to_string(t) + " outside [1," +
                    std::to_string(sched.t_prime) + "]");
}

}  // namespace

Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& eps,
                               const NoiseSchedule& sched) {
    check_step(t, sched, "forward_sample");
    const double abar = sched.alpha_bar_at(t);
    return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

Eigen::MatrixXd forward_sample_batch(const Eigen::MatrixXd& x0, const std::vector<int>& t,
                                     const Eigen::MatrixXd& eps, const NoiseSchedule& sched) {
    Eigen::MatrixXd out(x0.rows(), x0.cols());
    for (long i = 0; i < x0.rows(); ++i) {
        check_step(t[static_cast<std::size_t>(i)], sched, "forward_sample");
        const double abar = sched.alpha_bar_at(t[static_cast<std::size_t>(i)]);
        out.row(i) = std::sqrt(abar) * x0.row(i) + std::sqrt(1.0 - abar) * eps.row(i);
    }
    return out;
}

double posterior_variance(int t, const NoiseSchedule& sched, bool paper_variance) {
    check_step(t, sched, "posterior_variance");
    if (t == 1) return 0.0;
    if (paper_variance) {
        // barless variant as displayed in the source formulation
        return (1.0 - sched.alpha_at(t)) / (1.0 - sched.alpha_at(t - 1)) * sched.beta_at(t);
    }
    return (1.0 - sched.alpha_bar_at(t - 1)) / (1.0 - sched.alpha_bar_at(t)) * sched.beta_at(t);
}

Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t, int t, const Eigen::VectorXd& eps_hat,
                             const NoiseSchedule& sched, const Eigen::VectorXd& z,
                             bool paper_variance) {
    check_step(t, sched, "reverse_step");
    const double beta = sched.beta_at(t);
    const double abar = sched.alpha_bar_at(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
    Eigen::VectorXd mu = inv_sqrt_alpha * (x_t - (beta / std::sqrt(1.0 - abar)) * eps_hat);
    if (t == 1) return mu;
    const double sigma = std::sqrt(posterior_variance(t, sched, paper_variance));
    return mu + sigma * z;
}

Eigen::MatrixXd sample_rows(const EpsFn& eps_fn, int dim, const NoiseSchedule& sched, int class_id,
                            std::int64_t row_begin, std::int64_t row_end,
                            const GuidanceConfig& guidance, std::uint64_t seed) {
    if (row_end < row_begin) throw Error("sample: bad row range");
    const long count = static_cast<long>(row_end - row_begin);
    Eigen::MatrixXd x(count, dim);
    if (count == 0) return x;
    if (!(guidance.weight >= 0.0) || !std::isfinite(guidance.weight))
        throw Error("sample: guidance weight must be finite and >= 0");

    // one substream per output row: any partition of rows reproduces the run
    std::vector<Rng> row_rng;
    row_rng.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        row_rng.emplace_back(derive_seed(seed, "sample_row",
                                         static_cast<std::uint64_t>(row_begin + i)));

    for (long i = 0; i < count; ++i)
        for (int j = 0; j < dim; ++j) x(i, j) = row_rng[static_cast<std::size_t>(i)].normal();

    const std::vector<int> cond(static_cast<std::size_t>(count), class_id);
    const std::vector<int> uncond(static_cast<std::size_t>(count), guidance.unconditional_token);
    const double w = guidance.weight;

    for (int t = sched.t_prime; t >= 1; --t) {
        Eigen::MatrixXd eps_hat = eps_fn(x, t, cond);
        if (w != 0.0) {
            eps_hat = (1.0 + w) * eps_hat - w * eps_fn(x, t, uncond);
        }
        const double beta = sched.beta_at(t);
        const double abar = sched.alpha_bar_at(t);
        const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
        const double sigma = t == 1 ? 0.0 : std::sqrt(posterior_variance(t, sched, guidance.paper_variance));
        const double noise_coef = beta / std::sqrt(1.0 - abar);
        for (long i = 0; i < count; ++i) {
            for (int j = 0; j < dim; ++j) {
                double v = inv_sqrt_alpha * (x(i, j) - noise_coef * eps_hat(i, j));
                if (sigma != 0.0) v += sigma * row_rng[static_cast<std::size_t>(i)].normal();
                x(i, j) = v;
            }
        }
        if (!x.allFinite())
            throw Error("sample: diverged to a non-finite value at step " + std::to_string(t));
    }
    return x;
}

}  // namespace mcrage
