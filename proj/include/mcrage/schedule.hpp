#pragma once

#include <Eigen/Dense>
#include <optional>

#include "mcrage/error.hpp"

namespace mcrage {

// Noise schedule tables. Steps are 1-based: beta(t), alpha(t), alpha_bar(t)
// for t in [1, T']; alpha_bar(0) == 1 by convention.
struct NoiseSchedule {
    int t_prime = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha_bar;

    double beta_at(int t) const { return beta[t - 1]; }
    double alpha_at(int t) const { return alpha[t - 1]; }
    double alpha_bar_at(int t) const { return t == 0 ? 1.0 : alpha_bar[t - 1]; }

    // 0 < beta < 1 non-decreasing, alpha_bar strictly decreasing, terminal
    // alpha_bar below 1e-3. Throws on violation.
    void validate() const;
};

// Terminal alpha_bar must fall below this for the forward process to end
// near an isotropic Gaussian.
inline constexpr double kTerminalAlphaBarMax = 1e-3;

// ceil(2^6 * beta_bar * (1 + log(1 + diameter))), natural logarithm.
int compute_t_prime(double beta_bar, double diameter);

// Max pairwise Euclidean distance for n <= 4096; above that, the bounding
// box diagonal, which upper-bounds the true diameter.
double dataset_diameter(const Eigen::MatrixXd& features);

// Endpoint-inclusive linear interpolation of beta. Throws a
// schedule-inadequate error when the terminal alpha_bar is too large.
NoiseSchedule linear_schedule(int t_prime, double beta_start, double beta_end);

inline constexpr double kDefaultBetaStart = 0.02;

// Default schedule: beta_start 0.02, beta_end the smallest grid value in
// {0.30, 0.35, ..., 0.60} whose schedule is adequate. When t_prime is not
// supplied it is computed per candidate as compute_t_prime(beta_end, diameter).
NoiseSchedule default_schedule(double diameter, std::optional<int> t_prime = std::nullopt,
                               double beta_start = kDefaultBetaStart,
                               std::optional<double> beta_end = std::nullopt);

}  // namespace mcrage
