#include "mcrage/schedule.hpp"

#include <cmath>
#include <string>

namespace mcrage {

void NoiseSchedule::validate() const {
    if (t_prime < 2) throw Error("schedule: T' must be >= 2");
    if (beta.size() != t_prime || alpha.size() != t_prime || alpha_bar.size() != t_prime)
        throw Error("schedule: table sizes disagree with T'");
    double prev_beta = 0.0;
    double prev_abar = 1.0;
    for (int i = 0; i < t_prime; ++i) {
        if (!(beta[i] > 0.0 && beta[i] < 1.0))
            throw Error("schedule: beta outside (0,1) at step " + std::to_string(i + 1));
        if (beta[i] < prev_beta)
            throw Error("schedule: beta decreases at step " + std::to_string(i + 1));
        if (!(alpha_bar[i] < prev_abar))
            throw Error("schedule: alpha_bar not strictly decreasing at step " +
                        std::to_string(i + 1));
        prev_beta = beta[i];
        prev_abar = alpha_bar[i];
    }
    if (!(alpha_bar[t_prime - 1] < kTerminalAlphaBarMax))
        throw Error("schedule: terminal alpha_bar " + std::to_string(alpha_bar[t_prime - 1]) +
                    " >= 1e-3; raise beta_end or T'");
}

int compute_t_prime(double beta_bar, double diameter) {
    if (!std::isfinite(beta_bar) || !std::isfinite(diameter))
        throw Error("compute_t_prime: non-finite input");
    if (!(beta_bar > 0.0)) throw Error("compute_t_prime: beta_bar must be positive");
    if (diameter < 0.0) throw Error("compute_t_prime: negative diameter");
    return static_cast<int>(std::ceil(64.0 * beta_bar * (1.0 + std::log1p(diameter))));
}

double dataset_diameter(const Eigen::MatrixXd& features) {
    const long n = features.rows();
    if (n < 1) throw Error("dataset_diameter: empty matrix");
    if (!features.allFinite()) throw Error("dataset_diameter: non-finite features");
    if (n <= 4096) {
        double best = 0.0;
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j)
                best = std::max(best, (features.row(i) - features.row(j)).squaredNorm());
        return std::sqrt(best);
    }
    // bounding-box diagonal: certified upper bound on the true diameter
    const Eigen::VectorXd range =
        features.colwise().maxCoeff() - features.colwise().minCoeff();
    return range.norm();
}

NoiseSchedule linear_schedule(int t_prime, double beta_start, double beta_end) {
    if (t_prime < 2) throw Error("linear_schedule: T' must be >= 2");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw Error("linear_schedule: need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.t_prime = t_prime;
    s.beta.resize(t_prime);
    s.alpha.resize(t_prime);
    s.alpha_bar.resize(t_prime);
    double abar = 1.0;
    for (int i = 0; i < t_prime; ++i) {
        s.beta[i] = beta_start + (beta_end - beta_start) * double(i) / double(t_prime - 1);
        s.alpha[i] = 1.0 - s.beta[i];
        abar *= s.alpha[i];
        s.alpha_bar[i] = abar;
    }
    s.validate();
    return s;
}

NoiseSchedule default_schedule(double diameter, std::optional<int> t_prime, double beta_start,
                               std::optional<double> beta_end) {
    if (beta_end) {
        const int tp = t_prime ? *t_prime : compute_t_prime(*beta_end, diameter);
        return linear_schedule(tp, beta_start, *beta_end);
    }
    std::string last_err;
    for (double be = 0.30; be <= 0.601; be += 0.05) {
        const int tp = t_prime ? *t_prime : compute_t_prime(be, diameter);
        try {
            return linear_schedule(tp, beta_start, be);
        } catch (const Error& e) {
            last_err = e.what();
        }
    }
    throw Error("default_schedule: no grid beta_end in [0.30,0.60] is adequate (" + last_err +
                "); raise T' or beta_end");
}

}  // namespace mcrage
