#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcrage/diffusion.hpp"
#include "mcrage/rng.hpp"
#include "test_util.hpp"

using namespace mcrage;

namespace {

// schedule with hand-checkable tables; deliberately skips the adequacy
// validation so tiny examples stay tiny
NoiseSchedule hand_schedule(std::vector<double> betas) {
    NoiseSchedule s;
    s.t_prime = static_cast<int>(betas.size());
    s.beta = Eigen::Map<Eigen::VectorXd>(betas.data(), s.t_prime);
    s.alpha = (1.0 - s.beta.array()).matrix();
    s.alpha_bar.resize(s.t_prime);
    double p = 1.0;
    for (int i = 0; i < s.t_prime; ++i) {
        p *= s.alpha[i];
        s.alpha_bar[i] = p;
    }
    return s;
}

}  // namespace

TEST_CASE("forward sample reproduces the closed form") {
    const NoiseSchedule s = hand_schedule({0.5, 0.5});  // alpha_bar = 0.5, 0.25

    Eigen::VectorXd x0(2), eps(2);
    x0 << 2.0, 0.0;
    eps << 0.0, 1.0;

    const Eigen::VectorXd x2 = forward_sample(x0, 2, eps, s);
    CHECK(x2[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x2[1] == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));

    const Eigen::VectorXd x1 = forward_sample(x0, 1, eps, s);
    CHECK(x1[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(x1[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

    CHECK_THROWS_AS(forward_sample(x0, 0, eps, s), Error);
    CHECK_THROWS_AS(forward_sample(x0, 3, eps, s), Error);

    // batch form agrees with the per-row form
    Rng rng(4);
    Eigen::MatrixXd X0(6, 3), E(6, 3);
    std::vector<int> ts{1, 2, 2, 1, 2, 1};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) {
            X0(i, j) = rng.normal();
            E(i, j) = rng.normal();
        }
    const Eigen::MatrixXd B = forward_sample_batch(X0, ts, E, s);
    for (int i = 0; i < 6; ++i) {
        const Eigen::VectorXd row =
            forward_sample(X0.row(i).transpose(), ts[i], E.row(i).transpose(), s);
        CHECK((B.row(i).transpose() - row).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("vanishing beta keeps the sample put") {
    const NoiseSchedule s = hand_schedule({1e-12});
    Eigen::VectorXd x0(2), eps(2);
    x0 << 3.0, -4.0;
    eps << 1.0, 1.0;
    const Eigen::VectorXd x1 = forward_sample(x0, 1, eps, s);
    CHECK((x1 - x0).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("forward sample has the contracted moments") {
    const NoiseSchedule s = hand_schedule({0.5, 0.5});
    Eigen::VectorXd x0(1), eps(1);
    x0 << 2.0;
    Rng rng(99);
    const long n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
        eps[0] = rng.normal();
        const double v = forward_sample(x0, 2, eps, s)[0];
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));        // sqrt(0.25) * 2
    CHECK(var == doctest::Approx(0.75).epsilon(0.02));        // 1 - alpha_bar_2
}

TEST_CASE("posterior variance hand values and the paper_variance option") {
    const NoiseSchedule s = hand_schedule({0.5, 0.5});
    // default: (1 - abar_1)/(1 - abar_2) * beta_2 = (0.5/0.75)*0.5 = 1/3
    CHECK(posterior_variance(2, s) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // barless: (1 - alpha_2)/(1 - alpha_1) * beta_2 = (0.5/0.5)*0.5
    CHECK(posterior_variance(2, s, true) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(posterior_variance(1, s) == 0.0);
    CHECK(posterior_variance(1, s, true) == 0.0);

    const NoiseSchedule lin = hand_schedule({0.1, 0.2, 0.3});
    const double abar1 = 0.9, abar2 = 0.9 * 0.8;
    CHECK(posterior_variance(3, lin) ==
          doctest::Approx((1.0 - abar2) / (1.0 - abar2 * 0.7) * 0.3).epsilon(1e-14));
    CHECK(posterior_variance(3, lin, true) ==
          doctest::Approx(0.3 / (1.0 - 0.8) * 0.3).epsilon(1e-14));
    (void)abar1;
}

TEST_CASE("reverse step mean and the silent final step") {
    const NoiseSchedule s = hand_schedule({0.5, 0.5});
    Eigen::VectorXd x(2), zero(2), z(2);
    x << 1.0, -2.0;
    zero.setZero();
    z << 100.0, 100.0;

    // eps_hat = 0: pure 1/sqrt(alpha) rescale
    const Eigen::VectorXd mu = reverse_step(x, 2, zero, s, zero);
    CHECK(mu[0] == doctest::Approx(1.0 / std::sqrt(0.5)).epsilon(1e-15));
    CHECK(mu[1] == doctest::Approx(-2.0 / std::sqrt(0.5)).epsilon(1e-15));

    // t = 1 ignores the injected z entirely
    const Eigen::VectorXd a = reverse_step(x, 1, zero, s, zero);
    const Eigen::VectorXd b = reverse_step(x, 1, zero, s, z);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

    // t > 1 adds sigma * z
    const Eigen::VectorXd c = reverse_step(x, 2, zero, s, z);
    CHECK((c - mu)[0] == doctest::Approx(std::sqrt(1.0 / 3.0) * 100.0).epsilon(1e-14));
}

TEST_CASE("noiseless reverse chain with implied noise reconstructs x0") {
    // error grows like prod 1/sqrt(alpha); 1e-9 leaves plenty of room at T'=12
    const int tp = 12;
    std::vector<double> betas(tp);
    for (int i = 0; i < tp; ++i) betas[i] = 0.05 + 0.55 * i / (tp - 1);
    const NoiseSchedule s = hand_schedule(betas);

    Rng rng(17);
    Eigen::VectorXd zero(3);
    zero.setZero();
    for (int trial = 0; trial < 60; ++trial) {
        const int t = 1 + rng.uniform_int(tp);
        Eigen::VectorXd x0(3), e(3);
        for (int j = 0; j < 3; ++j) {
            x0[j] = 3.0 * rng.normal();
            e[j] = rng.normal();
        }
        Eigen::VectorXd x = forward_sample(x0, t, e, s);
        // walking down with the implied noise: e_{s-1} scales by
        // sqrt(alpha_s) sqrt(1-abar_{s-1}) / sqrt(1-abar_s)
        for (int step = t; step >= 1; --step) {
            x = reverse_step(x, step, e, s, zero);
            if (step > 1)
                e *= std::sqrt(s.alpha_at(step)) * std::sqrt(1.0 - s.alpha_bar_at(step - 1)) /
                     std::sqrt(1.0 - s.alpha_bar_at(step));
        }
        CHECK((x - x0).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("sampling is deterministic and partition invariant") {
    const NoiseSchedule s = hand_schedule({0.1, 0.2, 0.3, 0.4});
    GuidanceConfig g;

    // affine eps keeps the chain finite and class-sensitive
    const EpsFn fn = [](const Eigen::MatrixXd& x, int, const std::vector<int>& cls) {
        Eigen::MatrixXd out = 0.25 * x;
        for (long i = 0; i < x.rows(); ++i) out.row(i).array() += 0.05 * cls[i];
        return out;
    };

    const Eigen::MatrixXd all = sample_rows(fn, 2, s, 1, 0, 8, g, 42);
    const Eigen::MatrixXd again = sample_rows(fn, 2, s, 1, 0, 8, g, 42);
    CHECK(all == again);

    const Eigen::MatrixXd head = sample_rows(fn, 2, s, 1, 0, 5, g, 42);
    const Eigen::MatrixXd tail = sample_rows(fn, 2, s, 1, 5, 8, g, 42);
    CHECK(head == all.topRows(5));
    CHECK(tail == all.bottomRows(3));

    const Eigen::MatrixXd other_seed = sample_rows(fn, 2, s, 1, 0, 8, g, 43);
    CHECK(other_seed != all);

    const Eigen::MatrixXd other_class = sample_rows(fn, 2, s, 0, 0, 8, g, 42);
    CHECK(other_class != all);

    CHECK(sample_rows(fn, 2, s, 1, 0, 0, g, 42).rows() == 0);
    CHECK_THROWS_AS(sample_rows(fn, 2, s, 1, 5, 2, g, 42), Error);
}

TEST_CASE("zero guidance weight never evaluates the unconditional branch") {
    const NoiseSchedule s = hand_schedule({0.1, 0.2, 0.3});
    GuidanceConfig g;
    g.weight = 0.0;
    g.unconditional_token = 7;

    int uncond_calls = 0;
    const EpsFn fn = [&](const Eigen::MatrixXd& x, int, const std::vector<int>& cls) {
        for (int c : cls)
            if (c == 7) ++uncond_calls;
        return Eigen::MatrixXd(0.1 * x);
    };

    (void)sample_rows(fn, 2, s, 3, 0, 4, g, 9);
    CHECK(uncond_calls == 0);

    g.weight = 0.5;
    (void)sample_rows(fn, 2, s, 3, 0, 4, g, 9);
    CHECK(uncond_calls > 0);
}

TEST_CASE("guidance combines the two branches as (1+w) cond - w uncond") {
    const NoiseSchedule s = hand_schedule({0.1, 0.2, 0.3});
    const int dim = 2;
    const double a = 0.3, b = -0.1, w = 0.7;

    GuidanceConfig g;
    g.weight = w;
    g.unconditional_token = 5;
    const EpsFn fn = [&](const Eigen::MatrixXd& x, int, const std::vector<int>& cls) {
        Eigen::MatrixXd out(x.rows(), x.cols());
        for (long i = 0; i < x.rows(); ++i) out.row(i).setConstant(cls[i] == 5 ? b : a);
        return out;
    };

    const std::uint64_t seed = 31;
    const Eigen::MatrixXd got = sample_rows(fn, dim, s, 2, 0, 1, g, seed);

    // replay the row's substream with the mixed constant done by hand
    const double mixed = (1.0 + w) * a - w * b;
    Rng rng(derive_seed(seed, "sample_row", 0));
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = rng.normal();
    for (int t = s.t_prime; t >= 1; --t) {
        const double coef = s.beta_at(t) / std::sqrt(1.0 - s.alpha_bar_at(t));
        const double inv = 1.0 / std::sqrt(s.alpha_at(t));
        const double sigma = t == 1 ? 0.0 : std::sqrt(posterior_variance(t, s));
        for (int j = 0; j < dim; ++j) {
            double v = inv * (x[j] - coef * mixed);
            if (sigma != 0.0) v += sigma * rng.normal();
            x[j] = v;
        }
    }
    CHECK((got.row(0).transpose() - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-finite chains fail loudly with the step named") {
    const NoiseSchedule s = hand_schedule({0.1, 0.2, 0.3});
    GuidanceConfig g;
    const EpsFn fn = [](const Eigen::MatrixXd& x, int t, const std::vector<int>&) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
        if (t == 2) out.setConstant(std::nan(""));
        return out;
    };
    CHECK_THROWS_WITH_AS(sample_rows(fn, 2, s, 0, 0, 3, g, 1), doctest::Contains("step 2"),
                         Error);

    GuidanceConfig bad;
    bad.weight = -1.0;
    const EpsFn ok = [](const Eigen::MatrixXd& x, int, const std::vector<int>&) {
        return Eigen::MatrixXd(0.0 * x);
    };
    CHECK_THROWS_AS(sample_rows(ok, 2, s, 0, 0, 1, bad, 1), Error);
}
