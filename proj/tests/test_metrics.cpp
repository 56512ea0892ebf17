#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcrage/metrics.hpp"
#include "mcrage/rng.hpp"
#include "test_util.hpp"

using namespace mcrage;

namespace {

Eigen::VectorXi vec_i(std::initializer_list<int> v) {
    Eigen::VectorXi out(static_cast<long>(v.size()));
    long i = 0;
    for (int x : v) out[i++] = x;
    return out;
}

Eigen::VectorXd vec_d(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<long>(v.size()));
    long i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("accuracy and f1 hand values") {
    CHECK(accuracy(vec_i({0, 1, 1, 0}), vec_i({0, 1, 0, 0})) == 0.75);

    // precision 1/2, recall 1 -> F1 = 2/3
    const Eigen::VectorXi y = vec_i({1, 1, 0, 0, 0});
    const Eigen::VectorXi p = vec_i({1, 1, 1, 1, 0});
    CHECK(f1_score(y, p) == 2.0 / 3.0);

    // no true and no predicted positives: defined as 0
    CHECK(f1_score(vec_i({0, 0}), vec_i({0, 0})) == 0.0);
    // predictions all wrong
    CHECK(f1_score(vec_i({1, 0}), vec_i({0, 1})) == 0.0);
    // other positive code
    CHECK(f1_score(y, p, 0) == doctest::Approx(2 * (1.0 / 1.0) * (1.0 / 3.0) / (1.0 + 1.0 / 3.0)));
    // perfect
    CHECK(f1_score(y, y) == 1.0);
}

TEST_CASE("auroc equals the pair-counting brute force exactly") {
    // hand cases first
    CHECK(auroc(vec_i({0, 0, 1, 1}), vec_d({0.1, 0.2, 0.8, 0.9})) == 1.0);
    CHECK(auroc(vec_i({1, 1, 0, 0}), vec_d({0.1, 0.2, 0.8, 0.9})) == 0.0);
    CHECK(auroc(vec_i({0, 1, 0, 1}), vec_d({0.5, 0.5, 0.5, 0.5})) == 0.5);
    // one tied pair out of 2*2: (2*3 + 1)/8... counted directly: scores
    // pos {0.8, 0.5}, neg {0.5, 0.1}: pairs >: (0.8,0.5),(0.8,0.1),(0.5,0.1); tie: (0.5,0.5)
    CHECK(auroc(vec_i({1, 1, 0, 0}), vec_d({0.8, 0.5, 0.5, 0.1})) == 7.0 / 8.0);

    Rng rng(55);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + rng.uniform_int(199);
        Eigen::VectorXi labels(n);
        Eigen::VectorXd scores(n);
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            labels[i] = rng.uniform_int(2);
            has_pos |= labels[i] == 1;
            has_neg |= labels[i] == 0;
            // quantized scores so ties occur often
            scores[i] = rng.uniform_int(10) / 10.0;
        }
        if (!has_pos || !has_neg) {
            --trial;
            continue;
        }
        const double got = auroc(labels, scores);
        const double want = testutil::auroc_brute(labels, scores, 1);
        CHECK(got == want);  // bitwise: same integer numerator, same division
    }

    CHECK_THROWS_WITH_AS(auroc(vec_i({1, 1}), vec_d({0.1, 0.2})), doctest::Contains("one class"),
                         Error);
}

TEST_CASE("wasserstein distance hand values") {
    // equal sizes: mean absolute difference of sorted values
    CHECK(wasserstein1({0.0, 1.0}, {1.0, 2.0}) == 1.0);
    CHECK(wasserstein1({3.0, 1.0, 2.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(wasserstein1({0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}) == 1.0);

    // unequal sizes: integral of |CDF difference|; computed by hand
    CHECK(wasserstein1({0.0, 1.0}, {0.0, 1.0, 2.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(wasserstein1({0.0}, {1.0}) == 1.0);

    // translation moves the distance by the shift
    Rng rng(3);
    std::vector<double> a(157), b(157);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = a[i] + 0.25;
    }
    CHECK(wasserstein1(a, b) == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(wasserstein1({}, {1.0}), Error);
}

TEST_CASE("feature distribution distance bins over the shared range") {
    std::vector<double> real{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> synth{0.0, 4.0, 4.0};
    const DistributionDistance d = feature_distribution_distance(real, synth);
    CHECK(d.w1 == wasserstein1(real, synth));
    CHECK(d.histogram.lo == 0.0);
    CHECK(d.histogram.hi == 4.0);
    REQUIRE(d.histogram.real_counts.size() == 50);
    REQUIRE(d.histogram.synth_counts.size() == 50);
    long rtotal = 0, stotal = 0;
    for (int b = 0; b < 50; ++b) {
        rtotal += d.histogram.real_counts[b];
        stotal += d.histogram.synth_counts[b];
    }
    CHECK(rtotal == 5);
    CHECK(stotal == 3);
    CHECK(d.histogram.real_counts[0] == 1);
    CHECK(d.histogram.real_counts[49] == 1);  // the max lands in the last bin
    CHECK(d.histogram.synth_counts[49] == 2);

    // degenerate shared range collapses to bin zero
    const DistributionDistance flat = feature_distribution_distance({2.0, 2.0}, {2.0});
    CHECK(flat.w1 == 0.0);
    CHECK(flat.histogram.real_counts[0] == 2);
    CHECK(flat.histogram.synth_counts[0] == 1);
}

TEST_CASE("pca recovers a plane embedded in five dimensions") {
    Rng rng(29);
    // orthonormal pair in R^5
    Eigen::VectorXd u(5), v(5);
    for (int j = 0; j < 5; ++j) {
        u[j] = rng.normal();
        v[j] = rng.normal();
    }
    u.normalize();
    v -= v.dot(u) * u;
    v.normalize();

    const int n = 400;
    Eigen::MatrixXd X(n, 5);
    for (int i = 0; i < n; ++i) {
        const double a = 3.0 * rng.normal();
        const double b = 1.0 * rng.normal();
        X.row(i) = (a * u + b * v).transpose();
        X.row(i).array() += 0.5;  // an offset the centering must remove
    }

    const PcaResult r = pca_project(X);
    REQUIRE(r.coords.rows() == n);
    REQUIRE(r.coords.cols() == 2);

    // exact rank-2 data: the two components carry the whole variance
    const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
    const double total_var = centered.squaredNorm() / n;
    CHECK(r.explained_variance[0] + r.explained_variance[1] ==
          doctest::Approx(total_var).epsilon(1e-6));
    CHECK(r.explained_variance[0] > r.explained_variance[1]);
    CHECK(r.explained_variance[0] == doctest::Approx(9.0).epsilon(0.35));
    CHECK(r.explained_variance[1] == doctest::Approx(1.0).epsilon(0.35));

    // the projection is an isometry on rank-2 data
    for (int i = 1; i < 12; ++i) {
        const double dist5 = (X.row(i) - X.row(0)).norm();
        const double dist2 = (r.coords.row(i) - r.coords.row(0)).norm();
        CHECK(dist2 == doctest::Approx(dist5).epsilon(1e-6));
    }

    // duplicating every row changes nothing under the population convention
    Eigen::MatrixXd XX(2 * n, 5);
    XX << X, X;
    const PcaResult rr = pca_project(XX);
    CHECK(rr.explained_variance[0] == doctest::Approx(r.explained_variance[0]).epsilon(1e-9));
    CHECK((rr.coords.topRows(n) - r.coords).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pca is sane on isotropic and degenerate clouds") {
    Rng rng(77);
    Eigen::MatrixXd X(10000, 2);
    for (long i = 0; i < X.rows(); ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = rng.normal();
    const PcaResult r = pca_project(X);
    const double ratio = r.explained_variance[0] / r.explained_variance[1];
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.25);

    // rank-1 input: second component reports zero variance
    Eigen::MatrixXd line(50, 3);
    for (int i = 0; i < 50; ++i) line.row(i) = Eigen::RowVector3d(1.0, -2.0, 0.5) * i;
    const PcaResult lr = pca_project(line);
    CHECK(lr.explained_variance[1] == 0.0);
    CHECK(lr.coords.col(1).isZero(1e-12));
    CHECK(lr.explained_variance[0] > 0.0);
}

TEST_CASE("per group report carries the overall and group views") {
    Dataset train = testutil::gaussian_oracle(150, 61, true);
    Dataset test = testutil::gaussian_oracle(60, 62, true);
    test.schema = train.schema;

    const GroupIndexMap map = GroupIndexMap::from_schema(train.schema);
    ForestConfig fc;
    fc.tree_count = 25;
    fc.seed = 17;
    const Forest f = Forest::fit(forest_inputs(train), train.labels, fc);

    const EvalReport rep = per_group_report(f, test, map);

    const Eigen::MatrixXd X = forest_inputs(test);
    CHECK(X.cols() == 3);  // two continuous plus the attribute code
    CHECK(X(0, 2) == double(test.attributes(0, 0)));
    const Eigen::VectorXi preds = f.predict(X);
    CHECK(rep.accuracy == accuracy(test.labels, preds));
    CHECK(rep.f1 == f1_score(test.labels, preds, 1));
    CHECK(rep.auroc == auroc(test.labels, f.predict_proba(X, 1), 1));

    REQUIRE(rep.confusion.rows() == 2);
    CHECK(rep.confusion.sum() == test.n());
    long correct = rep.confusion(0, 0) + rep.confusion(1, 1);
    CHECK(double(correct) / test.n() == rep.accuracy);

    long support = 0;
    for (const auto& [gid, gm] : rep.per_group) {
        CHECK(gid >= 0);
        CHECK(gid < map.group_count());
        CHECK(gm.support > 0);
        support += gm.support;
        CHECK(gm.accuracy >= 0.0);
        CHECK(gm.accuracy <= 1.0);
    }
    CHECK(support == test.n());

    const std::string text = rep.to_text();
    CHECK(text.find("accuracy") != std::string::npos);
    CHECK(text.find("auroc") != std::string::npos);
    CHECK(text.find("confusion") != std::string::npos);
    CHECK(text.find("group") != std::string::npos);
}
