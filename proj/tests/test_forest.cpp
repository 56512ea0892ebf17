#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcrage/forest.hpp"
#include "mcrage/metrics.hpp"
#include "mcrage/rng.hpp"
#include "test_util.hpp"

using namespace mcrage;

namespace {

// close class means (+-1) so depth actually matters
struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXi y;
};

Problem overlap_problem(int per_class, std::uint64_t seed, double sep = 1.0) {
    Problem p;
    const int n = 2 * per_class;
    p.X.resize(n, 2);
    p.y.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const int cls = i < per_class ? 0 : 1;
        p.X(i, 0) = (cls == 0 ? -sep : sep) + rng.normal();
        p.X(i, 1) = rng.normal();
        p.y[i] = cls;
    }
    return p;
}

double train_accuracy(const Forest& f, const Problem& p) {
    return accuracy(p.y, f.predict(p.X));
}

}  // namespace

TEST_CASE("a forest separates the oracle classes") {
    const Problem train = overlap_problem(200, 1, 2.0);
    const Problem test = overlap_problem(100, 2, 2.0);

    ForestConfig cfg;
    cfg.tree_count = 30;
    cfg.seed = 9;
    const Forest f = Forest::fit(train.X, train.y, cfg);
    CHECK(f.class_count() == 2);
    CHECK(f.feature_count() == 2);
    CHECK(train_accuracy(f, train) > 0.95);
    CHECK(accuracy(test.y, f.predict(test.X)) > 0.9);

    const Eigen::VectorXd proba = f.predict_proba(test.X, 1);
    CHECK(proba.minCoeff() >= 0.0);
    CHECK(proba.maxCoeff() <= 1.0);
    const Eigen::VectorXi preds = f.predict(test.X);
    for (int i = 0; i < test.X.rows(); ++i) {
        if (proba[i] > 0.5) CHECK(preds[i] == 1);
        if (proba[i] < 0.5) CHECK(preds[i] == 0);
    }
}

TEST_CASE("fitting is deterministic in the seed") {
    const Problem train = overlap_problem(120, 3);
    const Problem test = overlap_problem(60, 4);

    ForestConfig cfg;
    cfg.tree_count = 20;
    cfg.seed = 5;
    const Forest a = Forest::fit(train.X, train.y, cfg);
    const Forest b = Forest::fit(train.X, train.y, cfg);
    CHECK(a.predict(test.X) == b.predict(test.X));
    CHECK(a.predict_proba(test.X, 1) == b.predict_proba(test.X, 1));

    cfg.seed = 6;
    const Forest c = Forest::fit(train.X, train.y, cfg);
    CHECK(c.predict_proba(test.X, 1) != a.predict_proba(test.X, 1));
}

TEST_CASE("deeper depth caps only refine the trees") {
    // the node RNG keys on the node's path id, so a shallow tree is a
    // prefix of its deeper counterpart and training accuracy cannot drop
    const Problem train = overlap_problem(150, 7);

    ForestConfig cfg;
    cfg.tree_count = 15;
    cfg.seed = 21;
    double prev = 0.0;
    for (int depth : {1, 2, 4, 8}) {
        cfg.max_depth = depth;
        const Forest f = Forest::fit(train.X, train.y, cfg);
        const double acc = train_accuracy(f, train);
        CHECK(acc >= prev);
        prev = acc;
    }

    // unlimited depth separates the bootstrap sample almost perfectly
    cfg.max_depth = 0;
    const Forest f = Forest::fit(train.X, train.y, cfg);
    CHECK(train_accuracy(f, train) > 0.9);
}

TEST_CASE("multiclass voting breaks ties toward the smaller code") {
    Rng rng(11);
    Eigen::MatrixXd X(90, 2);
    Eigen::VectorXi y(90);
    for (int i = 0; i < 90; ++i) {
        const int cls = i / 30;
        X(i, 0) = 3.0 * cls + 0.5 * rng.normal();
        X(i, 1) = rng.normal();
        y[i] = cls;
    }
    ForestConfig cfg;
    cfg.tree_count = 25;
    cfg.seed = 2;
    const Forest f = Forest::fit(X, y, cfg);
    CHECK(f.class_count() == 3);
    CHECK(accuracy(y, f.predict(X)) > 0.9);

    const Eigen::VectorXd p0 = f.predict_proba(X, 0);
    const Eigen::VectorXd p2 = f.predict_proba(X, 2);
    CHECK(p0[0] > 0.5);
    CHECK(p2[89] > 0.5);
}

TEST_CASE("degenerate inputs are refused") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(10);
    ForestConfig cfg;
    CHECK_THROWS_AS(Forest::fit(X, y, cfg), Error);
}

TEST_CASE("min_samples_leaf caps tree growth") {
    const Problem train = overlap_problem(100, 13, 0.3);
    ForestConfig cfg;
    cfg.tree_count = 10;
    cfg.seed = 4;
    cfg.min_samples_leaf = 100;  // half the data per leaf: at most one split
    const Forest stubby = Forest::fit(train.X, train.y, cfg);
    cfg.min_samples_leaf = 1;
    const Forest full = Forest::fit(train.X, train.y, cfg);
    // the unconstrained forest fits the training data better
    CHECK(train_accuracy(full, train) > train_accuracy(stubby, train));
}
