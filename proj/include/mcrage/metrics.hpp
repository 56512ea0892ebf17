#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mcrage/forest.hpp"
#include "mcrage/group_index.hpp"
#include "mcrage/schema.hpp"

namespace mcrage {

double accuracy(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions);

// Binary F1 for the given positive class; 0 when precision+recall is 0.
double f1_score(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                int positive_class = 1);

// (concordant + 0.5*tied) / (#pos * #neg) over all positive/negative score
// pairs, computed by ranks; exactly equal to the O(n^2) pair count. Throws
// an undefined-metric error when one class is absent.
double auroc(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores,
             int positive_class = 1);

struct GroupMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct EvalReport {
    double accuracy = 0.0;
    double f1 = 0.0;
    double auroc = 0.0;
    std::map<int, GroupMetrics> per_group; // only groups with support > 0
    Eigen::MatrixXi confusion;             // K_y x K_y, rows = truth

    // Key/value serialization with stable field order.
    std::string to_text() const;
};

// Forest metrics overall and restricted to each intersectional group present
// in the test rows. Predictors are [features | attribute codes].
EvalReport per_group_report(const Forest& forest, const Dataset& test, const GroupIndexMap& map,
                            int positive_class = 1);

Eigen::MatrixXd forest_inputs(const Dataset& ds);

// --- distribution diagnostics ----------------------------------------------

struct HistogramPair {
    double lo = 0.0, hi = 0.0;   // shared range
    std::vector<long> real_counts;  // 50 bins
    std::vector<long> synth_counts;
};

struct DistributionDistance {
    double w1 = 0.0;
    HistogramPair histogram;
};

// 1-D Wasserstein distance: mean |sorted quantile difference| for equal
// sizes, CDF integral otherwise, plus a paired 50-bin histogram over the
// shared range.
DistributionDistance feature_distribution_distance(const std::vector<double>& real,
                                                   const std::vector<double>& synthetic);

double wasserstein1(std::vector<double> a, std::vector<double> b);

// --- projection --------------------------------------------------------------

struct PcaResult {
    Eigen::MatrixXd coords;          // n x 2
    double explained_variance[2] = {0.0, 0.0};
};

// Top-2 principal components by power iteration with deflation (tolerance
// 1e-9, 1e4 iteration cap). Component sign makes the largest-|loading|
// coordinate positive. Rank-1 inputs report a zero-variance second component.
PcaResult pca_project(const Eigen::MatrixXd& features);

}  // namespace mcrage
