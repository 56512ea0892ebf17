#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

namespace mcrage {

struct ForestConfig {
    int tree_count = 100;
    int max_depth = 0;            // 0 = unlimited
    int features_per_split = 0;   // 0 = ceil(sqrt(d_total))
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
};

// Random forest with Gini splits. Each tree fits a seeded bootstrap
// resample; per-node feature subsets derive from the node's path id, so a
// deeper depth cap only refines existing leaves.
class Forest {
public:
    // X: n x d_total predictors (continuous features then attribute codes),
    // y: class codes. Throws if only one class is present.
    static Forest fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                      const ForestConfig& cfg);

    // Majority class over tree votes; ties break toward the smaller code.
    Eigen::VectorXi predict(const Eigen::MatrixXd& X) const;

    // Fraction of trees voting for `positive_class`, per row.
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X, int positive_class) const;

    int class_count() const { return class_count_; }
    int feature_count() const { return feature_count_; }

private:
    struct Node {
        int feature = -1;      // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        int label = 0;         // leaf majority class
    };
    struct Tree {
        std::vector<Node> nodes;
        int classify(const Eigen::RowVectorXd& row) const;
    };

    std::vector<Tree> trees_;
    int class_count_ = 0;
    int feature_count_ = 0;

    friend struct TreeBuilder;
};

}  // namespace mcrage
