#include "mcrage/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcrage/error.hpp"
#include "mcrage/rng.hpp"

namespace mcrage {

int Forest::Tree::classify(const Eigen::RowVectorXd& row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

// Grows one tree over a bootstrap resample. A larger depth cap only refines
// leaves because every per-node random choice is keyed off the node's path id
// (root 1, children 2i and 2i+1), not off global draw order.
struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXi& y;
    const ForestConfig& cfg;
    int class_count;
    int features_per_split;
    std::uint64_t tree_seed;
    std::vector<int> rows;  // bootstrap row indices, mutated in place
    Forest::Tree tree;

    void bootstrap() {
        Rng rng(derive_seed(tree_seed, "bootstrap"));
        const int n = static_cast<int>(X.rows());
        rows.resize(static_cast<std::size_t>(n));
        for (int& r : rows) r = rng.uniform_int(n);
    }

    int majority(int begin, int end) const {
        std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
        for (int i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(y[rows[static_cast<std::size_t>(i)]])];
        return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    bool pure(int begin, int end) const {
        const int first = y[rows[static_cast<std::size_t>(begin)]];
        for (int i = begin + 1; i < end; ++i)
            if (y[rows[static_cast<std::size_t>(i)]] != first) return false;
        return true;
    }

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = std::numeric_limits<double>::infinity();
    };

    // Weighted Gini of the best threshold on one feature, or infinity when the
    // feature cannot produce a split honoring min_samples_leaf.
    void best_threshold(int feature, int begin, int end, Split& best) const {
        const int n = end - begin;
        std::vector<std::pair<double, int>> vals(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int r = rows[static_cast<std::size_t>(begin + i)];
            vals[static_cast<std::size_t>(i)] = {X(r, feature), y[r]};
        }
        std::sort(vals.begin(), vals.end());
        if (vals.front().first == vals.back().first) return;

        std::vector<double> left(static_cast<std::size_t>(class_count), 0.0);
        std::vector<double> right(static_cast<std::size_t>(class_count), 0.0);
        for (const auto& [v, c] : vals) right[static_cast<std::size_t>(c)] += 1.0;
        double right_sq = 0.0;
        for (double c : right) right_sq += c * c;
        double left_sq = 0.0;

        for (int i = 0; i < n - 1; ++i) {
            const int c = vals[static_cast<std::size_t>(i)].second;
            const double lc = left[static_cast<std::size_t>(c)];
            const double rc = right[static_cast<std::size_t>(c)];
            left_sq += 2.0 * lc + 1.0;
            right_sq += -2.0 * rc + 1.0;
            left[static_cast<std::size_t>(c)] = lc + 1.0;
            right[static_cast<std::size_t>(c)] = rc - 1.0;
            const double a = vals[static_cast<std::size_t>(i)].first;
            const double b = vals[static_cast<std::size_t>(i + 1)].first;
            if (a == b) continue;
            const int nl = i + 1, nr = n - nl;
            if (nl < cfg.min_samples_leaf || nr < cfg.min_samples_leaf) continue;
            // gini_side = 1 - sum p^2; weighted sum over sides, dropping the
            // constant 1 term: minimize -(left_sq/nl + right_sq/nr).
            const double score = -(left_sq / double(nl) + right_sq / double(nr));
            if (score < best.score) {
                best.score = score;
                best.feature = feature;
                best.threshold = a + 0.5 * (b - a);
            }
        }
    }

    int grow(int begin, int end, int depth, std::uint64_t path_id) {
        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().label = majority(begin, end);

        const int n = end - begin;
        const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
        if (depth_capped || n < 2 * cfg.min_samples_leaf || pure(begin, end)) return node_index;

        Rng rng(derive_seed(tree_seed, "node", path_id));
        const int d = static_cast<int>(X.cols());
        std::vector<int> candidates(static_cast<std::size_t>(d));
        std::iota(candidates.begin(), candidates.end(), 0);
        for (int i = 0; i < features_per_split; ++i) {
            const int j = i + rng.uniform_int(d - i);
            std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
        }

        Split best;
        for (int i = 0; i < features_per_split; ++i)
            best_threshold(candidates[static_cast<std::size_t>(i)], begin, end, best);
        if (best.feature < 0) return node_index;

        const auto mid_it = std::stable_partition(
            rows.begin() + begin, rows.begin() + end,
            [&](int r) { return X(r, best.feature) <= best.threshold; });
        const int mid = static_cast<int>(mid_it - rows.begin());

        const int left = grow(begin, mid, depth + 1, path_id * 2);
        const int right = grow(mid, end, depth + 1, path_id * 2 + 1);
        Forest::Node& node = tree.nodes[static_cast<std::size_t>(node_index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }

    Forest::Tree build() {
        bootstrap();
        grow(0, static_cast<int>(rows.size()), 0, 1);
        return std::move(tree);
    }
};

Forest Forest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const ForestConfig& cfg) {
    if (X.rows() < 1) throw Error("forest: empty training set");
    if (X.rows() != y.size()) throw Error("forest: feature/label row counts disagree");
    if (cfg.tree_count < 1) throw Error("forest: tree_count must be >= 1");
    if (cfg.min_samples_leaf < 1) throw Error("forest: min_samples_leaf must be >= 1");
    if (y.minCoeff() < 0) throw Error("forest: negative class code");

    Forest f;
    f.feature_count_ = static_cast<int>(X.cols());
    f.class_count_ = y.maxCoeff() + 1;
    if ((y.array() == y[0]).all()) throw Error("forest: training labels are all one class");

    int fps = cfg.features_per_split;
    if (fps <= 0) fps = static_cast<int>(std::ceil(std::sqrt(double(X.cols()))));
    fps = std::min(fps, static_cast<int>(X.cols()));

    f.trees_.reserve(static_cast<std::size_t>(cfg.tree_count));
    for (int i = 0; i < cfg.tree_count; ++i) {
        TreeBuilder builder{X, y, cfg, f.class_count_, fps,
                            derive_seed(cfg.seed, "tree", static_cast<std::uint64_t>(i)),
                            {}, {}};
        f.trees_.push_back(builder.build());
    }
    return f;
}

Eigen::VectorXi Forest::predict(const Eigen::MatrixXd& X) const {
    if (trees_.empty()) throw Error("forest: predict before fit");
    if (X.cols() != feature_count_) throw Error("forest: predict dimension mismatch");
    Eigen::VectorXi out(X.rows());
    std::vector<int> votes(static_cast<std::size_t>(class_count_));
    for (long i = 0; i < X.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        const Eigen::RowVectorXd row = X.row(i);
        for (const Tree& t : trees_) ++votes[static_cast<std::size_t>(t.classify(row))];
        out[i] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

Eigen::VectorXd Forest::predict_proba(const Eigen::MatrixXd& X, int positive_class) const {
    if (trees_.empty()) throw Error("forest: predict before fit");
    if (X.cols() != feature_count_) throw Error("forest: predict dimension mismatch");
    if (positive_class < 0 || positive_class >= class_count_)
        throw Error("forest: positive class code out of range");
    Eigen::VectorXd out(X.rows());
    for (long i = 0; i < X.rows(); ++i) {
        const Eigen::RowVectorXd row = X.row(i);
        int hits = 0;
        for (const Tree& t : trees_)
            if (t.classify(row) == positive_class) ++hits;
        out[i] = double(hits) / double(trees_.size());
    }
    return out;
}

}  // namespace mcrage
