#include "mcrage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "mcrage/error.hpp"
#include "mcrage/rng.hpp"

namespace mcrage {

namespace {

void check_pair(const Eigen::VectorXi& labels, long other, const char* what) {
    if (labels.size() < 1) throw Error(std::string(what) + ": empty input");
    if (labels.size() != other) throw Error(std::string(what) + ": size mismatch");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

double accuracy(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions) {
    check_pair(labels, predictions.size(), "accuracy");
    return double((labels.array() == predictions.array()).count()) / double(labels.size());
}

double f1_score(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions,
                int positive_class) {
    check_pair(labels, predictions.size(), "f1_score");
    long tp = 0, fp = 0, fn = 0;
    for (long i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] == positive_class;
        const bool pred = predictions[i] == positive_class;
        tp += truth && pred;
        fp += !truth && pred;
        fn += truth && !pred;
    }
    const double precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double auroc(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores, int positive_class) {
    check_pair(labels, scores.size(), "auroc");
    const long n = labels.size();
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::sort(order.begin(), order.end(),
              [&](long a, long b) { return scores[a] < scores[b]; });

    long long pos = 0;
    for (long i = 0; i < n; ++i) pos += labels[i] == positive_class;
    const long long neg = n - pos;
    if (pos == 0 || neg == 0) throw Error("auroc: undefined, test labels are all one class");

    // Twice the positive-rank sum stays integral through ties, so the
    // pair-count identity (2S - p(p+1)) / (2 p n) is exact.
    long long twice_rank_sum = 0;
    long i = 0;
    while (i < n) {
        long j = i;
        while (j < n && scores[order[static_cast<std::size_t>(j)]] ==
                            scores[order[static_cast<std::size_t>(i)]])
            ++j;
        const long long twice_avg_rank = (i + 1) + j;  // ranks are 1-based
        for (long k = i; k < j; ++k)
            if (labels[order[static_cast<std::size_t>(k)]] == positive_class)
                twice_rank_sum += twice_avg_rank;
        i = j;
    }
    const long long numerator = twice_rank_sum - pos * (pos + 1);
    return double(numerator) / (2.0 * double(pos) * double(neg));
}

Eigen::MatrixXd forest_inputs(const Dataset& ds) {
    const long n = ds.features.rows();
    Eigen::MatrixXd X(n, ds.features.cols() + ds.attributes.cols());
    X.leftCols(ds.features.cols()) = ds.features;
    X.rightCols(ds.attributes.cols()) = ds.attributes.cast<double>();
    return X;
}

EvalReport per_group_report(const Forest& forest, const Dataset& test, const GroupIndexMap& map,
                            int positive_class) {
    if (test.features.rows() < 1) throw Error("per_group_report: empty test set");
    const Eigen::MatrixXd X = forest_inputs(test);
    const Eigen::VectorXi preds = forest.predict(X);
    const Eigen::VectorXd probs = forest.predict_proba(X, positive_class);

    EvalReport report;
    report.accuracy = accuracy(test.labels, preds);
    report.f1 = f1_score(test.labels, preds, positive_class);
    report.auroc = auroc(test.labels, probs, positive_class);

    const int k = static_cast<int>(test.schema.label_values.size());
    report.confusion = Eigen::MatrixXi::Zero(k, k);
    for (long i = 0; i < test.labels.size(); ++i)
        report.confusion(test.labels[i], preds[i]) += 1;

    const std::vector<int> gids = row_group_ids(test, map);
    std::map<int, std::vector<long>> rows_of;
    for (long i = 0; i < test.labels.size(); ++i) rows_of[gids[static_cast<std::size_t>(i)]].push_back(i);
    for (const auto& [gid, rows] : rows_of) {
        Eigen::VectorXi yl(static_cast<long>(rows.size())), yp(static_cast<long>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            yl[static_cast<long>(r)] = test.labels[rows[r]];
            yp[static_cast<long>(r)] = preds[rows[r]];
        }
        GroupMetrics gm;
        gm.support = static_cast<long>(rows.size());
        gm.accuracy = accuracy(yl, yp);
        gm.f1 = f1_score(yl, yp, positive_class);
        report.per_group[gid] = gm;
    }
    return report;
}

std::string EvalReport::to_text() const {
    std::string out;
    out += "accuracy " + fmt(accuracy) + "\n";
    out += "f1 " + fmt(f1) + "\n";
    out += "auroc " + fmt(auroc) + "\n";
    out += "groups " + std::to_string(per_group.size()) + "\n";
    for (const auto& [gid, gm] : per_group) {
        out += "group " + std::to_string(gid) + " support " + std::to_string(gm.support) +
               " accuracy " + fmt(gm.accuracy) + " f1 " + fmt(gm.f1) + "\n";
    }
    out += "confusion_rows " + std::to_string(confusion.rows()) + "\n";
    for (long i = 0; i < confusion.rows(); ++i) {
        out += "confusion " + std::to_string(i);
        for (long j = 0; j < confusion.cols(); ++j) out += " " + std::to_string(confusion(i, j));
        out += "\n";
    }
    return out;
}

// --- distribution diagnostics ------------------------------------------------

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("wasserstein1: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
        return sum / double(a.size());
    }
    // Unequal sizes: integrate |F_a - F_b| over the merged support.
    const double na = double(a.size()), nb = double(b.size());
    std::size_t ia = 0, ib = 0;
    double total = 0.0;
    double prev = std::min(a[0], b[0]);
    while (ia < a.size() || ib < b.size()) {
        double x;
        if (ib == b.size() || (ia < a.size() && a[ia] <= b[ib]))
            x = a[ia];
        else
            x = b[ib];
        total += std::abs(double(ia) / na - double(ib) / nb) * (x - prev);
        prev = x;
        while (ia < a.size() && a[ia] == x) ++ia;
        while (ib < b.size() && b[ib] == x) ++ib;
    }
    return total;
}

DistributionDistance feature_distribution_distance(const std::vector<double>& real,
                                                   const std::vector<double>& synthetic) {
    if (real.empty() || synthetic.empty())
        throw Error("feature_distribution_distance: empty sample");
    DistributionDistance out;
    out.w1 = wasserstein1(real, synthetic);

    constexpr int kBins = 50;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto* col : {&real, &synthetic})
        for (double v : *col) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    out.histogram.lo = lo;
    out.histogram.hi = hi;
    out.histogram.real_counts.assign(kBins, 0);
    out.histogram.synth_counts.assign(kBins, 0);
    const double width = hi - lo;
    auto bin_of = [&](double v) {
        if (width == 0.0) return 0;
        const int b = static_cast<int>((v - lo) / width * kBins);
        return std::clamp(b, 0, kBins - 1);
    };
    for (double v : real) ++out.histogram.real_counts[static_cast<std::size_t>(bin_of(v))];
    for (double v : synthetic) ++out.histogram.synth_counts[static_cast<std::size_t>(bin_of(v))];
    return out;
}

// --- projection ----------------------------------------------------------------

namespace {

// Dominant eigenpair of a symmetric PSD matrix by power iteration.
// Returns false when the matrix is (numerically) zero.
bool power_iterate(const Eigen::MatrixXd& c, Eigen::VectorXd& v, double& lambda) {
    constexpr double kTol = 1e-9;
    constexpr int kMaxIter = 10000;
    const long d = c.rows();
    Rng rng(0x70636131u);  // fixed start; any direction not orthogonal to the top eigenvector works
    v.resize(d);
    for (long i = 0; i < d; ++i) v[i] = rng.normal();
    v.normalize();
    for (int it = 0; it < kMaxIter; ++it) {
        Eigen::VectorXd w = c * v;
        const double norm = w.norm();
        if (norm < 1e-300) return false;
        w /= norm;
        const double delta = (w - v).norm();
        v = w;
        if (delta < kTol) break;
    }
    lambda = v.dot(c * v);
    if (!(lambda > 0.0)) return false;
    // Sign convention: largest-|loading| coordinate is positive.
    long arg = 0;
    for (long i = 1; i < d; ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0) v = -v;
    return true;
}

}  // namespace

PcaResult pca_project(const Eigen::MatrixXd& features) {
    const long n = features.rows();
    const long d = features.cols();
    if (n < 1 || d < 1) throw Error("pca_project: empty input");

    const Eigen::RowVectorXd mean = features.colwise().mean();
    const Eigen::MatrixXd centered = features.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n);

    PcaResult result;
    result.coords = Eigen::MatrixXd::Zero(n, 2);
    for (int comp = 0; comp < 2; ++comp) {
        Eigen::VectorXd v;
        double lambda = 0.0;
        if (!power_iterate(cov, v, lambda)) break;
        // after deflation the residual of a rank-1 input is pure float
        // noise; a "component" found there is not a direction of variance
        if (comp == 1 && lambda <= 1e-12 * result.explained_variance[0]) break;
        result.coords.col(comp) = centered * v;
        result.explained_variance[comp] = lambda;
        cov -= lambda * (v * v.transpose());
    }
    return result;
}

}  // namespace mcrage
