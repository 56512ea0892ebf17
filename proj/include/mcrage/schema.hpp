#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcrage/error.hpp"

namespace mcrage {

// Declares which CSV columns play which role. Category value lists are
// filled in by load_csv in first-appearance order and persist with the
// schema so codes decode identically across runs.
struct ColumnSchema {
    std::vector<std::string> continuous_names;
    std::vector<std::string> attribute_names;
    std::string label_name;

    // Code -> value-string tables, one per attribute plus one for the label.
    std::vector<std::vector<std::string>> attribute_values;
    std::vector<std::string> label_values;

    int continuous_count() const { return static_cast<int>(continuous_names.size()); }
    int attribute_count() const { return static_cast<int>(attribute_names.size()); }
    int attribute_cardinality(int i) const { return static_cast<int>(attribute_values[i].size()); }
    int label_cardinality() const { return static_cast<int>(label_values.size()); }

    // Name disjointness and non-emptiness; cardinalities only once coded.
    void validate_names() const;
    void validate_cardinalities() const;
};

// Standardized continuous features, coded attributes, coded labels.
// `synthetic` is empty for purely observed data; once rebalancing appends
// rows it holds one 0/1 flag per row.
struct Dataset {
    Eigen::MatrixXd features;   // n x d
    Eigen::MatrixXi attributes; // n x L
    Eigen::VectorXi labels;     // n
    ColumnSchema schema;
    std::vector<std::uint8_t> synthetic; // empty or size n

    int n() const { return static_cast<int>(features.rows()); }
    int d() const { return static_cast<int>(features.cols()); }
    int attribute_count() const { return static_cast<int>(attributes.cols()); }

    bool has_flags() const { return !synthetic.empty(); }

    // Checks the type invariants: equal row counts, codes within their
    // cardinalities, finite features.
    void validate() const;

    // New dataset holding the rows with keep[i] true, order preserved.
    Dataset filter(const std::vector<char>& keep) const;
};

struct ScalerParams {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev; // population convention, all > 0
};

// --- ingestion ------------------------------------------------------------

// Parses a headered CSV ('.' decimal point, UTF-8). Categorical values are
// coded in first-appearance order and recorded in the returned schema; a
// schema whose value tables are already filled codes with them instead and
// rejects unseen values. Errors name the offending row/column.
Dataset load_csv(const std::string& path, const ColumnSchema& schema);

// Writes schema columns (continuous, attributes, label) with category codes
// decoded back to their value strings. When the dataset carries synthetic
// flags a trailing __synthetic column is emitted. Atomic (temp + rename).
void write_csv(const Dataset& ds, const std::string& path);

// --- standardization ------------------------------------------------------

// Centers and scales each continuous column to mean 0, population variance 1.
// Constant columns are an error naming the column.
std::pair<Dataset, ScalerParams> standardize(const Dataset& ds);

// Inverse of standardize; exact affine map per column.
Dataset destandardize(const Dataset& ds, const ScalerParams& sp);

// --- imbalance induction & splitting ---------------------------------------

// Keeps every row not carrying `code` in `column` (an attribute name or the
// label name) and floor(fraction*m) uniformly chosen rows of the m that do.
// Row order preserved; deterministic given seed.
Dataset make_imbalanced(const Dataset& ds, const std::string& column, int code,
                        double fraction, std::uint64_t seed);

// Stratified train/test split: per-group test counts are
// round(test_fraction * group_count). Pass an empty group-id vector for an
// unstratified split. Union is the original multiset; order preserved.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed,
                                             const std::vector<int>& stratify_by = {});

}  // namespace mcrage
