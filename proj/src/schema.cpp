#include "mcrage/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mcrage/rng.hpp"

namespace mcrage {

void ColumnSchema::validate_names() const {
    if (label_name.empty()) throw ConfigError("schema: label column name is empty");
    std::unordered_set<std::string> seen;
    auto add = [&](const std::string& name, const char* role) {
        if (name.empty()) throw ConfigError(std::string("schema: empty ") + role + " column name");
        if (!seen.insert(name).second)
            throw ConfigError("schema: column name '" + name + "' declared twice");
    };
    for (const auto& n : continuous_names) add(n, "continuous");
    for (const auto& n : attribute_names) add(n, "attribute");
    add(label_name, "label");
}

void ColumnSchema::validate_cardinalities() const {
    for (std::size_t i = 0; i < attribute_values.size(); ++i) {
        if (attribute_values[i].size() < 2)
            throw Error("schema: attribute '" + attribute_names[i] +
                        "' has cardinality " + std::to_string(attribute_values[i].size()) +
                        " (need >= 2)");
    }
    if (label_values.size() < 2)
        throw Error("schema: label '" + label_name + "' has cardinality " +
                    std::to_string(label_values.size()) + " (need >= 2)");
}

void Dataset::validate() const {
    const long rows = features.rows();
    if (attributes.rows() != rows || labels.size() != rows)
        throw Error("dataset: row counts disagree across features/attributes/labels");
    if (!synthetic.empty() && static_cast<long>(synthetic.size()) != rows)
        throw Error("dataset: synthetic flag count disagrees with row count");
    if (!features.allFinite()) throw Error("dataset: non-finite feature value");
    for (long i = 0; i < rows; ++i) {
        for (long l = 0; l < attributes.cols(); ++l) {
            const int code = attributes(i, l);
            if (code < 0 || code >= schema.attribute_cardinality(static_cast<int>(l)))
                throw Error("dataset: attribute code out of range at row " + std::to_string(i));
        }
        if (labels[i] < 0 || labels[i] >= schema.label_cardinality())
            throw Error("dataset: label code out of range at row " + std::to_string(i));
    }
}

Dataset Dataset::filter(const std::vector<char>& keep) const {
    const long kept = std::count(keep.begin(), keep.end(), char(1));
    Dataset out;
    out.schema = schema;
    out.features.resize(kept, features.cols());
    out.attributes.resize(kept, attributes.cols());
    out.labels.resize(kept);
    if (has_flags()) out.synthetic.reserve(kept);
    long r = 0;
    for (long i = 0; i < features.rows(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        out.features.row(r) = features.row(i);
        out.attributes.row(r) = attributes.row(i);
        out.labels[r] = labels[i];
        if (has_flags()) out.synthetic.push_back(synthetic[static_cast<std::size_t>(i)]);
        ++r;
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (quoted) {
            if (ch == '"') quoted = false;
            else cur.push_back(ch);
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSchema& schema_in) {
    schema_in.validate_names();
    std::ifstream in(path);
    if (!in) throw Error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw Error("load_csv: '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);

    auto column_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return static_cast<int>(i);
        throw Error("load_csv: column '" + name + "' missing from header of '" + path + "'");
    };

    const int d = schema_in.continuous_count();
    const int L = schema_in.attribute_count();
    std::vector<int> cont_idx(d), attr_idx(L);
    for (int j = 0; j < d; ++j) cont_idx[j] = column_of(schema_in.continuous_names[j]);
    for (int l = 0; l < L; ++l) attr_idx[l] = column_of(schema_in.attribute_names[l]);
    const int label_idx = column_of(schema_in.label_name);

    // a __synthetic column (as written by write_csv) round-trips into the flags
    int flag_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == "__synthetic") flag_idx = static_cast<int>(i);

    std::vector<double> feat_flat;
    std::vector<int> attr_flat;
    std::vector<int> label_codes;
    std::vector<std::uint8_t> flags;

    // First-appearance coding tables. Pre-filled tables in the input schema
    // are reused verbatim (frozen), so a second file codes identically; a
    // value absent from a frozen table is an error.
    std::vector<std::unordered_map<std::string, int>> attr_code(L);
    std::unordered_map<std::string, int> label_code;
    ColumnSchema schema = schema_in;
    if (schema.attribute_values.empty()) schema.attribute_values.assign(L, {});
    if (static_cast<int>(schema.attribute_values.size()) != L)
        throw Error("load_csv: schema value tables disagree with attribute count");
    std::vector<bool> attr_frozen(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        const auto& vals = schema.attribute_values[static_cast<std::size_t>(l)];
        attr_frozen[static_cast<std::size_t>(l)] = !vals.empty();
        for (std::size_t c = 0; c < vals.size(); ++c) attr_code[l][vals[c]] = static_cast<int>(c);
    }
    const bool label_frozen = !schema.label_values.empty();
    for (std::size_t c = 0; c < schema.label_values.size(); ++c)
        label_code[schema.label_values[c]] = static_cast<int>(c);

    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size())
            throw Error("load_csv: row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
        for (int j = 0; j < d; ++j) {
            const std::string cell = trim(cells[static_cast<std::size_t>(cont_idx[j])]);
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                throw Error("load_csv: unparsable numeric cell '" + cell + "' at row " +
                            std::to_string(row) + ", column '" + schema.continuous_names[j] + "'");
            if (!std::isfinite(v))
                throw Error("load_csv: non-finite value '" + cell + "' at row " +
                            std::to_string(row) + ", column '" + schema.continuous_names[j] + "'");
            feat_flat.push_back(v);
        }
        for (int l = 0; l < L; ++l) {
            const std::string cell = trim(cells[static_cast<std::size_t>(attr_idx[l])]);
            auto it = attr_code[l].find(cell);
            if (it == attr_code[l].end()) {
                if (attr_frozen[static_cast<std::size_t>(l)])
                    throw Error("load_csv: value '" + cell + "' at row " + std::to_string(row) +
                                " is not in the schema's table for '" +
                                schema.attribute_names[l] + "'");
                it = attr_code[l].emplace(cell, static_cast<int>(attr_code[l].size())).first;
                schema.attribute_values[l].push_back(cell);
            }
            attr_flat.push_back(it->second);
        }
        const std::string cell = trim(cells[static_cast<std::size_t>(label_idx)]);
        auto it = label_code.find(cell);
        if (it == label_code.end()) {
            if (label_frozen)
                throw Error("load_csv: value '" + cell + "' at row " + std::to_string(row) +
                            " is not in the schema's table for '" + schema.label_name + "'");
            it = label_code.emplace(cell, static_cast<int>(label_code.size())).first;
            schema.label_values.push_back(cell);
        }
        label_codes.push_back(it->second);
        if (flag_idx >= 0) {
            const std::string f = trim(cells[static_cast<std::size_t>(flag_idx)]);
            if (f != "0" && f != "1")
                throw Error("load_csv: __synthetic cell '" + f + "' at row " +
                            std::to_string(row) + " is not 0 or 1");
            flags.push_back(f == "1" ? 1 : 0);
        }
    }
    if (row == 0) throw Error("load_csv: '" + path + "' has a header but no rows");

    schema.validate_cardinalities();

    Dataset ds;
    ds.schema = schema;
    ds.synthetic = std::move(flags);
    const long n = static_cast<long>(label_codes.size());
    ds.features.resize(n, d);
    ds.attributes.resize(n, L);
    ds.labels.resize(n);
    for (long i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) ds.features(i, j) = feat_flat[static_cast<std::size_t>(i * d + j)];
        for (int l = 0; l < L; ++l) ds.attributes(i, l) = attr_flat[static_cast<std::size_t>(i * L + l)];
        ds.labels[i] = label_codes[static_cast<std::size_t>(i)];
    }
    ds.validate();
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    const auto& s = ds.schema;
    for (int j = 0; j < s.continuous_count(); ++j) {
        if (j) out << ',';
        out << s.continuous_names[j];
    }
    for (int l = 0; l < s.attribute_count(); ++l) {
        if (s.continuous_count() + l > 0) out << ',';
        out << s.attribute_names[l];
    }
    if (s.continuous_count() + s.attribute_count() > 0) out << ',';
    out << s.label_name;
    if (ds.has_flags()) out << ",__synthetic";
    out << '\n';

    char buf[40];
    for (long i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
            out << buf;
        }
        for (int l = 0; l < ds.attribute_count(); ++l) {
            if (ds.d() + l > 0) out << ',';
            out << s.attribute_values[static_cast<std::size_t>(l)]
                                     [static_cast<std::size_t>(ds.attributes(i, l))];
        }
        if (ds.d() + ds.attribute_count() > 0) out << ',';
        out << s.label_values[static_cast<std::size_t>(ds.labels[i])];
        if (ds.has_flags()) out << ',' << int(ds.synthetic[static_cast<std::size_t>(i)]);
        out << '\n';
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw Error("write_csv: cannot open '" + tmp + "'");
        f << out.str();
    }
    std::filesystem::rename(tmp, path);
}

std::pair<Dataset, ScalerParams> standardize(const Dataset& ds) {
    if (ds.n() < 2) throw Error("standardize: need at least 2 rows");
    const long n = ds.n();
    ScalerParams sp;
    sp.mean = ds.features.colwise().mean();
    Eigen::MatrixXd centered = ds.features.rowwise() - sp.mean.transpose();
    sp.stddev = (centered.array().square().colwise().sum() / double(n)).sqrt();
    for (int j = 0; j < ds.d(); ++j) {
        if (sp.stddev[j] <= 0.0)
            throw Error("standardize: column '" + ds.schema.continuous_names[j] +
                        "' is constant");
    }
    Dataset out = ds;
    out.features = centered.array().rowwise() / sp.stddev.transpose().array();
    return {std::move(out), std::move(sp)};
}

Dataset destandardize(const Dataset& ds, const ScalerParams& sp) {
    if (sp.mean.size() != ds.d() || sp.stddev.size() != ds.d())
        throw Error("destandardize: scaler dimension mismatch");
    Dataset out = ds;
    out.features = (ds.features.array().rowwise() * sp.stddev.transpose().array()).rowwise() +
                   sp.mean.transpose().array();
    return out;
}

namespace {

// Column lookup covering both attributes and the label. Returns -1 for the
// label, else the attribute index.
int resolve_column(const ColumnSchema& s, const std::string& column) {
    if (column == s.label_name) return -1;
    for (int l = 0; l < s.attribute_count(); ++l)
        if (s.attribute_names[l] == column) return l;
    throw Error("column '" + column + "' is not an attribute or the label");
}

}  // namespace

Dataset make_imbalanced(const Dataset& ds, const std::string& column, int code, double fraction,
                        std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error("make_imbalanced: fraction must lie in (0,1]");
    const int col = resolve_column(ds.schema, column);
    std::vector<long> minority_rows;
    for (long i = 0; i < ds.n(); ++i) {
        const int v = col < 0 ? ds.labels[i] : ds.attributes(i, col);
        if (v == code) minority_rows.push_back(i);
    }
    if (minority_rows.empty())
        throw Error("make_imbalanced: no rows carry code " + std::to_string(code) + " in '" +
                    column + "'");
    const long m = static_cast<long>(minority_rows.size());
    const long keep_count = static_cast<long>(std::floor(fraction * double(m)));

    Rng rng(seed);
    // partial Fisher-Yates: the first keep_count entries are a uniform sample
    std::vector<long> pool = minority_rows;
    for (long i = 0; i < keep_count; ++i) {
        const long j = i + rng.uniform_int(static_cast<int>(m - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<char> keep(static_cast<std::size_t>(ds.n()), 1);
    for (long r : minority_rows) keep[static_cast<std::size_t>(r)] = 0;
    for (long i = 0; i < keep_count; ++i) keep[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    return ds.filter(keep);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed,
                                             const std::vector<int>& stratify_by) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error("train_test_split: test_fraction must lie in (0,1)");
    std::vector<char> is_test(static_cast<std::size_t>(ds.n()), 0);
    Rng rng(seed);

    auto mark_tests = [&](std::vector<long>& rows) {
        const long g = static_cast<long>(rows.size());
        const long t = std::lround(test_fraction * double(g));
        for (long i = 0; i < t; ++i) {
            const long j = i + rng.uniform_int(static_cast<int>(g - i));
            std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
            is_test[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = 1;
        }
    };

    if (stratify_by.empty()) {
        std::vector<long> rows(static_cast<std::size_t>(ds.n()));
        for (long i = 0; i < ds.n(); ++i) rows[static_cast<std::size_t>(i)] = i;
        mark_tests(rows);
    } else {
        if (static_cast<long>(stratify_by.size()) != ds.n())
            throw Error("train_test_split: stratify_by size mismatch");
        const int G = *std::max_element(stratify_by.begin(), stratify_by.end()) + 1;
        std::vector<std::vector<long>> by_group(static_cast<std::size_t>(G));
        for (long i = 0; i < ds.n(); ++i)
            by_group[static_cast<std::size_t>(stratify_by[static_cast<std::size_t>(i)])].push_back(i);
        for (int g = 0; g < G; ++g) {
            auto& rows = by_group[static_cast<std::size_t>(g)];
            if (rows.empty()) continue;
            if (rows.size() < 2)
                throw Error("train_test_split: group " + std::to_string(g) +
                            " has fewer than 2 rows; cannot stratify");
            mark_tests(rows);
        }
    }

    std::vector<char> keep_train(is_test.size()), keep_test(is_test.size());
    for (std::size_t i = 0; i < is_test.size(); ++i) {
        keep_train[i] = !is_test[i];
        keep_test[i] = is_test[i];
    }
    return {ds.filter(keep_train), ds.filter(keep_test)};
}

}  // namespace mcrage
