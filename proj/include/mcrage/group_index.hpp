#pragma once

#include <span>
#include <vector>

#include "mcrage/schema.hpp"

namespace mcrage {

// Bijection between (label, attribute...) tuples and flat group ids.
// Tuples are mixed-radix numbers with the first component least significant:
// encode(t) = sum_i t_i * prod_{j<i} K_j, with the leading product empty (1).
class GroupIndexMap {
public:
    // Cardinalities in tuple order: label first, then each attribute.
    explicit GroupIndexMap(std::vector<int> cardinalities);

    static GroupIndexMap from_schema(const ColumnSchema& schema);

    int group_count() const { return group_count_; }
    const std::vector<int>& cardinalities() const { return cards_; }
    int tuple_length() const { return static_cast<int>(cards_.size()); }

    int encode(std::span<const int> tuple) const;
    std::vector<int> decode(int id) const;

private:
    std::vector<int> cards_;
    std::vector<int> strides_;
    int group_count_;
};

// Group id of every row: encode((label, attributes...)).
std::vector<int> row_group_ids(const Dataset& ds, const GroupIndexMap& map);

struct GroupStats {
    std::vector<long> counts;       // size G, sums to n
    std::vector<double> proportions; // counts / n
    int majority;                   // argmax count, smallest index on ties
};

GroupStats group_stats(const Dataset& ds, const GroupIndexMap& map);

}  // namespace mcrage
