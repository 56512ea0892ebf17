#include "mcrage/group_index.hpp"

#include <algorithm>

namespace mcrage {

GroupIndexMap::GroupIndexMap(std::vector<int> cardinalities) : cards_(std::move(cardinalities)) {
    if (cards_.empty()) throw Error("group index: empty cardinality vector");
    strides_.resize(cards_.size());
    long g = 1;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        if (cards_[i] < 2)
            throw Error("group index: cardinality " + std::to_string(cards_[i]) +
                        " at position " + std::to_string(i) + " (need >= 2)");
        strides_[i] = static_cast<int>(g);
        g *= cards_[i];
        if (g > (1L << 30)) throw Error("group index: group count overflow");
    }
    group_count_ = static_cast<int>(g);
}

GroupIndexMap GroupIndexMap::from_schema(const ColumnSchema& schema) {
    std::vector<int> cards;
    cards.push_back(schema.label_cardinality());
    for (int l = 0; l < schema.attribute_count(); ++l)
        cards.push_back(schema.attribute_cardinality(l));
    return GroupIndexMap(std::move(cards));
}

int GroupIndexMap::encode(std::span<const int> tuple) const {
    if (tuple.size() != cards_.size())
        throw Error("encode_group: tuple length " + std::to_string(tuple.size()) +
                    ", expected " + std::to_string(cards_.size()));
    long id = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        if (tuple[i] < 0 || tuple[i] >= cards_[i])
            throw Error("encode_group: component " + std::to_string(i) + " value " +
                        std::to_string(tuple[i]) + " outside [0," +
                        std::to_string(cards_[i]) + ")");
        id += static_cast<long>(tuple[i]) * strides_[i];
    }
    return static_cast<int>(id);
}

std::vector<int> GroupIndexMap::decode(int id) const {
    if (id < 0 || id >= group_count_)
        throw Error("decode_group: id " + std::to_string(id) + " outside [0," +
                    std::to_string(group_count_) + ")");
    std::vector<int> tuple(cards_.size());
    int rest = id;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        tuple[i] = rest % cards_[i];
        rest /= cards_[i];
    }
    return tuple;
}

std::vector<int> row_group_ids(const Dataset& ds, const GroupIndexMap& map) {
    if (map.tuple_length() != 1 + ds.attribute_count())
        throw Error("row_group_ids: map arity does not match dataset");
    std::vector<int> ids(static_cast<std::size_t>(ds.n()));
    std::vector<int> tuple(static_cast<std::size_t>(map.tuple_length()));
    for (long i = 0; i < ds.n(); ++i) {
        tuple[0] = ds.labels[i];
        for (int l = 0; l < ds.attribute_count(); ++l)
            tuple[static_cast<std::size_t>(1 + l)] = ds.attributes(i, l);
        ids[static_cast<std::size_t>(i)] = map.encode(tuple);
    }
    return ids;
}

GroupStats group_stats(const Dataset& ds, const GroupIndexMap& map) {
    if (ds.n() == 0) throw Error("group_stats: empty dataset");
    GroupStats st;
    st.counts.assign(static_cast<std::size_t>(map.group_count()), 0);
    for (int id : row_group_ids(ds, map)) st.counts[static_cast<std::size_t>(id)]++;
    st.proportions.resize(st.counts.size());
    for (std::size_t k = 0; k < st.counts.size(); ++k)
        st.proportions[k] = double(st.counts[k]) / double(ds.n());
    st.majority = static_cast<int>(
        std::max_element(st.counts.begin(), st.counts.end()) - st.counts.begin());
    return st;
}

}  // namespace mcrage
