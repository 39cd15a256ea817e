#ifndef ADMG_NODE_SET_HPP
#define ADMG_NODE_SET_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <vector>

namespace admg {

/// Largest number of nodes a graph may hold; every NodeSet fits one word.
inline constexpr int kMaxNodes = 62;

/// Set of node indices stored as a single 64-bit mask.
class NodeSet {
public:
    class iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = int;
        using difference_type = std::ptrdiff_t;
        using pointer = const int*;
        using reference = int;

        iterator() = default;
        explicit iterator(std::uint64_t rest) : rest_(rest) {}

        int operator*() const { return std::countr_zero(rest_); }
        iterator& operator++() {
            rest_ &= rest_ - 1;
            return *this;
        }
        iterator operator++(int) {
            iterator old = *this;
            ++*this;
            return old;
        }
        bool operator==(const iterator&) const = default;

    private:
        std::uint64_t rest_ = 0;
    };

    constexpr NodeSet() = default;
    constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits) {}
    NodeSet(std::initializer_list<int> nodes) {
        for (int v : nodes) insert(v);
    }

    static NodeSet single(int v) { return NodeSet(std::uint64_t{1} << v); }
    /// {0, ..., n-1}
    static NodeSet full(int n) {
        return NodeSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
    }
    static NodeSet of(const std::vector<int>& nodes) {
        NodeSet s;
        for (int v : nodes) s.insert(v);
        return s;
    }

    constexpr std::uint64_t bits() const { return bits_; }
    bool empty() const { return bits_ == 0; }
    int size() const { return std::popcount(bits_); }
    bool contains(int v) const { return (bits_ >> v) & 1U; }
    bool subset_of(NodeSet other) const { return (bits_ & ~other.bits_) == 0; }
    bool intersects(NodeSet other) const { return (bits_ & other.bits_) != 0; }
    /// Smallest member; undefined on the empty set.
    int first() const { return std::countr_zero(bits_); }

    void insert(int v) { bits_ |= std::uint64_t{1} << v; }
    void erase(int v) { bits_ &= ~(std::uint64_t{1} << v); }

    NodeSet with(int v) const {
        NodeSet s = *this;
        s.insert(v);
        return s;
    }
    NodeSet without(int v) const {
        NodeSet s = *this;
        s.erase(v);
        return s;
    }

    iterator begin() const { return iterator(bits_); }
    iterator end() const { return iterator(0); }

    std::vector<int> to_vector() const { return {begin(), end()}; }

    NodeSet operator|(NodeSet o) const { return NodeSet(bits_ | o.bits_); }
    NodeSet operator&(NodeSet o) const { return NodeSet(bits_ & o.bits_); }
    NodeSet operator-(NodeSet o) const { return NodeSet(bits_ & ~o.bits_); }
    NodeSet& operator|=(NodeSet o) {
        bits_ |= o.bits_;
        return *this;
    }
    NodeSet& operator&=(NodeSet o) {
        bits_ &= o.bits_;
        return *this;
    }
    NodeSet& operator-=(NodeSet o) {
        bits_ &= ~o.bits_;
        return *this;
    }

    bool operator==(const NodeSet&) const = default;
    auto operator<=>(const NodeSet&) const = default;

private:
    std::uint64_t bits_ = 0;
};

/// Calls fn(subset) for every subset of `set`, including the empty set and `set` itself.
template <typename Fn>
void for_each_subset(NodeSet set, Fn&& fn) {
    const std::uint64_t mask = set.bits();
    std::uint64_t sub = 0;
    while (true) {
        fn(NodeSet(sub));
        if (sub == mask) break;
        sub = (sub - mask) & mask;
    }
}

/// Subsets of `set` ordered by increasing cardinality, ties broken by mask value.
inline std::vector<NodeSet> subsets_by_size(NodeSet set) {
    std::vector<NodeSet> out;
    for_each_subset(set, [&](NodeSet s) { out.push_back(s); });
    std::stable_sort(out.begin(), out.end(), [](NodeSet a, NodeSet b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a.bits() < b.bits();
    });
    return out;
}

} // namespace admg

#endif // ADMG_NODE_SET_HPP
