#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wicksys/errors.hpp"

namespace wicksys {

using cplx = std::complex<double>;

/// Finitely supported exponent sequence over the variables 1, 2, 3, ...
///
/// Stored sparsely as (variable, exponent) pairs with strictly increasing
/// variable indices and strictly positive exponents; the empty sequence is
/// alpha = 0.  Immutable after construction.
class MultiIndex {
public:
    using Entry = std::pair<int, int>;  // (variable index j >= 1, exponent >= 1)

    MultiIndex() = default;

    explicit MultiIndex(std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end());
        for (const auto& [var, exp] : entries) {
            if (var < 1) throw std::invalid_argument("MultiIndex: variable indices start at 1");
            if (exp < 0) throw std::invalid_argument("MultiIndex: exponents must be non-negative");
            if (exp == 0) continue;
            if (!entries_.empty() && entries_.back().first == var)
                entries_.back().second += exp;
            else
                entries_.emplace_back(var, exp);
        }
    }

    static MultiIndex unit(int var, int exp = 1) { return MultiIndex({{var, exp}}); }

    const std::vector<Entry>& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

    /// Total degree |alpha|.
    int degree() const {
        int d = 0;
        for (const auto& e : entries_) d += e.second;
        return d;
    }

    /// Largest variable index with a nonzero exponent; 0 for alpha = 0.
    int max_var() const { return entries_.empty() ? 0 : entries_.back().first; }

    int exponent(int var) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{var, 0});
        return (it != entries_.end() && it->first == var) ? it->second : 0;
    }

    /// alpha! = prod_j alpha_j!
    double factorial() const {
        double f = 1.0;
        for (const auto& [var, exp] : entries_)
            for (int i = 2; i <= exp; ++i) f *= i;
        return f;
    }

    MultiIndex operator+(const MultiIndex& other) const {
        MultiIndex out;
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() || b != other.entries_.end()) {
            if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first))
                out.entries_.push_back(*a++);
            else if (a == entries_.end() || b->first < a->first)
                out.entries_.push_back(*b++);
            else {
                out.entries_.emplace_back(a->first, a->second + b->second);
                ++a;
                ++b;
            }
        }
        return out;
    }

    /// Componentwise difference this - other, or nullopt unless other <= this.
    std::optional<MultiIndex> minus(const MultiIndex& other) const {
        MultiIndex out;
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() || b != other.entries_.end()) {
            if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
                out.entries_.push_back(*a++);
            } else if (a == entries_.end() || b->first < a->first) {
                return std::nullopt;  // other has a variable this lacks
            } else {
                const int diff = a->second - b->second;
                if (diff < 0) return std::nullopt;
                if (diff > 0) out.entries_.emplace_back(a->first, diff);
                ++a;
                ++b;
            }
        }
        return out;
    }

    /// Componentwise this <= other.
    bool leq(const MultiIndex& other) const { return other.minus(*this).has_value(); }

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
    bool operator!=(const MultiIndex& other) const { return !(*this == other); }

private:
    std::vector<Entry> entries_;
};

/// Graded lexicographic order: total degree first; within a degree the index
/// with the larger exponent at the first differing variable comes first, so
/// for two variables the degree-2 layer reads z1^2, z1 z2, z2^2.
struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        auto ia = a.entries().begin();
        auto ib = b.entries().begin();
        while (ia != a.entries().end() && ib != b.entries().end()) {
            if (ia->first != ib->first) return ia->first < ib->first;
            if (ia->second != ib->second) return ia->second > ib->second;
            ++ia;
            ++ib;
        }
        return false;  // one exhausted => equal (same degree, same prefix)
    }
};

/// (2N)^{q alpha} = prod_j (2j)^{q alpha_j}; 1 for alpha = 0.
inline double weight(const MultiIndex& alpha, double q) {
    double prod = 1.0;
    for (const auto& [var, exp] : alpha.entries())
        prod *= std::pow(2.0 * var, q * exp);
    if (!std::isfinite(prod)) throw OverflowError("weight: (2N)^{q alpha} left the double range");
    return prod;
}

/// Order of a Kondratiev-scale norm.
struct WeightOrder {
    int value;
    explicit WeightOrder(int k) : value(k) {
        if (k < 1) throw std::invalid_argument("WeightOrder: k >= 1 required");
    }
    bool operator==(const WeightOrder& o) const { return value == o.value; }
};

/// Finite box truncation: variables 1..max_var, total degree <= max_degree.
struct TruncationPolicy {
    int max_var;     // J
    int max_degree;  // D

    TruncationPolicy(int var_bound, int degree_bound)
        : max_var(var_bound), max_degree(degree_bound) {
        if (max_var < 1) throw std::invalid_argument("TruncationPolicy: max_var >= 1 required");
        if (max_degree < 0) throw std::invalid_argument("TruncationPolicy: max_degree >= 0 required");
    }

    bool contains(const MultiIndex& alpha) const {
        return alpha.max_var() <= max_var && alpha.degree() <= max_degree;
    }

    /// Number of multi-indices in the box: C(max_var + max_degree, max_var).
    std::size_t basis_size() const {
        std::size_t n = 1;
        for (int i = 1; i <= max_var; ++i)
            n = n * (max_degree + i) / i;
        return n;
    }

    static TruncationPolicy merged(const TruncationPolicy& a, const TruncationPolicy& b) {
        return {std::max(a.max_var, b.max_var), std::max(a.max_degree, b.max_degree)};
    }

    bool operator==(const TruncationPolicy& o) const {
        return max_var == o.max_var && max_degree == o.max_degree;
    }
    bool operator!=(const TruncationPolicy& o) const { return !(*this == o); }
};

/// Deterministic graded-lexicographic listing of a policy box.  Index 0 is
/// alpha = 0 and total degree is non-decreasing along the enumeration.
class BasisEnumeration {
public:
    explicit BasisEnumeration(TruncationPolicy policy) : policy_(policy) {
        std::vector<MultiIndex::Entry> current;
        generate(1, policy.max_degree, current);
        std::sort(order_.begin(), order_.end(), GradedLess{});
        for (std::size_t i = 0; i < order_.size(); ++i) index_.emplace(order_[i], i);
    }

    const TruncationPolicy& policy() const { return policy_; }
    std::size_t size() const { return order_.size(); }
    const MultiIndex& alpha(std::size_t i) const { return order_.at(i); }
    const std::vector<MultiIndex>& all() const { return order_; }

    std::optional<std::size_t> index_of(const MultiIndex& alpha) const {
        auto it = index_.find(alpha);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    void generate(int var, int remaining, std::vector<MultiIndex::Entry>& current) {
        if (var > policy_.max_var) {
            order_.emplace_back(MultiIndex(current));
            return;
        }
        for (int exp = 0; exp <= remaining; ++exp) {
            if (exp > 0) current.emplace_back(var, exp);
            generate(var + 1, remaining - exp, current);
            if (exp > 0) current.pop_back();
        }
    }

    TruncationPolicy policy_;
    std::vector<MultiIndex> order_;
    std::map<MultiIndex, std::size_t, GradedLess> index_;
};

}  // namespace wicksys
