#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "wicksys/multi_index.hpp"

namespace wicksys {

/// Truncated chaos expansion: a sparse map from multi-indices to complex
/// coefficients, every stored index inside the truncation policy and no
/// stored coefficient exactly zero.
class ChaosExpansion {
public:
    using TermMap = std::map<MultiIndex, cplx, GradedLess>;

    explicit ChaosExpansion(TruncationPolicy policy) : policy_(policy) {}

    static ChaosExpansion constant(TruncationPolicy policy, cplx value) {
        ChaosExpansion out(policy);
        out.set_coeff(MultiIndex{}, value);
        return out;
    }

    static ChaosExpansion basis_term(TruncationPolicy policy, const MultiIndex& alpha,
                                     cplx value = 1.0) {
        ChaosExpansion out(policy);
        out.set_coeff(alpha, value);
        return out;
    }

    const TruncationPolicy& policy() const { return policy_; }
    const TermMap& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    cplx coeff(const MultiIndex& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? cplx{0.0} : it->second;
    }

    void set_coeff(const MultiIndex& alpha, cplx value) {
        if (!policy_.contains(alpha))
            throw PolicyError("ChaosExpansion: multi-index outside the truncation policy");
        if (value == cplx{0.0})
            terms_.erase(alpha);
        else
            terms_[alpha] = value;
    }

    void add_coeff(const MultiIndex& alpha, cplx value) { set_coeff(alpha, coeff(alpha) + value); }

    int degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

    int max_var() const {
        int v = 0;
        for (const auto& [alpha, c] : terms_) v = std::max(v, alpha.max_var());
        return v;
    }

    /// Same terms under a different (usually larger) policy.
    ChaosExpansion embedded(TruncationPolicy policy) const {
        ChaosExpansion out(policy);
        for (const auto& [alpha, c] : terms_) out.set_coeff(alpha, c);
        return out;
    }

    ChaosExpansion scaled(cplx factor) const {
        ChaosExpansion out(policy_);
        if (factor == cplx{0.0}) return out;
        for (const auto& [alpha, c] : terms_) out.terms_[alpha] = c * factor;
        return out;
    }

    ChaosExpansion conjugated() const {
        ChaosExpansion out(policy_);
        for (const auto& [alpha, c] : terms_) out.terms_[alpha] = std::conj(c);
        return out;
    }

    ChaosExpansion& operator+=(const ChaosExpansion& other) {
        for (const auto& [alpha, c] : other.terms_) add_coeff(alpha, c);
        return *this;
    }

    friend ChaosExpansion operator+(ChaosExpansion a, const ChaosExpansion& b) { return a += b; }

    friend ChaosExpansion operator-(const ChaosExpansion& a, const ChaosExpansion& b) {
        ChaosExpansion out = a;
        for (const auto& [alpha, c] : b.terms_) out.add_coeff(alpha, -c);
        return out;
    }

    bool operator==(const ChaosExpansion& other) const {
        return policy_ == other.policy_ && terms_ == other.terms_;
    }

private:
    TruncationPolicy policy_;
    TermMap terms_;
};

/// Wick product with an explicit truncation-loss flag.
struct WickResult {
    ChaosExpansion value;
    bool truncation_loss = false;
};

/// Coefficient of gamma is sum over alpha + beta = gamma of f_alpha g_beta.
/// The result lives in the pointwise-max policy of the operands; product
/// terms that leave it are dropped and flagged.
inline WickResult wick_product(const ChaosExpansion& f, const ChaosExpansion& g) {
    const TruncationPolicy policy = TruncationPolicy::merged(f.policy(), g.policy());
    ChaosExpansion out(policy);
    bool loss = false;
    for (const auto& [a, ca] : f.terms()) {
        for (const auto& [b, cb] : g.terms()) {
            const MultiIndex sum = a + b;
            if (!policy.contains(sum)) {
                loss = true;
                continue;
            }
            out.add_coeff(sum, ca * cb);
        }
    }
    return {std::move(out), loss};
}

/// Kondratiev-scale norm (sum |c_alpha|^2 (2N)^{-k alpha})^{1/2}.
inline double norm_k(const ChaosExpansion& f, WeightOrder k) {
    double s = 0.0;
    for (const auto& [alpha, c] : f.terms()) s += std::norm(c) * weight(alpha, -k.value);
    return std::sqrt(s);
}

/// White-noise-space norm (sum |c_alpha|^2 alpha!)^{1/2}.
inline double white_noise_norm(const ChaosExpansion& f) {
    double s = 0.0;
    for (const auto& [alpha, c] : f.terms()) s += std::norm(c) * alpha.factorial();
    return std::sqrt(s);
}

/// Weighted inner product, conjugate-linear in the second slot.
inline cplx inner_k(const ChaosExpansion& f, const ChaosExpansion& g, WeightOrder k) {
    const bool f_smaller = f.term_count() <= g.term_count();
    const ChaosExpansion& lead = f_smaller ? f : g;
    const ChaosExpansion& other = f_smaller ? g : f;
    cplx s = 0.0;
    for (const auto& [alpha, c] : lead.terms()) {
        const cplx o = other.coeff(alpha);
        if (o == cplx{0.0}) continue;
        const double w = weight(alpha, -k.value);
        s += f_smaller ? c * std::conj(o) * w : o * std::conj(c) * w;
    }
    return s;
}

/// Head of the Euler product prod_{j<=terms} (1 - (2j)^{-q})^{-1}; increases
/// monotonically towards vage_constant(q).
inline double vage_partial_product(double q, long terms) {
    double p = 1.0;
    for (long j = 1; j <= terms; ++j) p /= 1.0 - std::pow(2.0 * j, -q);
    return p;
}

/// A(q) = sum over all multi-indices of (2N)^{-q alpha}
///      = prod_{j>=1} (1 - (2j)^{-q})^{-1},  finite for q > 1.
///
/// A finite head of the product is multiplied out; the tail of log A(q),
/// sum_{j>J} sum_{m>=1} (2j)^{-qm}/m, is estimated with the midpoint rule for
/// the m = 1, 2 layers plus a geometric bound for m >= 3, and the head is
/// doubled until the rigorous remainder bound drops under tol.
inline double vage_constant(double q, double tol = 1e-12) {
    if (!(q > 1.0)) throw DivergenceError("vage_constant: series diverges for q <= 1");
    double head = 1.0;
    long done = 0;
    long head_len = 64;
    for (;;) {
        for (; done < head_len; ) {
            ++done;
            head /= 1.0 - std::pow(2.0 * done, -q);
        }
        const double J = static_cast<double>(head_len);
        const auto midpoint_tail = [J](double s) {
            return std::pow(J + 0.5, 1.0 - s) / (s - 1.0);  // integral over (J+1/2, inf) of x^{-s}
        };
        const double tail_log = std::pow(2.0, -q) * midpoint_tail(q) +
                                0.5 * std::pow(2.0, -2.0 * q) * midpoint_tail(2.0 * q);
        // Midpoint-rule error is at most s/24 * J^{-s-1} * (1 + (s+1)/J); the
        // factor 2 covers the parenthesis for J >= s + 1.
        const double x = std::pow(2.0 * J, -q);
        const double remainder =
            2.0 * (std::pow(2.0, -q) * (q / 24.0) * std::pow(J, -q - 1.0) +
                   0.5 * std::pow(2.0, -2.0 * q) * (q / 12.0) * std::pow(J, -2.0 * q - 1.0)) +
            (J / (3.0 * (3.0 * q - 1.0))) * x * x * x / (1.0 - x);
        const double value = head * std::exp(tail_log);
        if (value * std::expm1(remainder) <= tol) return value;
        if (head_len >= (1L << 24))
            throw ConvergenceError("vage_constant: requested tolerance unreachable");
        head_len *= 2;
    }
}

/// Finite complex point (z_1, ..., z_n), implicitly extended by zeros.
struct EvaluationPoint {
    std::vector<cplx> coords;

    EvaluationPoint() = default;
    explicit EvaluationPoint(std::vector<cplx> c) : coords(std::move(c)) {}

    cplx at(int var) const {
        return (var >= 1 && var <= static_cast<int>(coords.size())) ? coords[var - 1] : cplx{0.0};
    }
    int length() const { return static_cast<int>(coords.size()); }
};

inline cplx monomial_eval(const MultiIndex& alpha, const EvaluationPoint& z) {
    cplx prod = 1.0;
    for (const auto& [var, exp] : alpha.entries()) {
        const cplx base = z.at(var);
        for (int i = 0; i < exp; ++i) prod *= base;
    }
    return prod;
}

/// Hermite transform evaluated at z: sum c_alpha z^alpha.
inline cplx hermite_transform_eval(const ChaosExpansion& f, const EvaluationPoint& z) {
    cplx s = 0.0;
    for (const auto& [alpha, c] : f.terms()) s += c * monomial_eval(alpha, z);
    return s;
}

namespace detail {

/// Sum over the policy box of prod_j x_j^{alpha_j}, by degree-layered
/// accumulation over the variables.
template <typename Scalar>
Scalar box_geometric_sum(const std::vector<Scalar>& x, int max_degree) {
    std::vector<Scalar> acc(static_cast<std::size_t>(max_degree) + 1, Scalar{0});
    acc[0] = Scalar{1};
    for (const Scalar& xj : x) {
        std::vector<Scalar> next(acc.size(), Scalar{0});
        for (int d = 0; d <= max_degree; ++d) {
            if (acc[d] == Scalar{0}) continue;
            Scalar p{1};
            for (int a = 0; d + a <= max_degree; ++a) {
                next[d + a] += acc[d] * p;
                p *= xj;
            }
        }
        acc = std::move(next);
    }
    Scalar total{0};
    for (const Scalar& v : acc) total += v;
    return total;
}

}  // namespace detail

struct KernelValue {
    cplx value;         // truncated sum over the policy box
    double tail_bound;  // absolute bound on everything dropped; +inf if divergent
};

/// K_k(z, w) = sum z^alpha conj(w)^alpha (2N)^{k alpha}, truncated to the
/// policy box.  The tail bound is the exact absolute mass of the dropped
/// terms (full geometric product minus the box sum of |x_j|), infinite when
/// some per-variable factor fails |z_j w_j| (2j)^k < 1.
inline KernelValue kernel_K(const EvaluationPoint& z, const EvaluationPoint& w, WeightOrder k,
                            const TruncationPolicy& policy) {
    const int n_vars = std::max({z.length(), w.length(), 0});
    std::vector<cplx> x;
    std::vector<double> xabs;
    for (int j = 1; j <= n_vars; ++j) {
        const cplx xj = z.at(j) * std::conj(w.at(j)) * std::pow(2.0 * j, k.value);
        x.push_back(xj);
        xabs.push_back(std::abs(xj));
    }

    std::vector<cplx> x_in_box(x.begin(), x.begin() + std::min<int>(n_vars, policy.max_var));
    const cplx value = detail::box_geometric_sum(x_in_box, policy.max_degree);

    double tail = 0.0;
    bool divergent = false;
    double full = 1.0;
    for (double a : xabs) {
        if (a >= 1.0) divergent = true;
        else full /= 1.0 - a;
    }
    if (divergent) {
        tail = std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> xabs_in_box(xabs.begin(),
                                        xabs.begin() + std::min<int>(n_vars, policy.max_var));
        tail = std::max(0.0, full - detail::box_geometric_sum(xabs_in_box, policy.max_degree));
    }
    return {value, tail};
}

/// Membership test for the admissibility neighborhood of order k: every
/// per-variable factor |z_j|^2 (2j)^k must stay below 1 and the mass dropped
/// by the policy box must be at most tol relative to the full product.
inline bool membership_Kk(const EvaluationPoint& z, WeightOrder k, const TruncationPolicy& policy,
                          double tol) {
    std::vector<double> x;
    double full = 1.0;
    for (int j = 1; j <= z.length(); ++j) {
        const double xj = std::norm(z.at(j)) * std::pow(2.0 * j, k.value);
        if (xj >= 1.0) return false;
        x.push_back(xj);
        full /= 1.0 - xj;
    }
    std::vector<double> x_in_box(x.begin(), x.begin() + std::min<int>(z.length(), policy.max_var));
    const double boxed = detail::box_geometric_sum(x_in_box, policy.max_degree);
    return full - boxed <= tol * full;
}

}  // namespace wicksys
