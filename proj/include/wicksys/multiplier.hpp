#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wicksys/chaos.hpp"

namespace wicksys {

inline constexpr Eigen::Index kDenseMatrixCap = 4096;     // dense storage up to this basis size
inline constexpr Eigen::Index kDenseSvdCap = 512;         // exact SVD fallback up to this size
inline constexpr int kPowerIterationMaxIter = 10000;
inline constexpr std::uint64_t kPowerIterationSeed = 0x9e3779b97f4a7c15ULL;

/// Matrix of the Wick multiplier u -> h <> u on the truncated weighted
/// orthonormal basis e_alpha = (2N)^{k alpha / 2} H_alpha of order k.
/// Entry (gamma, beta) is h_{gamma-beta} (2N)^{-k (gamma-beta)/2} when the
/// difference is a valid multi-index and 0 otherwise, so the matrix is lower
/// triangular with respect to the grading.
class MultiplierMatrix {
public:
    MultiplierMatrix(WeightOrder k, BasisEnumeration basis, Eigen::MatrixXcd dense)
        : k_(k), basis_(std::move(basis)), dense_(std::move(dense)), is_dense_(true) {}

    MultiplierMatrix(WeightOrder k, BasisEnumeration basis, Eigen::SparseMatrix<cplx> sparse)
        : k_(k), basis_(std::move(basis)), sparse_(std::move(sparse)), is_dense_(false) {}

    WeightOrder order() const { return k_; }
    const BasisEnumeration& basis() const { return basis_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(basis_.size()); }
    bool is_dense() const { return is_dense_; }

    const Eigen::MatrixXcd& dense() const {
        if (!is_dense_) throw std::logic_error("MultiplierMatrix: stored sparse");
        return dense_;
    }

    Eigen::MatrixXcd to_dense() const {
        return is_dense_ ? dense_ : Eigen::MatrixXcd(sparse_);
    }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
        return is_dense_ ? Eigen::VectorXcd(dense_ * v) : Eigen::VectorXcd(sparse_ * v);
    }

    Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const {
        return is_dense_ ? Eigen::VectorXcd(dense_.adjoint() * v)
                         : Eigen::VectorXcd(sparse_.adjoint() * v);
    }

private:
    WeightOrder k_;
    BasisEnumeration basis_;
    Eigen::MatrixXcd dense_;
    Eigen::SparseMatrix<cplx> sparse_;
    bool is_dense_;
};

inline Eigen::VectorXcd to_weighted_coords(const ChaosExpansion& u, WeightOrder k,
                                           const BasisEnumeration& basis) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (const auto& [alpha, c] : u.terms()) {
        const auto idx = basis.index_of(alpha);
        if (!idx) throw PolicyError("to_weighted_coords: term outside the basis policy");
        v[static_cast<Eigen::Index>(*idx)] = c * std::sqrt(weight(alpha, -k.value));
    }
    return v;
}

inline ChaosExpansion from_weighted_coords(const Eigen::VectorXcd& v, WeightOrder k,
                                           const BasisEnumeration& basis) {
    ChaosExpansion out(basis.policy());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] == cplx{0.0}) continue;
        const MultiIndex& alpha = basis.alpha(static_cast<std::size_t>(i));
        out.set_coeff(alpha, v[i] / std::sqrt(weight(alpha, -k.value)));
    }
    return out;
}

/// Assemble the multiplier matrix of h on the policy box.
inline MultiplierMatrix assemble(const ChaosExpansion& h, WeightOrder k,
                                 const TruncationPolicy& policy) {
    for (const auto& [alpha, c] : h.terms())
        if (!policy.contains(alpha))
            throw PolicyError("assemble: multiplier term outside the requested policy");

    BasisEnumeration basis(policy);
    const auto n = static_cast<Eigen::Index>(basis.size());
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(h.term_count() * basis.size());
    for (Eigen::Index col = 0; col < n; ++col) {
        const MultiIndex& beta = basis.alpha(static_cast<std::size_t>(col));
        for (const auto& [delta, c] : h.terms()) {
            const MultiIndex gamma = beta + delta;
            const auto row = basis.index_of(gamma);
            if (!row) continue;  // compression: products leaving the box are cut
            triplets.emplace_back(static_cast<Eigen::Index>(*row), col,
                                  c * std::sqrt(weight(delta, -k.value)));
        }
    }

    if (n <= kDenseMatrixCap) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (const auto& t : triplets) m(t.row(), t.col()) += t.value();
        return {k, std::move(basis), std::move(m)};
    }
    Eigen::SparseMatrix<cplx> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return {k, std::move(basis), std::move(m)};
}

/// Matrix route for h <> u on the truncated box; coefficient-identical to
/// wick_product up to rounding in the diagonal basis change.
inline ChaosExpansion apply(const MultiplierMatrix& m, const ChaosExpansion& u) {
    return from_weighted_coords(m.apply(to_weighted_coords(u, m.order(), m.basis())),
                                m.order(), m.basis());
}

struct SigmaEstimate {
    double sigma = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Largest singular value via power iteration on Op* Op with a seeded start
/// vector; the Rayleigh-quotient sequence is non-decreasing so the returned
/// value is always a valid lower bound.
template <typename ApplyFn, typename AdjointFn>
SigmaEstimate power_iteration_sigma(Eigen::Index dim, ApplyFn&& apply_op, AdjointFn&& adjoint_op,
                                    double tol = 1e-10, int max_iter = kPowerIterationMaxIter,
                                    std::uint64_t seed = kPowerIterationSeed) {
    if (dim == 0) return {0.0, true, 0};
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(gauss(engine), gauss(engine));
    v.normalize();

    double lambda_prev = -1.0;
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXcd w = apply_op(v);
        lambda = w.squaredNorm();  // Rayleigh quotient of Op*Op at unit v
        if (lambda == 0.0) return {0.0, true, it};
        const Eigen::VectorXcd u = adjoint_op(w);
        const double nu = u.norm();
        if (nu == 0.0) return {std::sqrt(lambda), true, it};
        v = u / nu;
        if (lambda_prev >= 0.0 && std::abs(lambda - lambda_prev) <= tol * std::max(1.0, lambda))
            return {std::sqrt(lambda), true, it};
        lambda_prev = lambda;
    }
    return {std::sqrt(lambda), false, max_iter};
}

/// Largest singular value of the truncated multiplier matrix within tol, a
/// lower bound for the untruncated operator norm that is non-decreasing in
/// the truncation.  Falls back to a dense SVD for small sizes when the power
/// iteration stalls; beyond that the best bracket is reported.
inline double operator_norm(const MultiplierMatrix& m, double tol = 1e-10) {
    const auto est = power_iteration_sigma(
        m.size(), [&](const Eigen::VectorXcd& v) { return m.apply(v); },
        [&](const Eigen::VectorXcd& v) { return m.apply_adjoint(v); }, tol);
    if (est.converged) return est.sigma;
    if (m.size() <= kDenseSvdCap) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.to_dense());
        return svd.singularValues()(0);
    }
    std::ostringstream msg;
    msg << "operator_norm: power iteration did not converge in " << kPowerIterationMaxIter
        << " iterations; bracket [" << est.sigma << ", " << m.to_dense().norm()
        << "] (Frobenius upper bound)";
    throw ConvergenceError(msg.str());
}

/// Coordinate-list text dump for external inspection.  Header line
/// "B k J D nnz", then one "row col re im" line per stored entry in
/// row-major order.
inline std::string matrix_dump(const MultiplierMatrix& m) {
    std::ostringstream out;
    out.precision(17);
    std::vector<std::tuple<Eigen::Index, Eigen::Index, cplx>> entries;
    const Eigen::MatrixXcd d = m.to_dense();
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c)
            if (d(r, c) != cplx{0.0}) entries.emplace_back(r, c, d(r, c));
    out << m.size() << " " << m.order().value << " " << m.basis().policy().max_var << " "
        << m.basis().policy().max_degree << " " << entries.size() << "\n";
    for (const auto& [r, c, v] : entries)
        out << r << " " << c << " " << v.real() << " " << v.imag() << "\n";
    return out.str();
}

/// Adjoint of the Wick multiplier in the order-k inner product:
/// (T_h^* v)_beta = sum_delta conj(h_delta) v_{beta+delta} (2N)^{-k delta}.
inline ChaosExpansion adjoint_apply(const ChaosExpansion& h, const ChaosExpansion& v,
                                    WeightOrder k) {
    ChaosExpansion out(v.policy());
    for (const auto& [delta, hd] : h.terms()) {
        const double w = weight(delta, -k.value);
        for (const auto& [gamma, vg] : v.terms()) {
            const auto beta = gamma.minus(delta);
            if (!beta) continue;
            out.add_coeff(*beta, std::conj(hd) * vg * w);
        }
    }
    return out;
}

/// Multiplier-norm bound A(k-l) ||h||_l, valid for k > l + 1.
inline double vage_upper_bound(const ChaosExpansion& h, WeightOrder k, WeightOrder l,
                               double tol = 1e-12) {
    if (k.value <= l.value + 1) throw OrderError("vage_upper_bound: k > l + 1 required");
    return vage_constant(static_cast<double>(k.value - l.value), tol) * norm_k(h, l);
}

}  // namespace wicksys
