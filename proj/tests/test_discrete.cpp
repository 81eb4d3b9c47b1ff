#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "test_helpers.hpp"
#include "wicksys/discrete.hpp"

using namespace wicksys;
using wicksys::testing::max_coeff_distance;
using wicksys::testing::random_expansion;
using wicksys::testing::random_point;
using wicksys::testing::random_signal;

namespace {

DiscreteSignal deterministic_signal(const TruncationPolicy& p, int n_min,
                                    const std::vector<double>& taps) {
    std::vector<ChaosExpansion> samples;
    for (double t : taps) samples.push_back(ChaosExpansion::constant(p, t));
    return {p, n_min, std::move(samples)};
}

}  // namespace

TEST_CASE("unit impulse is the identity system") {
    const TruncationPolicy p(2, 3);
    std::mt19937_64 engine(101);
    const DiscreteSignal u = random_signal(p, engine, -2, 5);
    const DiscreteSignal delta = deterministic_signal(p, 0, {1.0});
    const DiscreteConvolution y = wick_convolve(delta, u);
    REQUIRE_FALSE(y.truncation_loss);
    REQUIRE(max_coeff_distance(y.signal, u) == 0.0);
}

TEST_CASE("deterministic signals reduce to the classical convolution") {
    const TruncationPolicy p(1, 0);
    std::mt19937_64 engine(103);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> h(4), u(6);
    for (auto& v : h) v = uni(engine);
    for (auto& v : u) v = uni(engine);
    const DiscreteSignal hs = deterministic_signal(p, -1, h);
    const DiscreteSignal us = deterministic_signal(p, 2, u);
    const DiscreteSignal y = wick_convolve(hs, us).signal;
    for (int n = y.n_min(); n <= y.n_max(); ++n) {
        double expected = 0.0;
        for (int m = 0; m < static_cast<int>(u.size()); ++m) {
            const int hi = n - (m + 2) - (-1);
            if (hi >= 0 && hi < static_cast<int>(h.size())) expected += h[hi] * u[m];
        }
        REQUIRE(std::abs(y.at(n).coeff(MultiIndex{}) - expected) < 1e-14);
    }
}

TEST_CASE("wick convolution agrees with the coefficientwise double-sum oracle") {
    const TruncationPolicy p(3, 4);
    std::mt19937_64 engine(107);
    for (int trial = 0; trial < 40; ++trial) {
        const DiscreteSignal h = random_signal(p, engine, -1 + (trial % 3), 1 + trial % 5, 0.3);
        const DiscreteSignal u = random_signal(p, engine, -2, 1 + trial % 7, 0.3);
        const DiscreteConvolution y = wick_convolve(h, u);
        const DiscreteSignal oracle = double_convolution_oracle(h, u);
        REQUIRE(max_coeff_distance(y.signal, oracle) < 1e-13);
    }
}

TEST_CASE("convolution with the zero signal is zero") {
    const TruncationPolicy p(2, 2);
    std::mt19937_64 engine(109);
    const DiscreteSignal h = random_signal(p, engine, 0, 3);
    const DiscreteSignal zero(p);
    REQUIRE(wick_convolve(h, zero).signal.empty());
    REQUIRE(double_convolution_oracle(h, zero).empty());
}

TEST_CASE("single-term impulse shifts coefficients") {
    const TruncationPolicy p(2, 3);
    const MultiIndex beta0 = MultiIndex::unit(1);
    const DiscreteSignal h(p, 0, {ChaosExpansion::basis_term(p, beta0)});
    std::mt19937_64 engine(113);
    const DiscreteSignal u = random_signal(p, engine, 0, 4, 0.5);
    const DiscreteSignal y = double_convolution_oracle(h, u);
    const BasisEnumeration basis(p);
    for (int n = u.n_min(); n <= u.n_max(); ++n)
        for (const MultiIndex& alpha : basis.all()) {
            const auto diff = alpha.minus(beta0);
            const cplx expected = diff ? u.at(n).coeff(*diff) : cplx(0.0);
            REQUIRE(std::abs(y.at(n).coeff(alpha) - expected) < 1e-14);
        }
}

TEST_CASE("time invariance: shifting the input shifts the output") {
    const TruncationPolicy p(2, 3);
    std::mt19937_64 engine(127);
    const DiscreteSignal h = random_signal(p, engine, 0, 3, 0.5);
    const DiscreteSignal u = random_signal(p, engine, -1, 4, 0.5);
    const DiscreteSignal y = wick_convolve(h, u).signal;
    const DiscreteSignal y_shift = wick_convolve(h, u.shifted(1)).signal;
    REQUIRE(max_coeff_distance(y.shifted(1), y_shift) == 0.0);
}

TEST_CASE("transfer function evaluation and the convolution theorem") {
    const TruncationPolicy p(2, 2);
    const TruncationPolicy big(2, 4);
    std::mt19937_64 engine(131);

    // trivial transfer function
    const TransferFunction one = TransferFunction::from_signal(deterministic_signal(p, 0, {1.0}));
    REQUIRE(std::abs(transfer_eval(one, cplx(0.3, 0.2), random_point(2, engine, 0.4)) - 1.0) <
            1e-15);

    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteSignal h = random_signal(p, engine, 0, 3, 0.25).embedded(big);
        const DiscreteSignal u = random_signal(p, engine, 0, 3, 0.25).embedded(big);
        const DiscreteConvolution y = wick_convolve(h, u);
        REQUIRE_FALSE(y.truncation_loss);
        const cplx zeta(0.4, -0.2);
        const EvaluationPoint z = random_point(2, engine, 0.3);
        const cplx lhs = zeta_transform(y.signal, zeta, z);
        const cplx rhs = zeta_transform(h, zeta, z) * zeta_transform(u, zeta, z);
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("transfer function at z = 0 is the deterministic part") {
    const TruncationPolicy p(2, 2);
    std::mt19937_64 engine(137);
    const DiscreteSignal h = random_signal(p, engine, 0, 4, 0.6);
    const cplx zeta(0.25, 0.1);
    cplx expected = 0.0;
    cplx zp = 1.0;
    for (int n = 0; n <= h.n_max(); ++n) {
        expected += zp * h.at(n).coeff(MultiIndex{});
        zp *= zeta;
    }
    const cplx got = transfer_eval(TransferFunction::from_signal(h), zeta, EvaluationPoint{});
    REQUIRE(std::abs(got - expected) < 1e-13);
}

TEST_CASE("bibo sufficient bound on deterministic fixtures") {
    const TruncationPolicy p(1, 0);
    const WeightOrder k(4), l(2);
    std::vector<double> taps;
    for (int n = -10; n <= 10; ++n) taps.push_back(std::pow(2.0, -std::abs(n)));
    const DiscreteSignal h = deterministic_signal(p, -10, taps);
    const StabilityReport rep = bibo_sufficient(h, k, l, 1e-12);
    const double a2 = vage_constant(2.0, 1e-12);
    REQUIRE(rep.verdict == Verdict::certified);
    REQUIRE(*rep.upper_bound == Catch::Approx((3.0 - std::pow(2.0, -9.0)) * a2).epsilon(1e-12));

    const DiscreteSignal impulse = deterministic_signal(p, 0, {-2.5});
    REQUIRE(*bibo_sufficient(impulse, k, l).upper_bound == Catch::Approx(2.5 * a2));

    REQUIRE_THROWS_AS(bibo_sufficient(h, WeightOrder(3), WeightOrder(2), 1e-9), OrderError);
}

TEST_CASE("bibo probe recovers the classical sum for deterministic taps") {
    const TruncationPolicy p(2, 2);
    const WeightOrder k(4);
    const DiscreteSignal h = deterministic_signal(p, -1, {0.5, -1.25, 2.0});
    const double classical = 0.5 + 1.25 + 2.0;
    const auto probes = make_probe_set(h.samples(), k, p, 4, 404);
    const StabilityReport rep = bibo_probe(h, k, probes);
    REQUIRE(*rep.lower_bound == Catch::Approx(classical).epsilon(1e-12));
    REQUIRE(rep.witness.has_value());
}

TEST_CASE("bibo probe on a single random tap against hand arithmetic") {
    const TruncationPolicy p(1, 2);
    const WeightOrder k(3);
    const DiscreteSignal h(p, 0, {ChaosExpansion::basis_term(p, MultiIndex::unit(1))});
    const ChaosExpansion probe = ChaosExpansion::basis_term(p, MultiIndex::unit(1, 2));
    const StabilityReport rep = bibo_probe(h, k, {probe});
    // T^*(H_{2 e1}/||.||) = 2^{-k} ||H_{e1}||/||H_{2 e1}|| = 2^{-k/2}
    REQUIRE(*rep.lower_bound == Catch::Approx(std::pow(2.0, -k.value / 2.0)).epsilon(1e-12));
}

TEST_CASE("bibo probe lower bound never exceeds the sufficient upper bound") {
    const TruncationPolicy p(2, 3);
    const WeightOrder k(4), l(2);
    std::mt19937_64 engine(139);
    for (int trial = 0; trial < 25; ++trial) {
        const DiscreteSignal h = random_signal(p, engine, -2, 4, 0.4);
        const auto probes = make_probe_set(h.samples(), k, p, 6, 1000 + trial);
        const double lower = *bibo_probe(h, k, probes).lower_bound;
        const double upper = *bibo_sufficient(h, k, l).upper_bound;
        REQUIRE(lower <= upper + 1e-9);
    }
}

TEST_CASE("l1l2 certificate constants") {
    const TruncationPolicy p(1, 0);
    const WeightOrder k(4), l(2);
    const double a2 = vage_constant(2.0, 1e-12);

    std::vector<double> taps;
    const int n_max = 4000;
    for (int n = 0; n <= n_max; ++n) taps.push_back(1.0 / (n + 1.0));
    const StabilityReport rep = l1l2_certify(deterministic_signal(p, 0, taps), k, l, 1e-12);
    // Basel sum: transfer energy tends to pi/sqrt(6); the truncation tail of
    // sum 1/(n+1)^2 is below 1/(n_max+1)
    const double basel = std::numbers::pi / std::sqrt(6.0);
    const double reported = rep.parameters.at("transfer_norm_l").get<double>();
    REQUIRE(reported < basel);
    REQUIRE(basel * basel - reported * reported < 1.0 / (n_max + 1.0));
    REQUIRE(*rep.upper_bound == Catch::Approx(a2 * reported));

    const StabilityReport unit = l1l2_certify(deterministic_signal(p, 0, {1.0}), k, l);
    REQUIRE(*unit.upper_bound == Catch::Approx(a2));

    REQUIRE_THROWS_AS(l1l2_certify(deterministic_signal(p, -1, {1.0, 1.0}), k, l),
                      std::invalid_argument);
}

TEST_CASE("l1l2 bound is honored by simulation") {
    const TruncationPolicy p(2, 2);
    const TruncationPolicy big(2, 4);
    const WeightOrder k(4), l(2);
    std::mt19937_64 engine(149);
    for (int trial = 0; trial < 20; ++trial) {
        const DiscreteSignal h = random_signal(p, engine, 0, 1 + trial % 8, 0.4).embedded(big);
        const DiscreteSignal u = random_signal(p, engine, 0, 1 + trial % 5, 0.4).embedded(big);
        const double m_const = *l1l2_certify(h, k, l).upper_bound;
        const DiscreteSignal y = wick_convolve(h, u).signal;
        double out_energy = 0.0;
        for (int n = y.n_min(); !y.empty() && n <= y.n_max(); ++n) {
            const double nn = norm_k(y.at(n), k);
            out_energy += nn * nn;
        }
        double in_sum = 0.0;
        for (int n = u.n_min(); n <= u.n_max(); ++n) in_sum += norm_k(u.at(n), k);
        REQUIRE(std::sqrt(out_energy) <= m_const * in_sum + 1e-9);
    }
}

TEST_CASE("dissipativity of scaled identity impulses") {
    const TruncationPolicy p(2, 2);
    const WeightOrder k(4);

    const StabilityReport inside =
        dissipativity_check(deterministic_signal(p, 0, {0.75}), k, p, 16, 1e-9);
    REQUIRE(inside.verdict == Verdict::certified);
    REQUIRE(*inside.lower_bound == Catch::Approx(0.75));
    REQUIRE(*inside.upper_bound == Catch::Approx(0.75));

    const StabilityReport edge =
        dissipativity_check(deterministic_signal(p, 0, {1.0}), k, p, 8, 1e-9);
    REQUIRE(edge.verdict == Verdict::certified);

    const StabilityReport outside =
        dissipativity_check(deterministic_signal(p, 0, {1.5}), k, p, 8, 1e-9);
    REQUIRE(outside.verdict == Verdict::refuted);
    REQUIRE(outside.witness.has_value());
    // the witness input really gains energy through the system
    const DiscreteSignal witness =
        discrete_signal_from_json(outside.witness->at("input"));
    const DiscreteSignal y = wick_convolve(deterministic_signal(p, 0, {1.5}), witness).signal;
    double in_e = 0.0, out_e = 0.0;
    for (int n = witness.n_min(); n <= witness.n_max(); ++n)
        in_e += norm_k(witness.at(n), k) * norm_k(witness.at(n), k);
    for (int n = y.n_min(); n <= y.n_max(); ++n)
        out_e += norm_k(y.at(n), k) * norm_k(y.at(n), k);
    REQUIRE(out_e > in_e);
}

TEST_CASE("dissipativity of the two-tap averaging system approaches the symbol bound") {
    const TruncationPolicy p(1, 0);
    const WeightOrder k(2);
    const DiscreteSignal h = deterministic_signal(p, 0, {0.5, 0.5});
    const StabilityReport rep = dissipativity_check(h, k, p, 64, 1e-9);
    REQUIRE(rep.verdict == Verdict::certified);  // tap bounds sum to exactly 1
    // truncated singular value cos(pi/(2 N + 1)) tends to sup |(1+zeta)/2| = 1
    REQUIRE(*rep.lower_bound == Catch::Approx(std::cos(std::numbers::pi / 129.0)).margin(1e-10));
    REQUIRE(*rep.lower_bound < 1.0);
}

TEST_CASE("random dissipativity reports keep lower below upper") {
    const TruncationPolicy p(2, 2);
    const WeightOrder k(4);
    std::mt19937_64 engine(151);
    for (int trial = 0; trial < 10; ++trial) {
        const DiscreteSignal h = random_signal(p, engine, 0, 3, 0.4);
        const StabilityReport rep = dissipativity_check(h, k, p, 8, 1e-9);
        REQUIRE(rep.lower_bound.has_value());
        REQUIRE(rep.upper_bound.has_value());
        REQUIRE(*rep.lower_bound <= *rep.upper_bound + 1e-9);
        if (rep.verdict == Verdict::certified) REQUIRE(*rep.upper_bound <= 1.0 + 1e-12);
        if (rep.verdict == Verdict::refuted) REQUIRE(*rep.lower_bound > 1.0);
    }
}

TEST_CASE("certified dissipativity is honored by simulation") {
    const TruncationPolicy p(2, 2);
    const WeightOrder k(4);
    std::mt19937_64 engine(512);
    for (int trial = 0; trial < 5; ++trial) {
        DiscreteSignal raw = random_signal(p, engine, 0, 3, 0.4);
        const double bound = *dissipativity_check(raw, k, p, 8, 1e-9).upper_bound;
        std::vector<ChaosExpansion> scaled;
        for (const auto& s : raw.samples()) scaled.push_back(s.scaled(0.9 / bound));
        const DiscreteSignal h(p, 0, scaled);
        const StabilityReport rep = dissipativity_check(h, k, p, 8, 1e-9);
        REQUIRE(rep.verdict == Verdict::certified);
        for (int input_trial = 0; input_trial < 5; ++input_trial) {
            const DiscreteSignal u = random_signal(p, engine, 0, 4, 0.5);
            const DiscreteSignal y = wick_convolve(h, u).signal;
            double in_e = 0.0, out_e = 0.0;
            for (int n = u.n_min(); n <= u.n_max(); ++n)
                in_e += norm_k(u.at(n), k) * norm_k(u.at(n), k);
            for (int n = y.n_min(); !y.empty() && n <= y.n_max(); ++n)
                out_e += norm_k(y.at(n), k) * norm_k(y.at(n), k);
            REQUIRE(out_e <= (1.0 + 1e-9) * in_e);
        }
    }
}

TEST_CASE("transfer evaluation at zeta = 0") {
    const TruncationPolicy p(1, 1);
    std::map<int, ChaosExpansion> causal_taps;
    causal_taps.emplace(0, ChaosExpansion::constant(p, 3.0));
    causal_taps.emplace(2, ChaosExpansion::constant(p, 5.0));
    REQUIRE(std::abs(transfer_eval(TransferFunction(p, std::move(causal_taps)), cplx(0.0),
                                   EvaluationPoint{}) -
                     3.0) < 1e-15);

    std::map<int, ChaosExpansion> anticausal;
    anticausal.emplace(-1, ChaosExpansion::constant(p, 1.0));
    REQUIRE_THROWS_AS(
        transfer_eval(TransferFunction(p, std::move(anticausal)), cplx(0.0), EvaluationPoint{}),
        std::invalid_argument);
}

TEST_CASE("rational expansion rejects more variables than the policy") {
    RationalSpec spec;
    spec.d.coeffs = {Eigen::MatrixXcd::Zero(1, 1)};
    spec.c.coeffs = {Eigen::MatrixXcd::Zero(1, 1)};
    spec.a = {PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}},
              PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}}};
    spec.b = {PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}},
              PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}}};
    REQUIRE_THROWS_AS(rational_expand(spec, cplx(0.0), TruncationPolicy(1, 2), 0.1), PolicyError);
}

TEST_CASE("dissipativity size cap") {
    const TruncationPolicy p(3, 4);  // basis 35
    REQUIRE_THROWS_AS(
        dissipativity_check(deterministic_signal(p, 0, {1.0}), WeightOrder(2), p, 1 << 14, 1e-9),
        CapacityError);
}

TEST_CASE("schur kernel gram positivity for constant multipliers") {
    const TruncationPolicy p(2, 6);
    const WeightOrder k(2);
    std::mt19937_64 engine(157);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    const auto sample_points = [&](int count) {
        std::vector<TransferPoint> pts;
        for (int i = 0; i < count; ++i)
            pts.push_back({0.6 * cplx(uni(engine), uni(engine)), random_point(2, engine, 0.05)});
        return pts;
    };

    const auto constant_transfer = [&](cplx c) {
        std::map<int, ChaosExpansion> coeffs;
        coeffs.emplace(0, ChaosExpansion::constant(p, c));
        return TransferFunction(p, std::move(coeffs));
    };

    const auto pts = sample_points(20);
    double trace_scale = 0.0;
    for (const auto& pt : pts)
        trace_scale += std::abs(kernel_K(pt.z, pt.z, k, p).value) / (1.0 - std::norm(pt.zeta));

    REQUIRE(schur_kernel_gram(constant_transfer(0.9), pts, k, p) >= -1e-10 * trace_scale);
    REQUIRE(schur_kernel_gram(constant_transfer(cplx(0.0, 1.0)), pts, k, p) >=
            -1e-10 * trace_scale);
    REQUIRE(schur_kernel_gram(constant_transfer(1.1), pts, k, p) < 0.0);

    // multiplication by zeta is inner: the gram stays positive
    std::map<int, ChaosExpansion> shift;
    shift.emplace(1, ChaosExpansion::constant(p, 1.0));
    REQUIRE(schur_kernel_gram(TransferFunction(p, std::move(shift)), pts, k, p) >=
            -1e-10 * trace_scale);

    std::vector<TransferPoint> bad = {{cplx(1.5, 0.0), EvaluationPoint{}}};
    REQUIRE_THROWS_AS(schur_kernel_gram(constant_transfer(0.5), bad, k, p),
                      std::invalid_argument);
}

TEST_CASE("schur kernel gram in the half-plane variant") {
    const TruncationPolicy p(2, 6);
    const WeightOrder k(2);
    std::mt19937_64 engine(163);
    std::uniform_real_distribution<double> uni(0.2, 2.0);
    std::vector<TransferPoint> pts;
    for (int i = 0; i < 10; ++i)
        pts.push_back({cplx(uni(engine) - 1.0, uni(engine)), random_point(2, engine, 0.05)});

    std::map<int, ChaosExpansion> coeffs;
    coeffs.emplace(0, ChaosExpansion::constant(p, 0.8));
    const TransferFunction h8(p, std::move(coeffs));
    REQUIRE(schur_kernel_gram(h8, pts, k, p, KernelDomain::half_plane) >= -1e-10);

    std::map<int, ChaosExpansion> coeffs2;
    coeffs2.emplace(0, ChaosExpansion::constant(p, 1.2));
    const TransferFunction h12(p, std::move(coeffs2));
    REQUIRE(schur_kernel_gram(h12, pts, k, p, KernelDomain::half_plane) < 0.0);

    std::vector<TransferPoint> bad = {{cplx(0.0, -0.5), EvaluationPoint{}}};
    REQUIRE_THROWS_AS(schur_kernel_gram(h8, bad, k, p, KernelDomain::half_plane),
                      std::invalid_argument);
}

TEST_CASE("realization identity for shift and random multipliers") {
    const TruncationPolicy p(2, 4);
    std::mt19937_64 engine(167);

    // S(zeta, z) = zeta s1(z): only the n = 1 tap survives the chain
    std::map<int, ChaosExpansion> one_tap;
    one_tap.emplace(1, random_expansion(TruncationPolicy(2, 2), engine).embedded(p));
    REQUIRE(realization_verify(TransferFunction(p, std::move(one_tap)), p, 5, 1e-12));

    for (int trial = 0; trial < 10; ++trial) {
        std::map<int, ChaosExpansion> taps;
        for (int n = 0; n < 4; ++n)
            taps.emplace(n, random_expansion(TruncationPolicy(2, 2), engine, 0.5).embedded(p));
        REQUIRE(realization_verify(TransferFunction(p, std::move(taps)), p, 6, 1e-12));
    }
}

TEST_CASE("rational expansion without state feedback is affine") {
    const TruncationPolicy p(2, 3);
    RationalSpec spec;
    spec.d.coeffs = {Eigen::MatrixXcd::Constant(1, 1, cplx(2.0, 0.5)),
                     Eigen::MatrixXcd::Constant(1, 1, cplx(0.0, 1.0))};  // 2+0.5i + i zeta
    spec.c.coeffs = {Eigen::MatrixXcd::Constant(1, 1, 3.0)};
    spec.a = {PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}},
              PolynomialMatrix{{Eigen::MatrixXcd::Zero(1, 1)}}};
    spec.b = {PolynomialMatrix{{Eigen::MatrixXcd::Constant(1, 1, 0.5)}},
              PolynomialMatrix{{Eigen::MatrixXcd::Constant(1, 1, -1.0)}}};
    const cplx zeta(0.3, -0.4);
    const ChaosExpansion f = rational_expand(spec, zeta, p, 0.5);
    REQUIRE(f.term_count() == 3);
    REQUIRE(std::abs(f.coeff(MultiIndex{}) - (cplx(2.0, 0.5) + cplx(0.0, 1.0) * zeta)) < 1e-14);
    REQUIRE(std::abs(f.coeff(MultiIndex::unit(1)) - cplx(1.5)) < 1e-14);
    REQUIRE(std::abs(f.coeff(MultiIndex::unit(2)) - cplx(-3.0)) < 1e-14);
}

TEST_CASE("scalar rational expansion is the geometric series") {
    const TruncationPolicy p(1, 6);
    const double a = 0.4, b = 1.5, c = 2.0, d = -1.0;
    RationalSpec spec;
    spec.d.coeffs = {Eigen::MatrixXcd::Constant(1, 1, d)};
    spec.c.coeffs = {Eigen::MatrixXcd::Constant(1, 1, c)};
    spec.a = {PolynomialMatrix{{Eigen::MatrixXcd::Constant(1, 1, a)}}};
    spec.b = {PolynomialMatrix{{Eigen::MatrixXcd::Constant(1, 1, b)}}};
    const ChaosExpansion f = rational_expand(spec, cplx(0.0), p, 1.0);
    REQUIRE(std::abs(f.coeff(MultiIndex{}) - d) < 1e-14);
    for (int n = 1; n <= 6; ++n)
        REQUIRE(std::abs(f.coeff(MultiIndex::unit(1, n)) - c * std::pow(a, n - 1) * b) < 1e-12);

    // Neumann precondition
    REQUIRE_THROWS_AS(rational_expand(spec, cplx(0.0), p, 3.0), DivergenceError);
}

TEST_CASE("rational expansion matches the dense linear-solve oracle at points") {
    const TruncationPolicy p(2, 7);
    std::mt19937_64 engine(173);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    const int n_state = 3;
    const auto rand_mat = [&](int r, int cdim) {
        Eigen::MatrixXcd m(r, cdim);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < cdim; ++j) m(i, j) = cplx(uni(engine), uni(engine));
        return m;
    };
    RationalSpec spec;
    spec.d.coeffs = {rand_mat(1, 1), rand_mat(1, 1)};
    spec.c.coeffs = {rand_mat(1, n_state)};
    spec.a = {PolynomialMatrix{{0.4 * rand_mat(n_state, n_state)}},
              PolynomialMatrix{{0.4 * rand_mat(n_state, n_state), 0.2 * rand_mat(n_state, n_state)}}};
    spec.b = {PolynomialMatrix{{rand_mat(n_state, 1)}}, PolynomialMatrix{{rand_mat(n_state, 1)}}};

    const cplx zeta(0.2, 0.3);
    const double radius = 0.02;
    const ChaosExpansion f = rational_expand(spec, zeta, p, radius);
    for (int trial = 0; trial < 20; ++trial) {
        const EvaluationPoint z = random_point(2, engine, radius);
        Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(n_state, n_state);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n_state, 1);
        for (int v = 0; v < 2; ++v) {
            x -= z.at(v + 1) * spec.a[static_cast<std::size_t>(v)].eval(zeta);
            rhs += z.at(v + 1) * spec.b[static_cast<std::size_t>(v)].eval(zeta);
        }
        const cplx direct = spec.d.eval(zeta)(0, 0) +
                            (spec.c.eval(zeta) * x.partialPivLu().solve(rhs))(0, 0);
        REQUIRE(std::abs(hermite_transform_eval(f, z) - direct) <= 1e-10);
    }
}
