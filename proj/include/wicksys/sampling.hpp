#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "wicksys/chaos.hpp"

namespace wicksys {

/// Probabilists' Hermite polynomial h_n (h_0 = 1, h_1 = x,
/// h_{n+1} = x h_n - n h_{n-1}).
inline double hermite_poly(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_poly: negative degree");
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = x;
    for (int m = 1; m < n; ++m) {
        const double next = x * cur - m * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// One joint draw of the Gaussian coordinates x_1..x_dim.
struct GaussianSample {
    std::vector<double> x;
    std::uint64_t seed = 0;

    static GaussianSample draw(int dim, std::uint64_t seed) {
        std::mt19937_64 engine(seed);
        std::normal_distribution<double> gauss;
        GaussianSample out;
        out.seed = seed;
        out.x.resize(dim);
        for (double& v : out.x) v = gauss(engine);
        return out;
    }
};

/// Sequential stream of Gaussian samples from one seeded engine.
class GaussianStream {
public:
    GaussianStream(int dim, std::uint64_t seed) : dim_(dim), engine_(seed) {}

    GaussianSample next() {
        GaussianSample out;
        out.x.resize(dim_);
        for (double& v : out.x) v = gauss_(engine_);
        return out;
    }

private:
    int dim_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_;
};

/// H_alpha realized for sampling as prod_j h_{alpha_j}(x_j); orthogonal with
/// E[H_alpha H_beta] = delta_{alpha beta} alpha! under i.i.d. standard
/// normal coordinates.
inline double eval_hermite_functional(const MultiIndex& alpha, const GaussianSample& sample) {
    if (alpha.max_var() > static_cast<int>(sample.x.size()))
        throw std::invalid_argument("eval_hermite_functional: sample shorter than the multi-index");
    double prod = 1.0;
    for (const auto& [var, exp] : alpha.entries())
        prod *= hermite_poly(exp, sample.x[var - 1]);
    return prod;
}

/// Pointwise evaluation sum c_alpha H_alpha(x).
inline cplx eval_at_sample(const ChaosExpansion& f, const GaussianSample& sample) {
    cplx s = 0.0;
    for (const auto& [alpha, c] : f.terms()) s += c * eval_hermite_functional(alpha, sample);
    return s;
}

struct McMoment {
    cplx mean;
    double std_error = 0.0;
    long samples = 0;
};

/// Monte Carlo estimate of E[f(x) conj(g(x))] over n Gaussian draws; the
/// second factor enters conjugated so the exact value is
/// sum_alpha alpha! f_alpha conj(g_alpha).
inline McMoment mc_moment(const ChaosExpansion& f, const ChaosExpansion& g, long n,
                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("mc_moment: need at least one sample");
    const int dim = std::max(f.max_var(), g.max_var());
    GaussianStream stream(dim, seed);
    cplx sum = 0.0;
    double sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const GaussianSample x = stream.next();
        const cplx v = eval_at_sample(f, x) * std::conj(eval_at_sample(g, x));
        sum += v;
        sum_sq += std::norm(v);
    }
    McMoment out;
    out.samples = n;
    out.mean = sum / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - n * std::norm(out.mean)) / (n - 1.0));
        out.std_error = std::sqrt(var / n);
    }
    return out;
}

}  // namespace wicksys
