// Copyright 2026 The mmsvae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmsvae/numerics/distributions.hpp"
#include "mmsvae/numerics/grad_check.hpp"
#include "mmsvae/numerics/layers.hpp"
#include "mmsvae/numerics/rng.hpp"

namespace mmsvae {
namespace {

TEST(Rng, StreamIsPureFunctionOfSeedAndCounter) {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    RngStream c(42, 50);
    RngStream d(42);
    for (int i = 0; i < 50; ++i) d.next_u64();
    EXPECT_EQ(c.next_u64(), d.next_u64());
}

TEST(Rng, NormalConsumesTwoDraws) {
    RngStream r(1);
    r.normal();
    EXPECT_EQ(r.counter(), 2u);
    r.standard_normal(3, 2);
    EXPECT_EQ(r.counter(), 14u);
}

TEST(Rng, UniformIndexStaysInRange) {
    RngStream r(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[r.uniform_index(7)];
    for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(Rng, DerivedStreamsDiffer) {
    EXPECT_NE(RngStream::derive(0, 1, 2).next_u64(), RngStream::derive(0, 2, 1).next_u64());
    EXPECT_EQ(RngStream::derive(5, 1, 2).next_u64(), RngStream::derive(5, 1, 2).next_u64());
}

TEST(Kl, MatchesMonteCarloEstimate) {
    GaussianPosterior<double> post{Matrix(2, 1), Matrix(2, 1)};
    post.mu << 0.7, -1.2;
    post.sigma << 0.5, 1.8;
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n(0, 1);
    double acc = 0.0;
    const int samples = 200000;
    for (int s = 0; s < samples; ++s)
        for (int d = 0; d < 2; ++d) {
            const double e = n(gen), z = post.mu(d, 0) + post.sigma(d, 0) * e;
            acc += -std::log(post.sigma(d, 0)) - 0.5 * e * e + 0.5 * z * z;
        }
    EXPECT_NEAR(kl_std_normal(post), acc / samples, 0.02 * kl_std_normal(post));
}

TEST(Kl, ZeroAtStandardNormal) {
    GaussianPosterior<double> post{Matrix::Zero(3, 2), Matrix::Ones(3, 2)};
    EXPECT_DOUBLE_EQ(kl_std_normal(post), 0.0);
}

TEST(Kl, GradientMatchesFiniteDifferences) {
    GaussianPosterior<double> post{Matrix(2, 1), Matrix(2, 1)};
    post.mu << 0.3, -0.9;
    post.sigma << 0.8, 1.4;
    const auto g = kl_std_normal_grad(post);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
        auto up = post, down = post;
        up.mu(d, 0) += h;
        down.mu(d, 0) -= h;
        EXPECT_NEAR(g.mu(d, 0), (kl_std_normal(up) - kl_std_normal(down)) / (2 * h), 1e-7);
        up = post;
        down = post;
        up.sigma(d, 0) += h;
        down.sigma(d, 0) -= h;
        EXPECT_NEAR(g.sigma(d, 0), (kl_std_normal(up) - kl_std_normal(down)) / (2 * h), 1e-7);
    }
}

TEST(Kl, RejectsNonFinitePosterior) {
    GaussianPosterior<double> post{Matrix::Zero(1, 1), Matrix::Constant(1, 1, std::nan(""))};
    EXPECT_THROW(kl_std_normal(post), NumericDomainError);
}

TEST(Multinomial, LoglikMatchesExtendedPrecision) {
    Matrix logits(5, 2);
    logits << 700.0, -3.0, 699.5, 2.0, -40.0, 0.1, 698.0, 0.0, 1.0, 5.0;
    Matrix targets(5, 2);
    targets << 1, 0, 0, 1, 1, 0, 0, 1, 1, 1;
    long double expected = 0.0L;
    for (int j = 0; j < 2; ++j) {
        long double mx = -1e300L, se = 0.0L;
        for (int i = 0; i < 5; ++i) mx = std::max<long double>(mx, logits(i, j));
        for (int i = 0; i < 5; ++i) se += std::exp(static_cast<long double>(logits(i, j)) - mx);
        for (int i = 0; i < 5; ++i) expected += targets(i, j) * (logits(i, j) - mx - std::log(se));
    }
    const double got = multinomial_loglik(logits, targets);
    EXPECT_TRUE(std::isfinite(got));
    EXPECT_NEAR(got, static_cast<double>(expected), 1e-9 * std::abs(static_cast<double>(expected)));
}

TEST(Multinomial, GradientMatchesFiniteDifferences) {
    Matrix logits(4, 1);
    logits << 0.2, -1.0, 0.5, 2.0;
    Matrix targets(4, 1);
    targets << 1, 0, 1, 0;
    const Matrix g = multinomial_loglik_grad(logits, targets);
    for (int i = 0; i < 4; ++i) {
        Matrix up = logits, down = logits;
        up(i, 0) += 1e-6;
        down(i, 0) -= 1e-6;
        EXPECT_NEAR(g(i, 0), (multinomial_loglik(up, targets) - multinomial_loglik(down, targets)) / 2e-6, 1e-7);
    }
}

TEST(Dropout, KeepsExpectedMass) {
    RngStream rng(9);
    const Matrix x = Matrix::Ones(200, 200);
    const Matrix y = dropout(x, 0.4, rng, true);
    EXPECT_NEAR(y.mean(), 1.0, 0.02);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        EXPECT_TRUE(y.data()[i] == 0.0 || std::abs(y.data()[i] - 1.0 / 0.6) < 1e-15);
}

TEST(Dropout, IdentityOutsideTrainingAndDrawsNothing) {
    RngStream rng(9);
    const Matrix x = Matrix::Random(4, 3);
    EXPECT_EQ(dropout(x, 0.5, rng, false), x);
    EXPECT_EQ(dropout(x, 0.0, rng, true), x);
    EXPECT_EQ(rng.counter(), 0u);
    EXPECT_THROW(dropout(x, 1.0, rng, true), ConfigError);
}

TEST(NormalizeColumns, UnitNormAndZeroColumnsKept) {
    Matrix x(3, 2);
    x << 3, 0, 4, 0, 0, 0;
    const Matrix y = normalize_columns(x);
    EXPECT_DOUBLE_EQ(y.col(0).norm(), 1.0);
    EXPECT_DOUBLE_EQ(y.col(1).norm(), 0.0);
}

TEST(Mlp2, ForwardMatchesHandComputation) {
    ParamStore store;
    add_mlp2_params(store, "net", 2, 2, 1);
    store["net.w1"] << 1.0, -1.0, 0.5, 2.0;
    store["net.b1"] << 0.1, -0.2;
    store["net.w2"] << 3.0, -1.0;
    store["net.b2"] << 0.25;
    Matrix x(2, 1);
    x << 0.4, 0.3;
    const double h0 = std::tanh(0.4 - 0.3 + 0.1), h1 = std::tanh(0.2 + 0.6 - 0.2);
    EXPECT_NEAR(mlp2_forward(mlp2_view(store, "net"), x)(0, 0), 3 * h0 - h1 + 0.25, 1e-15);
    Matrix bad(3, 1);
    EXPECT_THROW(mlp2_forward(mlp2_view(store, "net"), bad), ShapeError);
}

TEST(Mlp2, BackwardPassesGradCheck) {
    ParamStore store;
    add_mlp2_params(store, "net", 3, 4, 2);
    RngStream rng(4);
    for (std::size_t i = 0; i < store.size(); ++i) store.at(i) = rng.standard_normal(store.at(i).rows(), store.at(i).cols());
    const Matrix x = rng.standard_normal(3, 5);
    const Matrix w = rng.standard_normal(2, 5);
    auto loss = [&](const ParamStore& p) {
        return static_cast<double>(mlp2_forward(mlp2_view(p, "net"), x).cwiseProduct(w).sum());
    };
    ParamStore grads = store.zeros_like();
    Mlp2Cache<double> cache;
    mlp2_forward(mlp2_view(store, "net"), x, &cache);
    const auto g = mlp2_grads(grads, "net");
    mlp2_backward(mlp2_view(store, "net"), cache, w, &g);
    const auto report = grad_check(std::function<double(const ParamStore&)>(loss), store, grads);
    EXPECT_LT(report.max_rel_error, 1e-6) << report.worst_param;
}

TEST(ParamStore, RejectsDuplicatesAndLayoutMismatch) {
    ParamStore a;
    a.add("x", Matrix::Zero(2, 2));
    EXPECT_THROW(a.add("x", Matrix::Zero(1, 1)), ConfigError);
    ParamStore b;
    b.add("x", Matrix::Zero(2, 3));
    EXPECT_FALSE(a.same_layout(b));
    EXPECT_THROW(a += b, ShapeError);
}

}  // namespace
}  // namespace mmsvae
