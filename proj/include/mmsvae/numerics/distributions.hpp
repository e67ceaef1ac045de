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

#pragma once

#include <cmath>

#include "mmsvae/numerics/rng.hpp"
#include "mmsvae/numerics/types.hpp"

namespace mmsvae {

// Diagonal Gaussian, one column per user.
template <typename Scalar>
struct GaussianPosterior {
    MatrixX<Scalar> mu;
    MatrixX<Scalar> sigma;

    Eigen::Index dim() const { return mu.rows(); }
    Eigen::Index batch() const { return mu.cols(); }
};

template <typename Scalar>
void require_finite(const GaussianPosterior<Scalar>& post) {
    if (!post.mu.allFinite() || !post.sigma.allFinite())
        throw NumericDomainError("gaussian posterior has non-finite parameters");
}

enum class SampleMode { Stochastic, Mean };

// z = mu + eps * sigma for a given noise matrix.
template <typename Scalar>
MatrixX<Scalar> reparameterize(const GaussianPosterior<Scalar>& post, const MatrixX<Scalar>& eps) {
    require_shape(eps.rows() == post.mu.rows() && eps.cols() == post.mu.cols(),
                  "reparameterize: noise shape mismatch");
    return post.mu + eps.cwiseProduct(post.sigma);
}

// Stochastic mode requires sigma > 0; mean mode returns mu exactly and
// accepts sigma == 0.
template <typename Scalar>
MatrixX<Scalar> sample_gaussian(const GaussianPosterior<Scalar>& post, RngStream& rng,
                                SampleMode mode = SampleMode::Stochastic) {
    require_finite(post);
    require_shape(post.mu.rows() == post.sigma.rows() && post.mu.cols() == post.sigma.cols(),
                  "sample_gaussian: mu/sigma shape mismatch");
    if (mode == SampleMode::Mean) return post.mu;
    if ((post.sigma.array() <= Scalar(0)).any())
        throw NumericDomainError("sample_gaussian: sigma must be positive");
    return reparameterize(post, rng.standard_normal<Scalar>(post.mu.rows(), post.mu.cols()));
}

// Per-column KL(q || N(0, I)) = 1/2 sum_h (mu^2 + sigma^2 - 1 - 2 ln sigma).
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> kl_std_normal_columns(const GaussianPosterior<Scalar>& post) {
    if ((post.sigma.array() <= Scalar(0)).any())
        throw NumericDomainError("kl_std_normal: sigma must be positive");
    require_finite(post);
    auto terms = post.mu.array().square() + post.sigma.array().square() - Scalar(1) -
                 Scalar(2) * post.sigma.array().log();
    return Scalar(0.5) * terms.colwise().sum().matrix();
}

template <typename Scalar>
Scalar kl_std_normal(const GaussianPosterior<Scalar>& post) {
    return kl_std_normal_columns(post).sum();
}

// Gradients of the per-column KL with respect to mu and sigma.
template <typename Scalar>
GaussianPosterior<Scalar> kl_std_normal_grad(const GaussianPosterior<Scalar>& post) {
    return {post.mu, (post.sigma.array() - post.sigma.array().inverse()).matrix()};
}

// Column-wise log-softmax with max-shift.
template <typename Derived>
MatrixX<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> out(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const Scalar m = logits.col(j).maxCoeff();
        const Scalar lse = m + std::log((logits.col(j).array() - m).exp().sum());
        out.col(j) = logits.col(j).array() - lse;
    }
    return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    return log_softmax(logits).array().exp().matrix();
}

// Per-column sum_i t_i log softmax(logits)_i.
template <typename DerivedL, typename DerivedT>
Eigen::Matrix<typename DerivedL::Scalar, 1, Eigen::Dynamic> multinomial_loglik_columns(
    const Eigen::MatrixBase<DerivedL>& logits, const Eigen::MatrixBase<DerivedT>& targets) {
    require_shape(logits.rows() > 0 && logits.cols() > 0, "multinomial_loglik: empty input");
    require_shape(logits.rows() == targets.rows() && logits.cols() == targets.cols(),
                  "multinomial_loglik: logits/targets shape mismatch");
    return (log_softmax(logits).array() * targets.array()).colwise().sum().matrix();
}

template <typename DerivedL, typename DerivedT>
typename DerivedL::Scalar multinomial_loglik(const Eigen::MatrixBase<DerivedL>& logits,
                                             const Eigen::MatrixBase<DerivedT>& targets) {
    return multinomial_loglik_columns(logits, targets).sum();
}

// d/dlogits of the per-column log-likelihood: t - softmax * sum(t).
template <typename DerivedL, typename DerivedT>
MatrixX<typename DerivedL::Scalar> multinomial_loglik_grad(const Eigen::MatrixBase<DerivedL>& logits,
                                                           const Eigen::MatrixBase<DerivedT>& targets) {
    auto p = softmax(logits);
    auto mass = targets.colwise().sum();
    return targets - p * mass.asDiagonal();
}

// Inverted-dropout scaling mask: entries are 0 or 1/(1-rate).
template <typename Scalar>
MatrixX<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, RngStream& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
    MatrixX<Scalar> mask(rows, cols);
    const Scalar keep = Scalar(1.0 / (1.0 - rate));
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            mask(i, j) = (rate > 0.0 && rng.uniform() < rate) ? Scalar(0) : keep;
    return mask;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> dropout(const Eigen::MatrixBase<Derived>& x, double rate,
                                          RngStream& rng, bool training) {
    using Scalar = typename Derived::Scalar;
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
    if (!training || rate == 0.0) return x;
    return x.cwiseProduct(dropout_mask<Scalar>(x.rows(), x.cols(), rate, rng));
}

// Scales every non-zero column to unit L2 norm; zero columns stay zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> normalize_columns(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> out = x;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const Scalar n = out.col(j).norm();
        if (n > Scalar(0)) out.col(j) /= n;
    }
    return out;
}

}  // namespace mmsvae
