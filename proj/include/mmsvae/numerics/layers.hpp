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
#include <string>

#include "mmsvae/numerics/param_store.hpp"
#include "mmsvae/numerics/rng.hpp"
#include "mmsvae/numerics/types.hpp"

namespace mmsvae {

// y = W x + b applied to every column of x. W is (out x in), b is (out x 1).
template <typename Scalar>
struct Affine {
    const MatrixX<Scalar>* weight;
    const MatrixX<Scalar>* bias;

    Eigen::Index in_dim() const { return weight->cols(); }
    Eigen::Index out_dim() const { return weight->rows(); }
};

template <typename Scalar, typename Derived>
MatrixX<Scalar> affine_forward(const Affine<Scalar>& layer, const Eigen::MatrixBase<Derived>& x) {
    require_shape(x.rows() == layer.in_dim(), "affine: input has " + std::to_string(x.rows()) +
                                                  " rows, layer expects " +
                                                  std::to_string(layer.in_dim()));
    require_shape(layer.bias->rows() == layer.out_dim() && layer.bias->cols() == 1,
                  "affine: bias shape mismatch");
    MatrixX<Scalar> y = (*layer.weight) * x;
    y.colwise() += layer.bias->col(0);
    return y;
}

// Accumulates dW, db into the given matrices and returns dx.
template <typename Scalar>
MatrixX<Scalar> affine_backward(const Affine<Scalar>& layer, const MatrixX<Scalar>& x,
                                const MatrixX<Scalar>& dy, MatrixX<Scalar>* dweight,
                                MatrixX<Scalar>* dbias, bool need_dx = true) {
    if (dweight) dweight->noalias() += dy * x.transpose();
    if (dbias) *dbias += dy.rowwise().sum();
    if (!need_dx) return {};
    return layer.weight->transpose() * dy;
}

// layer2(tanh(layer1(x)))
template <typename Scalar>
struct Mlp2 {
    Affine<Scalar> layer1;
    Affine<Scalar> layer2;
};

template <typename Scalar>
struct Mlp2Cache {
    MatrixX<Scalar> input;
    MatrixX<Scalar> hidden;  // post-activation
};

template <typename Scalar, typename Derived>
MatrixX<Scalar> mlp2_forward(const Mlp2<Scalar>& net, const Eigen::MatrixBase<Derived>& x,
                             Mlp2Cache<Scalar>* cache = nullptr) {
    MatrixX<Scalar> hidden = affine_forward(net.layer1, x).array().tanh().matrix();
    MatrixX<Scalar> out = affine_forward(net.layer2, hidden);
    if (cache) {
        cache->input = x;
        cache->hidden = std::move(hidden);
    }
    return out;
}

template <typename Scalar>
struct Mlp2Grads {
    MatrixX<Scalar>* w1;
    MatrixX<Scalar>* b1;
    MatrixX<Scalar>* w2;
    MatrixX<Scalar>* b2;
};

// Returns dx; parameter gradients are accumulated when grads are given.
template <typename Scalar>
MatrixX<Scalar> mlp2_backward(const Mlp2<Scalar>& net, const Mlp2Cache<Scalar>& cache,
                              const MatrixX<Scalar>& dy, const Mlp2Grads<Scalar>* grads,
                              bool need_dx = true) {
    MatrixX<Scalar> dhidden =
        affine_backward(net.layer2, cache.hidden, dy, grads ? grads->w2 : nullptr,
                        grads ? grads->b2 : nullptr, true);
    MatrixX<Scalar> dpre = dhidden.cwiseProduct((Scalar(1) - cache.hidden.array().square()).matrix());
    return affine_backward(net.layer1, cache.input, dpre, grads ? grads->w1 : nullptr,
                           grads ? grads->b1 : nullptr, need_dx);
}

// Parameter naming used for every two-layer stack: <prefix>.w1, .b1, .w2, .b2
template <typename Scalar>
void add_mlp2_params(BasicParamStore<Scalar>& store, const std::string& prefix, Eigen::Index in,
                     Eigen::Index hidden, Eigen::Index out) {
    store.add(prefix + ".w1", MatrixX<Scalar>::Zero(hidden, in));
    store.add(prefix + ".b1", MatrixX<Scalar>::Zero(hidden, 1));
    store.add(prefix + ".w2", MatrixX<Scalar>::Zero(out, hidden));
    store.add(prefix + ".b2", MatrixX<Scalar>::Zero(out, 1));
}

template <typename Scalar>
Mlp2<Scalar> mlp2_view(const BasicParamStore<Scalar>& store, const std::string& prefix) {
    return {{&store[prefix + ".w1"], &store[prefix + ".b1"]},
            {&store[prefix + ".w2"], &store[prefix + ".b2"]}};
}

template <typename Scalar>
Mlp2Grads<Scalar> mlp2_grads(BasicParamStore<Scalar>& grads, const std::string& prefix) {
    return {&grads[prefix + ".w1"], &grads[prefix + ".b1"], &grads[prefix + ".w2"],
            &grads[prefix + ".b2"]};
}

// Uniform on +-1/sqrt(fan_in) for weight matrices; biases stay zero.
template <typename Scalar>
void init_uniform_fan_in(MatrixX<Scalar>& weight, RngStream& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
    for (Eigen::Index j = 0; j < weight.cols(); ++j)
        for (Eigen::Index i = 0; i < weight.rows(); ++i)
            weight(i, j) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
}

}  // namespace mmsvae
