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

#include <string>
#include <vector>

#include "mmsvae/numerics/param_store.hpp"
#include "mmsvae/numerics/types.hpp"

namespace mmsvae {

// Gated recurrent cell with reset gate r, update gate u and candidate n:
//   r  = sigmoid(W_ir x + W_hr h + b_r)
//   u  = sigmoid(W_iu x + W_hz h + b_u)
//   n  = tanh(W_in x + W_hn (r * h) + b_n)
//   h' = (1 - u) * n + u * h
// Note the reset gate multiplies h before W_hn.
template <typename Scalar>
struct GruWeights {
    const MatrixX<Scalar>* w_ir;
    const MatrixX<Scalar>* w_iu;
    const MatrixX<Scalar>* w_in;
    const MatrixX<Scalar>* w_hr;
    const MatrixX<Scalar>* w_hz;
    const MatrixX<Scalar>* w_hn;
    const MatrixX<Scalar>* b_r;
    const MatrixX<Scalar>* b_u;
    const MatrixX<Scalar>* b_n;

    Eigen::Index dim() const { return w_ir->rows(); }
};

inline const char* const kGruParamNames[] = {"w_ir", "w_iu", "w_in", "w_hr", "w_hz",
                                             "w_hn", "b_r",  "b_u",  "b_n"};

template <typename Scalar>
void add_gru_params(BasicParamStore<Scalar>& store, const std::string& prefix, Eigen::Index dim) {
    for (int i = 0; i < 6; ++i)
        store.add(prefix + "." + kGruParamNames[i], MatrixX<Scalar>::Zero(dim, dim));
    for (int i = 6; i < 9; ++i)
        store.add(prefix + "." + kGruParamNames[i], MatrixX<Scalar>::Zero(dim, 1));
}

template <typename Scalar>
GruWeights<Scalar> gru_view(const BasicParamStore<Scalar>& store, const std::string& prefix) {
    auto p = [&](const char* n) { return &store[prefix + "." + n]; };
    return {p("w_ir"), p("w_iu"), p("w_in"), p("w_hr"), p("w_hz"),
            p("w_hn"), p("b_r"),  p("b_u"),  p("b_n")};
}

template <typename Scalar>
struct GruGrads {
    MatrixX<Scalar>*w_ir, *w_iu, *w_in, *w_hr, *w_hz, *w_hn, *b_r, *b_u, *b_n;
};

template <typename Scalar>
GruGrads<Scalar> gru_grads(BasicParamStore<Scalar>& grads, const std::string& prefix) {
    auto p = [&](const char* n) { return &grads[prefix + "." + n]; };
    return {p("w_ir"), p("w_iu"), p("w_in"), p("w_hr"), p("w_hz"),
            p("w_hn"), p("b_r"),  p("b_u"),  p("b_n")};
}

template <typename Scalar>
struct GruStepCache {
    MatrixX<Scalar> x, h, r, u, n;
};

namespace detail {
template <typename Scalar>
MatrixX<Scalar> sigmoid(const MatrixX<Scalar>& a) {
    return (Scalar(1) / (Scalar(1) + (-a.array()).exp())).matrix();
}
}  // namespace detail

template <typename Scalar>
MatrixX<Scalar> gru_cell_forward(const MatrixX<Scalar>& x, const MatrixX<Scalar>& h,
                                 const GruWeights<Scalar>& w, GruStepCache<Scalar>* cache = nullptr) {
    const Eigen::Index d = w.dim();
    require_shape(x.rows() == d && h.rows() == d && x.cols() == h.cols(),
                  "gru_cell_forward: x and h must both have " + std::to_string(d) + " rows");
    MatrixX<Scalar> a_r = (*w.w_ir) * x + (*w.w_hr) * h;
    a_r.colwise() += w.b_r->col(0);
    MatrixX<Scalar> r = detail::sigmoid(a_r);
    MatrixX<Scalar> a_u = (*w.w_iu) * x + (*w.w_hz) * h;
    a_u.colwise() += w.b_u->col(0);
    MatrixX<Scalar> u = detail::sigmoid(a_u);
    MatrixX<Scalar> a_n = (*w.w_in) * x + (*w.w_hn) * r.cwiseProduct(h);
    a_n.colwise() += w.b_n->col(0);
    MatrixX<Scalar> n = a_n.array().tanh().matrix();
    MatrixX<Scalar> out = ((Scalar(1) - u.array()) * n.array() + u.array() * h.array()).matrix();
    if (cache) *cache = {x, h, std::move(r), std::move(u), std::move(n)};
    return out;
}

// Backward through one step; accumulates parameter gradients and returns
// {dx, dh}.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> gru_cell_backward(const GruWeights<Scalar>& w,
                                                              const GruStepCache<Scalar>& c,
                                                              const MatrixX<Scalar>& dh_out,
                                                              const GruGrads<Scalar>& g) {
    const auto one = Scalar(1);
    MatrixX<Scalar> du = dh_out.cwiseProduct(c.h - c.n);
    MatrixX<Scalar> dn = dh_out.cwiseProduct((one - c.u.array()).matrix());
    MatrixX<Scalar> dh = dh_out.cwiseProduct(c.u);

    MatrixX<Scalar> da_n = dn.cwiseProduct((one - c.n.array().square()).matrix());
    MatrixX<Scalar> rh = c.r.cwiseProduct(c.h);
    g.w_in->noalias() += da_n * c.x.transpose();
    g.w_hn->noalias() += da_n * rh.transpose();
    *g.b_n += da_n.rowwise().sum();
    MatrixX<Scalar> drh = w.w_hn->transpose() * da_n;
    MatrixX<Scalar> dr = drh.cwiseProduct(c.h);
    dh += drh.cwiseProduct(c.r);

    MatrixX<Scalar> da_u = du.cwiseProduct((c.u.array() * (one - c.u.array())).matrix());
    g.w_iu->noalias() += da_u * c.x.transpose();
    g.w_hz->noalias() += da_u * c.h.transpose();
    *g.b_u += da_u.rowwise().sum();
    dh.noalias() += w.w_hz->transpose() * da_u;

    MatrixX<Scalar> da_r = dr.cwiseProduct((c.r.array() * (one - c.r.array())).matrix());
    g.w_ir->noalias() += da_r * c.x.transpose();
    g.w_hr->noalias() += da_r * c.h.transpose();
    *g.b_r += da_r.rowwise().sum();
    dh.noalias() += w.w_hr->transpose() * da_r;

    MatrixX<Scalar> dx = w.w_ir->transpose() * da_r + w.w_iu->transpose() * da_u +
                         w.w_in->transpose() * da_n;
    return {std::move(dx), std::move(dh)};
}

// Runs the shared-weight cell over inputs[0..T-1] starting from h0.
template <typename Scalar>
MatrixX<Scalar> gru_sequence_forward(const std::vector<MatrixX<Scalar>>& inputs,
                                     const MatrixX<Scalar>& h0, const GruWeights<Scalar>& w,
                                     std::vector<GruStepCache<Scalar>>* caches = nullptr) {
    MatrixX<Scalar> h = h0;
    if (caches) caches->assign(inputs.size(), {});
    for (std::size_t t = 0; t < inputs.size(); ++t)
        h = gru_cell_forward(inputs[t], h, w, caches ? &(*caches)[t] : nullptr);
    return h;
}

// Backpropagates through the whole sequence; returns d h0.
template <typename Scalar>
MatrixX<Scalar> gru_sequence_backward(const GruWeights<Scalar>& w,
                                      const std::vector<GruStepCache<Scalar>>& caches,
                                      const MatrixX<Scalar>& dh_final, const GruGrads<Scalar>& g) {
    MatrixX<Scalar> dh = dh_final;
    for (std::size_t t = caches.size(); t-- > 0;) dh = gru_cell_backward(w, caches[t], dh, g).second;
    return dh;
}

}  // namespace mmsvae
