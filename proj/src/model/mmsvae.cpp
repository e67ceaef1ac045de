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

#include "mmsvae/model/mmsvae.hpp"

#include <algorithm>
#include <numeric>

namespace mmsvae {

MmsVae::MmsVae(const ModelShape& shape) : shape_(shape) {
    if (shape.num_items <= 0 || shape.num_keyphrases <= 0 || shape.latent <= 0 || shape.hidden <= 0)
        throw ConfigError("model dimensions must be positive");
    add_mlp2_params<real>(params_, "enc_r", shape.num_items, shape.hidden, 2 * shape.latent);
    add_mlp2_params<real>(params_, "enc_k", shape.num_keyphrases, shape.hidden, 2 * shape.latent);
    add_mlp2_params<real>(params_, "dec_r", shape.latent, shape.hidden, shape.num_items);
    add_mlp2_params<real>(params_, "dec_k", shape.latent, shape.hidden, shape.num_keyphrases);
}

MmsVae MmsVae::initialized(const ModelShape& shape, std::uint64_t seed) {
    MmsVae model(shape);
    RngStream rng(seed);
    for (std::size_t i = 0; i < model.params_.size(); ++i) {
        const auto& name = model.params_.name(i);
        if (name.ends_with(".w1") || name.ends_with(".w2")) init_uniform_fan_in(model.params_.at(i), rng);
    }
    return model;
}

Gaussian MmsVae::encode(Modality m, const Matrix& x, bool training, double dropout_rate,
                        RngStream* rng, EncodeCache* cache) const {
    const int expected = m == Modality::Interactions ? shape_.num_items : shape_.num_keyphrases;
    require_shape(x.rows() == expected, std::string("encode: expected ") + std::to_string(expected) +
                                            " input rows, got " + std::to_string(x.rows()));
    Matrix input = normalize_columns(x);
    if (training && dropout_rate > 0.0) {
        if (!rng) throw ConfigError("encode: training with dropout needs an rng");
        input = dropout(input, dropout_rate, *rng, true);
    }
    const Matrix out = mlp2_forward(encoder(m), input, cache ? &cache->mlp : nullptr);
    const Eigen::Index h = shape_.latent;
    return {out.topRows(h), out.bottomRows(h).array().exp().matrix()};
}

Gaussian MmsVae::encode_joint(const Matrix& r, const Matrix& k, Observation obs, bool training,
                              double dropout_rate, RngStream* rng) const {
    switch (obs) {
        case Observation::ROnly: return encode_r(r, training, dropout_rate, rng);
        case Observation::KOnly: return encode_k(k, training, dropout_rate, rng);
        case Observation::Both: break;
    }
    require_shape(r.cols() == k.cols(), "encode_joint: r and k batch sizes differ");
    return moe_combine(encode_r(r, training, dropout_rate, rng), encode_k(k, training, dropout_rate, rng),
                       moe_weight(obs));
}

Matrix MmsVae::decode(Modality m, const Matrix& z, Mlp2Cache<real>* cache) const {
    require_shape(z.rows() == shape_.latent, "decode: latent dimension mismatch");
    return mlp2_forward(decoder(m), z, cache);
}

double moe_weight(Observation obs) {
    switch (obs) {
        case Observation::Both: return 0.5;
        case Observation::ROnly: return 1.0;
        case Observation::KOnly: return 0.0;
    }
    return 0.5;
}

Gaussian moe_combine(const Gaussian& r, const Gaussian& k, double alpha) {
    if (alpha == 1.0) return r;
    if (alpha == 0.0) return k;
    require_shape(r.mu.rows() == k.mu.rows() && r.mu.cols() == k.mu.cols(),
                  "moe_combine: expert shapes differ");
    const real a = static_cast<real>(alpha);
    return {a * r.mu + (1 - a) * k.mu, a * r.sigma + (1 - a) * k.sigma};
}

namespace {

struct ScoreOrder {
    const Vector* scores;
    bool operator()(int a, int b) const {
        const real sa = (*scores)(a), sb = (*scores)(b);
        if (sa != sb) return sa > sb;
        return a < b;
    }
};

}  // namespace

RankedList top_n(const Vector& scores, int n, const std::vector<char>* excluded,
                 const std::vector<int>* candidates) {
    std::vector<int> pool;
    if (candidates) {
        pool.reserve(candidates->size());
        for (int id : *candidates)
            if (!excluded || !(*excluded)[static_cast<std::size_t>(id)]) pool.push_back(id);
    } else {
        pool.reserve(static_cast<std::size_t>(scores.size()));
        for (int id = 0; id < scores.size(); ++id)
            if (!excluded || !(*excluded)[static_cast<std::size_t>(id)]) pool.push_back(id);
    }
    const auto take = static_cast<std::size_t>(std::clamp<long>(n, 0, static_cast<long>(pool.size())));
    std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(take), pool.end(), ScoreOrder{&scores});
    pool.resize(take);
    RankedList out;
    out.ids = std::move(pool);
    out.scores.reserve(take);
    for (int id : out.ids) out.scores.push_back(scores(id));
    return out;
}

int rank_position(const Vector& scores, int id, const std::vector<char>* excluded,
                  const std::vector<int>* candidates) {
    const ScoreOrder before{&scores};
    int rank = 0;
    auto visit = [&](int other) {
        if (other == id || (excluded && (*excluded)[static_cast<std::size_t>(other)])) return;
        if (before(other, id)) ++rank;
    };
    if (candidates) {
        for (int other : *candidates) visit(other);
    } else {
        for (int other = 0; other < scores.size(); ++other) visit(other);
    }
    return rank;
}

std::vector<char> exclusion_mask(int size, const std::vector<int>& excluded_ids) {
    std::vector<char> mask(static_cast<std::size_t>(size), 0);
    for (int id : excluded_ids) {
        if (id < 0 || id >= size) throw ShapeError("exclusion id out of range");
        mask[static_cast<std::size_t>(id)] = 1;
    }
    return mask;
}

RankedList recommend_topn(const MmsVae& model, const Vector& z, int n, const std::vector<int>& exclude_items) {
    const Vector scores = model.decode_r(z).col(0);
    const auto mask = exclusion_mask(static_cast<int>(scores.size()), exclude_items);
    return top_n(scores, n, &mask);
}

RankedList explain_topk(const MmsVae& model, const Vector& z, int k) {
    const Vector scores = model.decode_k(z).col(0);
    return top_n(scores, k);
}

Matrix user_latent_means(const MmsVae& model, const data::SparseMatrix& interactions,
                         const std::vector<int>& users) {
    return model.encode_r(data::rows_as_columns(interactions, users)).mu;
}

}  // namespace mmsvae
