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

#include <cstdint>
#include <string>
#include <vector>

#include "mmsvae/data/dataset.hpp"
#include "mmsvae/numerics/distributions.hpp"
#include "mmsvae/numerics/layers.hpp"
#include "mmsvae/numerics/param_store.hpp"

namespace mmsvae {

using Gaussian = GaussianPosterior<real>;
using data::Observation;

enum class Modality { Interactions, Keyphrases };

struct ModelShape {
    int num_items = 0;
    int num_keyphrases = 0;
    int latent = 0;
    int hidden = 0;

    bool operator==(const ModelShape&) const = default;
};

// Encoder pass internals kept for the backward pass.
struct EncodeCache {
    Mlp2Cache<real> mlp;
};

// Bimodal VAE with one encoder/decoder pair per modality. Encoders emit
// (mu, log sigma); columns are users throughout.
//
// Parameters: enc_r, enc_k (input -> hidden -> 2H), dec_r (H -> hidden ->
// |I|), dec_k (H -> hidden -> |K|); see add_mlp2_params for the names.
class MmsVae {
public:
    explicit MmsVae(const ModelShape& shape);

    // Weights uniform on +-1/sqrt(fan_in), biases zero.
    static MmsVae initialized(const ModelShape& shape, std::uint64_t seed);

    const ModelShape& shape() const { return shape_; }
    const ParamStore& params() const { return params_; }
    ParamStore& params() { return params_; }

    // x is raw (binary) input, one column per user. The input is L2
    // normalized per column, then dropped out when training.
    Gaussian encode(Modality m, const Matrix& x, bool training = false, double dropout = 0.0,
                    RngStream* rng = nullptr, EncodeCache* cache = nullptr) const;

    Gaussian encode_r(const Matrix& r, bool training = false, double dropout = 0.0,
                      RngStream* rng = nullptr) const {
        return encode(Modality::Interactions, r, training, dropout, rng);
    }
    Gaussian encode_k(const Matrix& k, bool training = false, double dropout = 0.0,
                      RngStream* rng = nullptr) const {
        return encode(Modality::Keyphrases, k, training, dropout, rng);
    }

    // Mixture-of-experts posterior. Only the modalities named by `obs` are
    // read; the other argument may be empty.
    Gaussian encode_joint(const Matrix& r, const Matrix& k, Observation obs, bool training = false,
                          double dropout = 0.0, RngStream* rng = nullptr) const;

    Matrix decode(Modality m, const Matrix& z, Mlp2Cache<real>* cache = nullptr) const;
    Matrix decode_r(const Matrix& z) const { return decode(Modality::Interactions, z); }
    Matrix decode_k(const Matrix& z) const { return decode(Modality::Keyphrases, z); }

    Mlp2<real> encoder(Modality m) const { return mlp2_view(params_, encoder_prefix(m)); }
    Mlp2<real> decoder(Modality m) const { return mlp2_view(params_, decoder_prefix(m)); }

    static const char* encoder_prefix(Modality m) { return m == Modality::Interactions ? "enc_r" : "enc_k"; }
    static const char* decoder_prefix(Modality m) { return m == Modality::Interactions ? "dec_r" : "dec_k"; }

private:
    ModelShape shape_;
    ParamStore params_;
};

// Weight of the interaction expert: 1/2 when both are observed, 1 for
// r-only, 0 for k-only.
double moe_weight(Observation obs);

// Parameter-level mixture: mu and sigma are the alpha-weighted averages of
// the experts' mu and sigma. A weight of exactly 1 or 0 returns that expert
// unchanged.
Gaussian moe_combine(const Gaussian& r, const Gaussian& k, double alpha);

struct RankedList {
    std::vector<int> ids;
    std::vector<real> scores;

    std::size_t size() const { return ids.size(); }
};

// Ranks by descending score, ties broken by ascending id. Entries flagged in
// `excluded` are skipped; when `candidates` is given only those ids are
// ranked. n is clamped to the number of rankable entries.
RankedList top_n(const Vector& scores, int n, const std::vector<char>* excluded = nullptr,
                 const std::vector<int>* candidates = nullptr);

// 0-based position `id` would take in top_n over the same candidates.
int rank_position(const Vector& scores, int id, const std::vector<char>* excluded = nullptr,
                  const std::vector<int>* candidates = nullptr);

std::vector<char> exclusion_mask(int size, const std::vector<int>& excluded_ids);

// Deterministic top-N items from decoder_r at latent z (one column).
RankedList recommend_topn(const MmsVae& model, const Vector& z, int n,
                          const std::vector<int>& exclude_items);

// Top-K keyphrases from decoder_k at latent z; nothing is masked.
RankedList explain_topk(const MmsVae& model, const Vector& z, int k);

// Mean latent of each listed user from their train interaction rows.
Matrix user_latent_means(const MmsVae& model, const data::SparseMatrix& interactions,
                         const std::vector<int>& users);

}  // namespace mmsvae
