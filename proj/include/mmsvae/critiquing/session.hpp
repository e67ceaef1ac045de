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

#include <stdexcept>
#include <string>
#include <vector>

#include "mmsvae/critiquing/blender.hpp"
#include "mmsvae/model/mmsvae.hpp"

namespace mmsvae::critiquing {

struct SessionConfig {
    int top_n = 10;
    int max_turns = 10;
    BlendKind blend = BlendKind::Gru;
    int explain_k = 5;
};

class TurnBudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownKeyphrase : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Live state of one conversation. z0 stays fixed; every critique appends
// to the history and moves the blended latent.
struct CritiqueSession {
    std::string id;
    int user = -1;
    Vector z0;
    std::vector<int> critiques;
    std::vector<Vector> critique_latents;
    Vector blended;  // equals z0 before the first critique

    // Running blender state: GRU hidden state after the latest input, and
    // the running sums for the averaging blends.
    Vector gru_state;
    Vector latent_sum;    // z0 + critiques
    Vector critique_sum;  // critiques only

    std::vector<int> candidates;  // empty: every item
    std::vector<char> excluded;
    Vector scores;
    RankedList ranking;
    bool closed = false;

    int turn() const { return static_cast<int>(critiques.size()); }
};

// Applies critiques with forward passes only. The model and blender are
// shared read-only; a session is owned by one caller at a time.
class CritiqueEngine {
public:
    CritiqueEngine(const MmsVae& model, const Blender* blender, SessionConfig cfg);

    const SessionConfig& config() const { return cfg_; }
    const MmsVae& model() const { return *model_; }

    CritiqueSession start(const Vector& z0, const std::vector<int>& exclude_items,
                          std::vector<int> candidates = {}, int user = -1) const;

    // Throws TurnBudgetExhausted (and closes the session) past max_turns,
    // UnknownKeyphrase for an invalid id.
    void apply_critique(CritiqueSession& session, int keyphrase) const;

    // Back to z0 with an empty history.
    void reset(CritiqueSession& session) const;

    Vector critique_latent(int keyphrase) const;

    // Blended latent recomputed from scratch for a critique history.
    Vector replay_latent(const Vector& z0, const std::vector<int>& critiques) const;

private:
    void rerank(CritiqueSession& session) const;

    const MmsVae* model_;
    const Blender* blender_;
    SessionConfig cfg_;
    Matrix critique_latents_;
};

}  // namespace mmsvae::critiquing
