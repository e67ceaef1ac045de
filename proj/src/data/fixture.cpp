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

#include "mmsvae/data/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mmsvae/numerics/rng.hpp"

namespace mmsvae::data {

namespace {

const char* const kWords[] = {"hoppy", "malty",  "citrus", "roasty", "sweet",  "bitter",
                              "smooth", "fruity", "spicy",  "dark",   "light",  "crisp",
                              "sour",  "floral", "nutty",  "smoky",  "creamy", "dry"};

std::string padded(char prefix, int id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%04d", prefix, id);
    return buf;
}

}  // namespace

RatingsTable generate_fixture(const FixtureConfig& cfg) {
    if (cfg.num_users <= 0 || cfg.num_items <= 0 || cfg.num_keyphrases <= 0 || cfg.rank <= 0)
        throw ConfigError("fixture dimensions must be positive");
    if (cfg.keyphrases_per_item > cfg.num_keyphrases || cfg.max_positives > cfg.num_items ||
        cfg.min_positives > cfg.max_positives)
        throw ConfigError("fixture counts are inconsistent");

    RngStream rng(cfg.seed);
    const Matrix users = rng.standard_normal(cfg.rank, cfg.num_users);
    const Matrix items = rng.standard_normal(cfg.rank, cfg.num_items);
    Matrix directions = rng.standard_normal(cfg.rank, cfg.num_keyphrases);
    directions.colwise().normalize();

    RatingsTable table;
    for (int u = 0; u < cfg.num_users; ++u) table.user_names.push_back(padded('u', u));
    for (int i = 0; i < cfg.num_items; ++i) table.item_names.push_back(padded('i', i));
    for (int k = 0; k < cfg.num_keyphrases; ++k) {
        const std::size_t n_words = std::size(kWords);
        std::string word = kWords[static_cast<std::size_t>(k) % n_words];
        if (static_cast<std::size_t>(k) >= n_words) word += "-" + std::to_string(k / n_words);
        table.vocabulary.push_back(word);
    }

    // Each item's keyphrases: the best-aligned directions.
    std::vector<std::vector<int>> item_kp(static_cast<std::size_t>(cfg.num_items));
    const Matrix alignment = items.transpose() * directions;
    for (int i = 0; i < cfg.num_items; ++i) {
        std::vector<int> order(static_cast<std::size_t>(cfg.num_keyphrases));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return alignment(i, a) > alignment(i, b); });
        order.resize(static_cast<std::size_t>(cfg.keyphrases_per_item));
        std::sort(order.begin(), order.end());
        item_kp[static_cast<std::size_t>(i)] = std::move(order);
    }

    // A reviewer mentions an item's keyphrase more often the better it
    // matches their own taste.
    const Matrix taste = users.colwise().normalized().transpose() * directions;
    auto review_of = [&](int u, int i) {
        ReviewRecord r{u, i, {}};
        for (int k : item_kp[static_cast<std::size_t>(i)]) {
            const double p = cfg.mention_probability / (1.0 + std::exp(-cfg.mention_sharpness * taste(u, k)));
            if (rng.bernoulli(p)) r.keyphrases.push_back(k);
        }
        return r;
    };

    const Matrix affinity = users.transpose() * items;
    for (int u = 0; u < cfg.num_users; ++u) {
        std::vector<double> score(static_cast<std::size_t>(cfg.num_items));
        for (int i = 0; i < cfg.num_items; ++i)
            score[static_cast<std::size_t>(i)] = affinity(u, i) + cfg.affinity_noise * rng.normal();
        std::vector<int> order(static_cast<std::size_t>(cfg.num_items));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
        });
        const int span = cfg.max_positives - cfg.min_positives + 1;
        const int n_pos = cfg.min_positives + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(span)));
        for (int k = 0; k < n_pos; ++k) {
            const int i = order[static_cast<std::size_t>(k)];
            table.ratings.push_back({u, i, 4.0 + 0.5 * static_cast<double>(rng.uniform_index(3))});
            table.reviews.push_back(review_of(u, i));
        }
        // A few low ratings from the bottom of the affinity order.
        for (int k = 0; k < cfg.negatives_per_user && n_pos + k < cfg.num_items; ++k) {
            const int i = order[static_cast<std::size_t>(cfg.num_items - 1 - k)];
            table.ratings.push_back({u, i, 1.0 + static_cast<double>(rng.uniform_index(5)) * 0.5});
            table.reviews.push_back(review_of(u, i));
        }
    }
    // Items nobody rated get one low rating from their least-aligned user,
    // so every item reaches the catalog.
    std::vector<char> rated(static_cast<std::size_t>(cfg.num_items), 0);
    for (const auto& r : table.ratings) rated[static_cast<std::size_t>(r.item)] = 1;
    for (int i = 0; i < cfg.num_items; ++i) {
        if (rated[static_cast<std::size_t>(i)]) continue;
        Eigen::Index u = 0;
        affinity.col(i).minCoeff(&u);
        table.ratings.push_back({static_cast<int>(u), i, 2.0});
        table.reviews.push_back(review_of(static_cast<int>(u), i));
    }
    return table;
}

}  // namespace mmsvae::data
