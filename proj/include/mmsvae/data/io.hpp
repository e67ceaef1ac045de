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

#include <filesystem>
#include <string>
#include <vector>

#include "mmsvae/data/dataset.hpp"

namespace mmsvae::data {

// Splits one CSV line; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(const std::string& line);

// ratings.csv with header `user,item,rating`; ids are arbitrary strings and
// are reindexed densely in order of first appearance.
RatingsTable read_ratings_csv(const std::filesystem::path& path);

// vocab.txt: one keyphrase per line; line number (0-based) is the id.
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

// reviews.csv with header `user,item,keyphrase_ids`, ids separated by ';'.
// Users and items must already be present in the table.
void read_reviews_csv(const std::filesystem::path& path, RatingsTable& table);

// reviews with raw text (`user,item,text`); keyphrases are found with
// match_keyphrases against the table vocabulary.
void read_review_text_csv(const std::filesystem::path& path, RatingsTable& table);

void write_ratings_csv(const std::filesystem::path& path, const RatingsTable& table);
void write_reviews_csv(const std::filesystem::path& path, const RatingsTable& table);
void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& vocab);

// A dataset bundle is a directory holding bundle.json (split manifest,
// names, vocabulary, statistics) and one CSV per sparse matrix.
inline constexpr int kBundleVersion = 1;

void write_bundle(const std::filesystem::path& dir, const DatasetSplit& ds);
DatasetSplit read_bundle(const std::filesystem::path& dir);

}  // namespace mmsvae::data
