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

#include "mmsvae/data/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mmsvae::data {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path.string());
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

void expect_header(std::istream& in, const std::vector<std::string>& expected, const fs::path& path) {
    std::string line;
    if (!std::getline(in, line)) throw IngestionError(path.string() + ": missing header");
    strip_cr(line);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (split_csv_line(line) != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw IngestionError(path.string() + ": expected header `" + want + "`");
    }
}

int lookup(const std::unordered_map<std::string, int>& index, const std::string& key,
           const fs::path& path, long line_no) {
    auto it = index.find(key);
    if (it == index.end())
        throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": unknown id `" + key + "`");
    return it->second;
}

std::unordered_map<std::string, int> index_of(const std::vector<std::string>& names) {
    std::unordered_map<std::string, int> idx;
    for (std::size_t i = 0; i < names.size(); ++i) idx.emplace(names[i], static_cast<int>(i));
    return idx;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_sparse(const fs::path& path, const SparseMatrix& m, const char* row_name) {
    auto out = open_out(path);
    out << row_name << ",col,value\n";
    for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            out << r << ',' << it.col() << ',' << it.value() << '\n';
}

SparseMatrix read_sparse(const fs::path& path, const char* row_name, int rows, int cols) {
    auto in = open_in(path);
    expect_header(in, {row_name, "col", "value"}, path);
    std::vector<Eigen::Triplet<real, int>> triplets;
    std::string line;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": bad row");
        const int r = std::stoi(f[0]);
        const int c = std::stoi(f[1]);
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": index out of range");
        triplets.emplace_back(r, c, static_cast<real>(std::stod(f[2])));
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

RatingsTable read_ratings_csv(const fs::path& path) {
    auto in = open_in(path);
    expect_header(in, {"user", "item", "rating"}, path);
    RatingsTable table;
    std::unordered_map<std::string, int> users, items;
    std::string line;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3)
            throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
        auto [u, new_u] = users.emplace(f[0], table.num_users());
        if (new_u) table.user_names.push_back(f[0]);
        auto [i, new_i] = items.emplace(f[1], table.num_items());
        if (new_i) table.item_names.push_back(f[1]);
        double rating = 0;
        try {
            rating = std::stod(f[2]);
        } catch (const std::exception&) {
            throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": bad rating `" + f[2] + "`");
        }
        table.ratings.push_back({u->second, i->second, rating});
    }
    return table;
}

std::vector<std::string> read_vocabulary(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        vocab.push_back(line);
    }
    while (!vocab.empty() && vocab.back().empty()) vocab.pop_back();
    return vocab;
}

void read_reviews_csv(const fs::path& path, RatingsTable& table) {
    auto in = open_in(path);
    expect_header(in, {"user", "item", "keyphrase_ids"}, path);
    const auto users = index_of(table.user_names);
    const auto items = index_of(table.item_names);
    std::string line;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3)
            throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
        ReviewRecord r{lookup(users, f[0], path, line_no), lookup(items, f[1], path, line_no), {}};
        std::stringstream ids(f[2]);
        std::string tok;
        while (std::getline(ids, tok, ';')) {
            if (tok.empty()) continue;
            const int k = std::stoi(tok);
            if (k < 0 || k >= table.num_keyphrases())
                throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": keyphrase id " +
                                     tok + " is out of vocabulary");
            r.keyphrases.push_back(k);
        }
        table.reviews.push_back(std::move(r));
    }
}

void read_review_text_csv(const fs::path& path, RatingsTable& table) {
    auto in = open_in(path);
    expect_header(in, {"user", "item", "text"}, path);
    const auto users = index_of(table.user_names);
    const auto items = index_of(table.item_names);
    std::string line;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3)
            throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
        table.reviews.push_back({lookup(users, f[0], path, line_no), lookup(items, f[1], path, line_no),
                                 match_keyphrases(f[2], table.vocabulary)});
    }
}

void write_ratings_csv(const fs::path& path, const RatingsTable& table) {
    auto out = open_out(path);
    out << "user,item,rating\n";
    for (const auto& r : table.ratings)
        out << quote_if_needed(table.user_names[static_cast<std::size_t>(r.user)]) << ','
            << quote_if_needed(table.item_names[static_cast<std::size_t>(r.item)]) << ',' << r.rating << '\n';
}

void write_reviews_csv(const fs::path& path, const RatingsTable& table) {
    auto out = open_out(path);
    out << "user,item,keyphrase_ids\n";
    for (const auto& r : table.reviews) {
        out << quote_if_needed(table.user_names[static_cast<std::size_t>(r.user)]) << ','
            << quote_if_needed(table.item_names[static_cast<std::size_t>(r.item)]) << ',';
        for (std::size_t k = 0; k < r.keyphrases.size(); ++k) out << (k ? ";" : "") << r.keyphrases[k];
        out << '\n';
    }
}

void write_vocabulary(const fs::path& path, const std::vector<std::string>& vocab) {
    auto out = open_out(path);
    for (const auto& v : vocab) out << v << '\n';
}

void write_bundle(const fs::path& dir, const DatasetSplit& ds) {
    fs::create_directories(dir);
    const auto& m = ds.manifest;
    json j;
    j["format"] = "mmsvae-bundle";
    j["version"] = kBundleVersion;
    j["split"] = {{"version", m.version},
                  {"seed", m.seed},
                  {"threshold", m.threshold},
                  {"ratios", {m.ratios.train, m.ratios.validation, m.ratios.test}},
                  {"num_users", m.num_users},
                  {"num_items", m.num_items},
                  {"num_keyphrases", m.num_keyphrases},
                  {"interactions", m.interactions}};
    j["stats"] = {{"num_users", ds.stats.num_users},
                  {"num_items", ds.stats.num_items},
                  {"num_interactions", ds.stats.num_interactions},
                  {"sparsity", ds.stats.sparsity},
                  {"num_keyphrases", ds.stats.num_keyphrases},
                  {"keyphrase_coverage", ds.stats.keyphrase_coverage},
                  {"avg_keyphrases_per_review", ds.stats.avg_keyphrases_per_review}};
    j["user_names"] = ds.user_names;
    j["item_names"] = ds.item_names;
    j["vocabulary"] = ds.vocabulary;
    j["keyphrase_popularity"] = ds.keyphrase_popularity;
    auto out = open_out(dir / "bundle.json");
    out << j.dump(1) << '\n';
    out.close();

    write_sparse(dir / "train.csv", ds.train, "user");
    write_sparse(dir / "validation.csv", ds.validation, "user");
    write_sparse(dir / "test.csv", ds.test, "user");
    write_sparse(dir / "user_keyphrases.csv", ds.keyphrases.user_counts, "user");
    write_sparse(dir / "item_keyphrases.csv", ds.keyphrases.item_counts, "item");
    write_sparse(dir / "test_user_keyphrases.csv", ds.test_user_keyphrases, "user");
}

DatasetSplit read_bundle(const fs::path& dir) {
    json j;
    {
        auto in = open_in(dir / "bundle.json");
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw IngestionError((dir / "bundle.json").string() + ": " + e.what());
        }
    }
    if (j.value("format", "") != "mmsvae-bundle" || j.value("version", 0) != kBundleVersion)
        throw IngestionError((dir / "bundle.json").string() + ": unsupported bundle format or version");
    DatasetSplit ds;
    const auto& s = j.at("split");
    auto& m = ds.manifest;
    m.version = s.at("version");
    m.seed = s.at("seed");
    m.threshold = s.at("threshold");
    m.ratios = {s.at("ratios")[0], s.at("ratios")[1], s.at("ratios")[2]};
    m.num_users = s.at("num_users");
    m.num_items = s.at("num_items");
    m.num_keyphrases = s.at("num_keyphrases");
    m.interactions = s.at("interactions");
    const auto& st = j.at("stats");
    ds.stats = {st.at("num_users"),      st.at("num_items"),          st.at("num_interactions"),
                st.at("sparsity"),       st.at("num_keyphrases"),     st.at("keyphrase_coverage"),
                st.at("avg_keyphrases_per_review")};
    ds.user_names = j.at("user_names").get<std::vector<std::string>>();
    ds.item_names = j.at("item_names").get<std::vector<std::string>>();
    ds.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    ds.keyphrase_popularity = j.at("keyphrase_popularity").get<std::vector<double>>();
    if (static_cast<int>(ds.user_names.size()) != m.num_users ||
        static_cast<int>(ds.item_names.size()) != m.num_items ||
        static_cast<int>(ds.vocabulary.size()) != m.num_keyphrases)
        throw IngestionError((dir / "bundle.json").string() + ": counts disagree with name lists");

    ds.train = read_sparse(dir / "train.csv", "user", m.num_users, m.num_items);
    ds.validation = read_sparse(dir / "validation.csv", "user", m.num_users, m.num_items);
    ds.test = read_sparse(dir / "test.csv", "user", m.num_users, m.num_items);
    ds.keyphrases.user_counts = read_sparse(dir / "user_keyphrases.csv", "user", m.num_users, m.num_keyphrases);
    ds.keyphrases.item_counts = read_sparse(dir / "item_keyphrases.csv", "item", m.num_items, m.num_keyphrases);
    ds.test_user_keyphrases =
        read_sparse(dir / "test_user_keyphrases.csv", "user", m.num_users, m.num_keyphrases);
    auto binary = [](SparseMatrix b) {
        for (int k = 0; k < b.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(b, k); it; ++it) it.valueRef() = real(1);
        return b;
    };
    ds.keyphrases.user = binary(ds.keyphrases.user_counts);
    ds.keyphrases.item = binary(ds.keyphrases.item_counts);
    return ds;
}

}  // namespace mmsvae::data
