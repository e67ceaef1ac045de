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

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmsvae/numerics/types.hpp"

namespace mmsvae {

// Ordered collection of named dense parameters. Biases are stored as
// single-column matrices. Shapes are fixed once a name is added.
template <typename Scalar>
class BasicParamStore {
public:
    using value_type = MatrixX<Scalar>;

    value_type& add(const std::string& name, value_type value) {
        if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
        index_.emplace(name, values_.size());
        names_.push_back(name);
        values_.push_back(std::move(value));
        return values_.back();
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    value_type& operator[](const std::string& name) { return values_[position(name)]; }
    const value_type& operator[](const std::string& name) const { return values_[position(name)]; }

    value_type& at(std::size_t i) { return values_.at(i); }
    const value_type& at(std::size_t i) const { return values_.at(i); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    std::size_t size() const { return values_.size(); }

    std::size_t num_scalars() const {
        std::size_t n = 0;
        for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
        return n;
    }

    BasicParamStore zeros_like() const {
        BasicParamStore out;
        for (std::size_t i = 0; i < size(); ++i)
            out.add(names_[i], value_type::Zero(values_[i].rows(), values_[i].cols()));
        return out;
    }

    bool same_layout(const BasicParamStore& other) const {
        if (other.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i) {
            if (other.names_[i] != names_[i] || other.values_[i].rows() != values_[i].rows() ||
                other.values_[i].cols() != values_[i].cols())
                return false;
        }
        return true;
    }

    void set_zero() {
        for (auto& v : values_) v.setZero();
    }

    BasicParamStore& operator+=(const BasicParamStore& other) {
        require_shape(same_layout(other), "param store layout mismatch");
        for (std::size_t i = 0; i < size(); ++i) values_[i] += other.values_[i];
        return *this;
    }

    bool operator==(const BasicParamStore& other) const {
        if (!same_layout(other)) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (values_[i] != other.values_[i]) return false;
        return true;
    }

    bool all_finite() const {
        for (const auto& v : values_)
            if (!v.allFinite()) return false;
        return true;
    }

private:
    std::size_t position(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    std::vector<std::string> names_;
    std::vector<value_type> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

using ParamStore = BasicParamStore<real>;

}  // namespace mmsvae
