/*
 * Copyright 2026 The trimabs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "trimabs/box.hpp"

namespace trimabs {

// Finite input lattice: one strictly increasing level list per dimension.
// The full grid is the cartesian product, enumerated lexicographically with
// dimension 0 most significant.
class InputGrid {
 public:
  explicit InputGrid(std::vector<std::vector<double>> levels)
      : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("InputGrid: no dimensions");
    for (const auto& dim : levels_) {
      if (dim.empty()) throw std::invalid_argument("InputGrid: empty level list");
      for (std::size_t i = 0; i < dim.size(); ++i) {
        if (!std::isfinite(dim[i]))
          throw std::invalid_argument("InputGrid: non-finite level");
        if (i > 0 && !(dim[i - 1] < dim[i]))
          throw std::invalid_argument("InputGrid: levels must strictly increase");
      }
    }
  }

  // Levels offset + k*step strictly inside the box, per dimension.
  static InputGrid regular(const OpenBox& box, double step, double offset = 0.0) {
    if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(offset))
      throw std::invalid_argument("InputGrid::regular: bad step or offset");
    std::vector<std::vector<double>> levels(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d) {
      const double lo = box.lower(d), hi = box.upper(d);
      const long long k0 = static_cast<long long>(std::floor((lo - offset) / step)) - 2;
      const long long k1 = static_cast<long long>(std::ceil((hi - offset) / step)) + 2;
      for (long long k = k0; k <= k1; ++k) {
        const double v = offset + static_cast<double>(k) * step;
        if (v > lo && v < hi) levels[d].push_back(v);
      }
      if (levels[d].empty())
        throw std::invalid_argument("InputGrid::regular: no level inside box");
    }
    return InputGrid(std::move(levels));
  }

  std::size_t dims() const { return levels_.size(); }
  const std::vector<double>& levels(std::size_t d) const { return levels_.at(d); }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& dim : levels_) n *= dim.size();
    return n;
  }

  Vec point(std::size_t flat) const {
    Vec p(dims());
    for (std::size_t d = dims(); d-- > 0;) {
      p[d] = levels_[d][flat % levels_[d].size()];
      flat /= levels_[d].size();
    }
    if (flat != 0) throw std::invalid_argument("InputGrid::point: index out of range");
    return p;
  }

  // Per-dimension nearest level; an exact midpoint resolves to the lower level.
  Vec nearest(const Vec& v) const {
    if (v.size() != dims())
      throw std::invalid_argument("InputGrid::nearest: dimension mismatch");
    Vec out(dims());
    for (std::size_t d = 0; d < dims(); ++d) {
      const auto& ls = levels_[d];
      auto it = std::lower_bound(ls.begin(), ls.end(), v[d]);
      if (it == ls.begin()) {
        out[d] = ls.front();
      } else if (it == ls.end()) {
        out[d] = ls.back();
      } else {
        const double above = *it, below = *(it - 1);
        out[d] = (v[d] - below <= above - v[d]) ? below : above;
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> levels_;
};

// Right-continuous piecewise-constant signal on [0, duration]: value k holds
// on [k*len, (k+1)*len), and the final boundary takes the last value.
class PiecewiseConstantInput {
 public:
  PiecewiseConstantInput(double segment_length, std::vector<Vec> values)
      : len_(segment_length), values_(std::move(values)) {
    if (!(len_ > 0.0) || !std::isfinite(len_))
      throw std::invalid_argument("PiecewiseConstantInput: bad segment length");
    if (values_.empty())
      throw std::invalid_argument("PiecewiseConstantInput: no segments");
    const std::size_t m = values_.front().size();
    if (m == 0) throw std::invalid_argument("PiecewiseConstantInput: empty value");
    for (const Vec& v : values_) {
      if (v.size() != m)
        throw std::invalid_argument("PiecewiseConstantInput: ragged values");
      for (double x : v)
        if (!std::isfinite(x))
          throw std::invalid_argument("PiecewiseConstantInput: non-finite value");
    }
  }

  static PiecewiseConstantInput constant(Vec value, double duration) {
    return PiecewiseConstantInput(duration, {std::move(value)});
  }

  double segment_length() const { return len_; }
  std::size_t segments() const { return values_.size(); }
  double duration() const { return len_ * static_cast<double>(values_.size()); }
  std::size_t dims() const { return values_.front().size(); }
  const std::vector<Vec>& values() const { return values_; }

  const Vec& value_at(double t) const {
    // The nudge snaps times within ~1e-9 segments of a boundary up onto it.
    const double pos = t / len_ + 1e-9;
    if (pos < 0.0 || pos > static_cast<double>(values_.size()) + 1e-9)
      throw std::invalid_argument("PiecewiseConstantInput::value_at: t outside domain");
    std::size_t idx = static_cast<std::size_t>(std::floor(std::max(pos, 0.0)));
    if (idx >= values_.size()) idx = values_.size() - 1;
    return values_[idx];
  }

  friend bool operator==(const PiecewiseConstantInput& a,
                         const PiecewiseConstantInput& b) {
    return a.len_ == b.len_ && a.values_ == b.values_;
  }
  friend bool operator!=(const PiecewiseConstantInput& a,
                         const PiecewiseConstantInput& b) {
    return !(a == b);
  }
  // Catalog order: value-lexicographic, then segment length.
  friend bool operator<(const PiecewiseConstantInput& a,
                        const PiecewiseConstantInput& b) {
    if (a.values_ != b.values_) return a.values_ < b.values_;
    return a.len_ < b.len_;
  }

 private:
  double len_;
  std::vector<Vec> values_;
};

// Decides membership of the whole trajectory in the rho-trimmed input set;
// for piecewise-constant signals this is segment-value membership.
inline bool trajectory_in_trimmed_set(const PiecewiseConstantInput& u,
                                      const OpenBox& box, double rho) {
  const OpenBox trimmed = trim_box(box, rho);
  for (const Vec& v : u.values())
    if (v.size() != trimmed.dim() || !trimmed.contains(v)) return false;
  return true;
}

}  // namespace trimabs
