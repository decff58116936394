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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "trimabs/matrix.hpp"

namespace trimabs {

// Open axis-aligned box ]lo,hi[ with an inward trimming margin.  The base
// bounds and the accumulated margin are stored separately so that trimming
// twice by r1 and r2 yields bit-identical bounds to trimming once by r1+r2.
// A box whose margin meets or crosses the opposite bound is empty; empties
// are a single distinguished value under equality.
class OpenBox {
 public:
  OpenBox(Vec lower, Vec upper) : lo_(std::move(lower)), hi_(std::move(upper)) {
    if (lo_.empty() || lo_.size() != hi_.size())
      throw std::invalid_argument("OpenBox: bound dimension mismatch");
    for (std::size_t i = 0; i < lo_.size(); ++i) {
      if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]))
        throw std::invalid_argument("OpenBox: non-finite bound");
      if (!(lo_[i] < hi_[i]))
        throw std::invalid_argument("OpenBox: lower bound must be below upper");
    }
  }

  std::size_t dim() const { return lo_.size(); }
  // Effective bounds after trimming.
  double lower(std::size_t i) const { return lo_.at(i) + trim_; }
  double upper(std::size_t i) const { return hi_.at(i) - trim_; }
  double trim_amount() const { return trim_; }

  bool empty() const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(lower(i) < upper(i))) return true;
    return false;
  }

  bool contains(const Vec& p) const {
    if (p.size() != dim())
      throw std::invalid_argument("OpenBox::contains: dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i)
      if (!(p[i] > lower(i) && p[i] < upper(i))) return false;
    return true;
  }

  // Largest coordinate magnitude over the closure; 0 for an empty box.
  double max_abs_bound() const {
    if (empty()) return 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < dim(); ++i)
      m = std::max(m, std::max(std::abs(lower(i)), std::abs(upper(i))));
    return m;
  }

  friend bool operator==(const OpenBox& a, const OpenBox& b) {
    if (a.empty() && b.empty()) return true;
    if (a.empty() != b.empty() || a.dim() != b.dim()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i)
      if (a.lower(i) != b.lower(i) || a.upper(i) != b.upper(i)) return false;
    return true;
  }
  friend bool operator!=(const OpenBox& a, const OpenBox& b) { return !(a == b); }

  friend OpenBox trim_box(const OpenBox& box, double rho);

 private:
  Vec lo_, hi_;
  double trim_ = 0.0;
};

// Points whose closed L-inf ball of radius rho stays inside the box: each
// bound moves inward by rho.
inline OpenBox trim_box(const OpenBox& box, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("trim_box: trim must be a finite value >= 0");
  OpenBox out = box;
  out.trim_ += rho;
  return out;
}

}  // namespace trimabs
