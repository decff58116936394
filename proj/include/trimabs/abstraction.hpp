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
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trimabs/box.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"
#include "trimabs/system.hpp"

namespace trimabs {

// Closed rectangular region of the state space over which a symbolic model
// is built.  Degenerate (single point) intervals are allowed.
class Region {
 public:
  Region(Vec lower, Vec upper) : lo_(std::move(lower)), hi_(std::move(upper)) {
    if (lo_.empty() || lo_.size() != hi_.size())
      throw std::invalid_argument("Region: bound dimensions do not match");
    for (std::size_t i = 0; i < lo_.size(); ++i) {
      if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]))
        throw std::invalid_argument("Region: bounds must be finite");
      if (!(lo_[i] <= hi_[i]))
        throw std::invalid_argument("Region: lower bound exceeds upper bound");
    }
  }

  std::size_t dim() const { return lo_.size(); }
  double lower(std::size_t i) const { return lo_.at(i); }
  double upper(std::size_t i) const { return hi_.at(i); }

  bool contains(const Vec& p, double tol = 0.0) const {
    if (p.size() != lo_.size())
      throw std::invalid_argument("Region::contains: dimension mismatch");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!(p[i] >= lo_[i] - tol) || !(p[i] <= hi_[i] + tol)) return false;
    return true;
  }

  friend bool operator==(const Region& a, const Region& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }
  friend bool operator!=(const Region& a, const Region& b) { return !(a == b); }

 private:
  Vec lo_, hi_;
};

// Radius removed from the input set so that supervisory corrections of the
// form u + C e stay admissible whenever the tracking error stays below
// epsilon in the infinity norm.
inline double compute_trim(const Matrix& C, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("compute_trim: epsilon must be positive");
  return induced_inf_norm(C) * epsilon;
}

// Value of the contraction certificate at horizon tau.  A horizon is
// admissible when this value drops strictly below eta / 2.
inline double tau_certificate(const Matrix& A, const Matrix& B, const Matrix& C,
                              double epsilon, double tau) {
  return epsilon * induced_inf_norm(mat_exp(A + B * C, tau));
}

// Smallest multiple of tau_step, up to tau_max, at which the contraction
// certificate holds.  Throws when no grid point qualifies, naming the best
// value achieved so the caller can loosen eta or push tau_max out.
inline double synth_tau(const Matrix& A, const Matrix& B, const Matrix& C,
                        double epsilon, double eta, double tau_step,
                        double tau_max) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("synth_tau: epsilon must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("synth_tau: eta must be positive");
  if (!(tau_step > 0.0) || !std::isfinite(tau_step))
    throw std::invalid_argument("synth_tau: tau_step must be positive");
  if (!(tau_max > 0.0) || !std::isfinite(tau_max))
    throw std::invalid_argument("synth_tau: tau_max must be positive");
  if (!is_hurwitz(A + B * C))
    throw std::invalid_argument("synth_tau: closed loop A + B C is not Hurwitz");
  double best = std::numeric_limits<double>::infinity();
  double best_tau = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double tau = static_cast<double>(k) * tau_step;
    if (tau > tau_max * (1.0 + 1e-12)) break;
    const double value = tau_certificate(A, B, C, epsilon, tau);
    if (value < best) {
      best = value;
      best_tau = tau;
    }
    if (value < eta / 2.0) return tau;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "synth_tau: no admissible horizon up to %.9g; best certificate "
                "value %.9g at horizon %.9g (needs < %.9g)",
                tau_max, best, best_tau, eta / 2.0);
  throw NumericalError(buf);
}

// Convenience overload: search up to 100 closed-loop time constants.
inline double synth_tau(const Matrix& A, const Matrix& B, const Matrix& C,
                        double epsilon, double eta, double tau_step = 0.01) {
  if (!is_hurwitz(A + B * C))
    throw std::invalid_argument("synth_tau: closed loop A + B C is not Hurwitz");
  const double rate = -max_real_part(A + B * C);
  return synth_tau(A, B, C, epsilon, eta, tau_step, 100.0 / rate);
}

// Bundle of abstraction parameters.  `certified` records whether the
// contraction certificate holds at the stored horizon.
struct AbstractionParams {
  double epsilon = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  Matrix C = Matrix(1, 1);
  double certificate = 0.0;
  bool certified = false;
};

inline AbstractionParams make_params(const Matrix& A, const Matrix& B,
                                     const Matrix& C, double epsilon, double eta,
                                     double tau, bool strict_eta_half = false,
                                     bool allow_uncertified = false) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("make_params: epsilon must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("make_params: eta must be positive");
  if (strict_eta_half) {
    if (!(eta < epsilon / 2.0))
      throw std::invalid_argument("make_params: eta must be below epsilon / 2");
  } else if (!(eta < epsilon)) {
    throw std::invalid_argument("make_params: eta must be below epsilon");
  }
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("make_params: tau must be positive");
  if (C.rows() != B.cols() || C.cols() != A.rows())
    throw std::invalid_argument("make_params: feedback gain has wrong shape");
  if (!is_hurwitz(A + B * C))
    throw std::invalid_argument("make_params: closed loop A + B C is not Hurwitz");
  AbstractionParams p;
  p.epsilon = epsilon;
  p.eta = eta;
  p.tau = tau;
  p.rho = compute_trim(C, epsilon);
  p.C = C;
  p.certificate = tau_certificate(A, B, C, epsilon, tau);
  p.certified = p.certificate < eta / 2.0;
  if (!p.certified && !allow_uncertified) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "make_params: certificate value %.9g at horizon %.9g does not "
                  "beat %.9g",
                  p.certificate, tau, eta / 2.0);
    throw std::invalid_argument(buf);
  }
  return p;
}

namespace detail {

// Index of the nearest grid multiple of eta; a coordinate exactly halfway
// between two multiples rounds toward minus infinity.
inline long long quantize_index(double x, double eta) {
  if (!std::isfinite(x))
    throw std::invalid_argument("quantize_index: coordinate must be finite");
  const double r = x / eta - 0.5;
  const double c = std::ceil(r);
  if (std::abs(c) > 9.0e15)
    throw std::invalid_argument("quantize_index: coordinate out of range");
  return static_cast<long long>(c);
}

constexpr double kGridSnap = 1e-9;

}  // namespace detail

// Nearest point of the eta grid, ties toward minus infinity per coordinate.
inline Vec quantize_state(const Vec& x, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("quantize_state: eta must be positive");
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    g[i] = static_cast<double>(detail::quantize_index(x[i], eta)) * eta;
  return g;
}

// Finite transition system over the eta grid restricted to a region, with
// one edge per (state, catalog input) pair whose successor stays inside.
struct SymbolicModel {
  struct Edge {
    std::size_t src = 0;
    std::size_t input = 0;
    std::size_t dst = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  struct Escape {
    std::size_t src = 0;
    std::size_t input = 0;
    Vec successor;
    friend bool operator==(const Escape&, const Escape&) = default;
  };

  double eta = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  std::vector<Vec> states;                         // grid points, lexicographic
  std::vector<std::vector<long long>> state_indices;  // parallel integer coords
  std::vector<PiecewiseConstantInput> catalog;     // deduplicated, ordered
  std::vector<Edge> edges;                         // sorted by (src, input)
  std::vector<Escape> out_of_region;               // successors leaving region
  std::vector<std::string> warnings;

  friend bool operator==(const SymbolicModel& a, const SymbolicModel& b) {
    return a.eta == b.eta && a.tau == b.tau && a.rho == b.rho &&
           a.states == b.states && a.state_indices == b.state_indices &&
           a.catalog == b.catalog && a.edges == b.edges &&
           a.out_of_region == b.out_of_region && a.warnings == b.warnings;
  }
};

struct BuildOptions {
  std::size_t catalog_cap = 10000;
  std::size_t input_segments = 1;
  // Overrides the trim radius used for the input catalog only; the tighter
  // near-completeness checks compare a model built with no trim against one
  // built with the full trim.
  std::optional<double> catalog_trim;
};

namespace detail {

inline std::pair<long long, long long> region_index_range(double lo, double hi,
                                                          double eta) {
  const long long kmin =
      static_cast<long long>(std::ceil(lo / eta - kGridSnap));
  const long long kmax =
      static_cast<long long>(std::floor(hi / eta + kGridSnap));
  return {kmin, kmax};
}

}  // namespace detail

inline SymbolicModel build_symbolic_model(const LinearSystem& sys,
                                          const AbstractionParams& params,
                                          const Region& region,
                                          const BuildOptions& opts = {}) {
  const std::size_t n = sys.state_dim();
  const std::size_t m = sys.input_dim();
  if (region.dim() != n)
    throw std::invalid_argument("build_symbolic_model: region dimension mismatch");
  if (params.C.rows() != m || params.C.cols() != n)
    throw std::invalid_argument("build_symbolic_model: feedback gain shape mismatch");
  if (opts.catalog_cap == 0)
    throw std::invalid_argument("build_symbolic_model: catalog cap must be positive");
  if (opts.input_segments == 0)
    throw std::invalid_argument("build_symbolic_model: input_segments must be positive");

  SymbolicModel model;
  model.eta = params.eta;
  model.tau = params.tau;

  // Re-verify the contraction certificate; an uncertified horizon is allowed
  // only when the parameters were built that way, and is flagged loudly.
  const double cert =
      tau_certificate(sys.A, sys.B, params.C, params.epsilon, params.tau);
  if (!(cert < params.eta / 2.0)) {
    if (params.certified)
      throw std::invalid_argument(
          "build_symbolic_model: parameters claim a certified horizon but the "
          "certificate fails");
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "horizon %.9g is not certified: certificate value %.9g needs "
                  "< %.9g; soundness of the model is not guaranteed",
                  params.tau, cert, params.eta / 2.0);
    model.warnings.emplace_back(buf);
  }

  // Input catalog: quantized levels surviving the trimmed input set, one
  // grid choice per segment of the horizon.
  const double rho_cat = opts.catalog_trim.value_or(params.rho);
  const OpenBox trimmed = trim_box(sys.input_box, rho_cat);
  model.rho = rho_cat;
  std::vector<std::vector<double>> levels(m);
  for (std::size_t d = 0; d < m; ++d) {
    for (double v : sys.quantized_inputs.levels(d))
      if (v > trimmed.lower(d) && v < trimmed.upper(d)) levels[d].push_back(v);
    if (levels[d].empty())
      throw std::invalid_argument(
          "build_symbolic_model: trimmed quantized input set is empty; use a "
          "smaller epsilon or a finer input grid");
  }
  const std::size_t digits = opts.input_segments * m;
  auto level_count = [&](std::size_t digit) { return levels[digit % m].size(); };
  std::size_t total = 1;
  bool overflow = false;
  for (std::size_t p = 0; p < digits; ++p) {
    const std::size_t c = level_count(p);
    if (total > (std::numeric_limits<std::size_t>::max() / c)) {
      overflow = true;
      break;
    }
    total *= c;
  }
  const std::size_t emit =
      overflow ? opts.catalog_cap : std::min(total, opts.catalog_cap);
  if (overflow || total > opts.catalog_cap) {
    char buf[120];
    if (overflow)
      std::snprintf(buf, sizeof buf, "input catalog truncated to %zu entries",
                    emit);
    else
      std::snprintf(buf, sizeof buf,
                    "input catalog truncated to %zu of %zu entries", emit,
                    total);
    model.warnings.emplace_back(buf);
  }
  const double chunk = params.tau / static_cast<double>(opts.input_segments);
  std::vector<std::size_t> odo(digits, 0);
  model.catalog.reserve(emit);
  for (std::size_t count = 0; count < emit; ++count) {
    std::vector<Vec> vals(opts.input_segments, Vec(m));
    for (std::size_t p = 0; p < digits; ++p)
      vals[p / m][p % m] = levels[p % m][odo[p]];
    model.catalog.emplace_back(chunk, std::move(vals));
    for (std::size_t p = digits; p-- > 0;) {
      if (++odo[p] < level_count(p)) break;
      odo[p] = 0;
    }
  }

  // States: every eta grid point inside the closed region, lexicographic.
  std::vector<std::pair<long long, long long>> ranges(n);
  std::size_t n_states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    ranges[i] = detail::region_index_range(region.lower(i), region.upper(i),
                                           params.eta);
    if (ranges[i].second < ranges[i].first) {
      n_states = 0;
      break;
    }
    n_states *= static_cast<std::size_t>(ranges[i].second - ranges[i].first + 1);
  }
  if (n_states > 0) {
    std::vector<long long> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = ranges[i].first;
    model.states.reserve(n_states);
    model.state_indices.reserve(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
      Vec coords(n);
      for (std::size_t i = 0; i < n; ++i)
        coords[i] = static_cast<double>(idx[i]) * params.eta;
      model.states.push_back(std::move(coords));
      model.state_indices.push_back(idx);
      for (std::size_t i = n; i-- > 0;) {
        if (++idx[i] <= ranges[i].second) break;
        idx[i] = ranges[i].first;
      }
    }
  }

  // Strides map an in-region index tuple back to its position in `states`.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n - 1; i-- > 0;)
    stride[i] = stride[i + 1] *
                static_cast<std::size_t>(ranges[i + 1].second -
                                         ranges[i + 1].first + 1);

  // Edges: step the discretization through the catalog segments, exactly as
  // the continuous-side reachability does, then quantize the endpoint.
  const Discretization d = discretize(sys.A, sys.B, chunk);
  for (std::size_t s = 0; s < model.states.size(); ++s) {
    for (std::size_t j = 0; j < model.catalog.size(); ++j) {
      Vec x = model.states[s];
      for (const Vec& v : model.catalog[j].values()) {
        Vec next = mat_vec(d.E, x);
        const Vec drive = mat_vec(d.G, v);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += drive[i];
        x = std::move(next);
      }
      bool inside = true;
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const long long k = detail::quantize_index(x[i], params.eta);
        if (k < ranges[i].first || k > ranges[i].second) {
          inside = false;
          break;
        }
        pos += static_cast<std::size_t>(k - ranges[i].first) * stride[i];
      }
      if (inside)
        model.edges.push_back({s, j, pos});
      else
        model.out_of_region.push_back({s, j, x});
    }
  }
  return model;
}

// Drops catalog entries that are not grid levels inside the trimmed input
// set; edges and escape records are remapped onto the surviving entries.
inline SymbolicModel restrict_to_quantized_inputs(const SymbolicModel& model,
                                                  const InputGrid& grid,
                                                  const OpenBox& box,
                                                  double rho) {
  const OpenBox trimmed = trim_box(box, rho);
  if (grid.dims() != trimmed.dim())
    throw std::invalid_argument(
        "restrict_to_quantized_inputs: grid dimension mismatch");
  auto on_grid = [&](double v, std::size_t d) {
    const std::vector<double>& lv = grid.levels(d);
    auto it = std::lower_bound(lv.begin(), lv.end(), v - detail::kGridSnap);
    return it != lv.end() && std::abs(*it - v) <= detail::kGridSnap;
  };
  std::vector<std::size_t> remap(model.catalog.size(),
                                 std::numeric_limits<std::size_t>::max());
  SymbolicModel out;
  out.eta = model.eta;
  out.tau = model.tau;
  out.rho = rho;
  out.states = model.states;
  out.state_indices = model.state_indices;
  out.warnings = model.warnings;
  for (std::size_t j = 0; j < model.catalog.size(); ++j) {
    const PiecewiseConstantInput& u = model.catalog[j];
    if (u.dims() != grid.dims()) continue;
    bool keep = true;
    for (const Vec& v : u.values()) {
      for (std::size_t d = 0; d < v.size() && keep; ++d)
        keep = v[d] > trimmed.lower(d) && v[d] < trimmed.upper(d) &&
               on_grid(v[d], d);
      if (!keep) break;
    }
    if (keep) {
      remap[j] = out.catalog.size();
      out.catalog.push_back(u);
    }
  }
  for (const SymbolicModel::Edge& e : model.edges)
    if (remap[e.input] != std::numeric_limits<std::size_t>::max())
      out.edges.push_back({e.src, remap[e.input], e.dst});
  for (const SymbolicModel::Escape& e : model.out_of_region)
    if (remap[e.input] != std::numeric_limits<std::size_t>::max())
      out.out_of_region.push_back({e.src, remap[e.input], e.successor});
  return out;
}

// Keeps, per state, only the first input (in catalog order) reaching each
// distinct successor.  Successor sets are preserved exactly; the catalog
// itself is left untouched so labels stay comparable across models.
inline SymbolicModel reduce_edges(const SymbolicModel& model) {
  SymbolicModel out = model;
  out.edges.clear();
  std::size_t begin = 0;
  while (begin < model.edges.size()) {
    std::size_t end = begin;
    while (end < model.edges.size() &&
           model.edges[end].src == model.edges[begin].src)
      ++end;
    std::vector<std::size_t> seen;
    for (std::size_t k = begin; k < end; ++k) {
      const SymbolicModel::Edge& e = model.edges[k];
      if (std::find(seen.begin(), seen.end(), e.dst) == seen.end()) {
        seen.push_back(e.dst);
        out.edges.push_back(e);
      }
    }
    begin = end;
  }
  return out;
}

inline void write_model(const SymbolicModel& model, std::ostream& os) {
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    os << buf;
  };
  os << "eta=";
  put(model.eta);
  os << "\ntau=";
  put(model.tau);
  os << "\nrho=";
  put(model.rho);
  os << "\n";
  for (std::size_t s = 0; s < model.states.size(); ++s) {
    os << "state " << s;
    for (double c : model.states[s]) {
      os << ' ';
      put(c);
    }
    os << "\n";
  }
  for (std::size_t j = 0; j < model.catalog.size(); ++j) {
    os << "input " << j << ' ';
    put(model.catalog[j].segment_length());
    for (const Vec& v : model.catalog[j].values())
      for (double c : v) {
        os << ' ';
        put(c);
      }
    os << "\n";
  }
  for (const SymbolicModel::Edge& e : model.edges)
    os << "edge " << e.src << ' ' << e.input << ' ' << e.dst << "\n";
}

inline void write_graph(const SymbolicModel& model, std::ostream& os) {
  os << "digraph symbolic {\n";
  for (const SymbolicModel::Edge& e : model.edges)
    os << "  " << e.src << " -> " << e.dst << " [label=\"" << e.input
       << "\"];\n";
  os << "}\n";
}

}  // namespace trimabs
