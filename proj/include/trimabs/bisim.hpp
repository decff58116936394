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
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trimabs/abstraction.hpp"
#include "trimabs/box.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"
#include "trimabs/report.hpp"
#include "trimabs/system.hpp"

namespace trimabs {

// Finite metric transition system: states are indices into `outputs`, the
// metric is the infinity norm on outputs, and every input label keeps its
// value trajectory so trimming stays meaningful.
struct FiniteMTS {
  struct Transition {
    std::size_t src = 0;
    std::size_t input = 0;
    std::size_t dst = 0;
    friend auto operator<=>(const Transition&, const Transition&) = default;
    friend bool operator==(const Transition&, const Transition&) = default;
  };

  std::vector<Vec> outputs;
  std::vector<PiecewiseConstantInput> catalog;
  std::vector<Transition> transitions;

  std::size_t size() const { return outputs.size(); }

  void validate() const {
    for (std::size_t s = 1; s < outputs.size(); ++s)
      if (outputs[s].size() != outputs[0].size())
        throw std::invalid_argument("FiniteMTS: inconsistent output dimension");
    for (const Transition& t : transitions) {
      if (t.src >= outputs.size() || t.dst >= outputs.size())
        throw std::invalid_argument("FiniteMTS: transition endpoint out of range");
      if (t.input >= catalog.size())
        throw std::invalid_argument("FiniteMTS: transition label out of range");
    }
  }

  friend bool operator==(const FiniteMTS&, const FiniteMTS&) = default;
};

inline FiniteMTS to_finite_mts(const SymbolicModel& model) {
  FiniteMTS t;
  t.outputs = model.states;
  t.catalog = model.catalog;
  t.transitions.reserve(model.edges.size());
  for (const SymbolicModel::Edge& e : model.edges)
    t.transitions.push_back({e.src, e.input, e.dst});
  return t;
}

// Canonical form for set-level equality: catalog sorted by value order,
// transition labels remapped accordingly, transition set sorted and unique.
inline FiniteMTS canonical_form(FiniteMTS t) {
  t.validate();
  std::vector<std::size_t> order(t.catalog.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return t.catalog[a] < t.catalog[b];
  });
  std::vector<std::size_t> remap(order.size());
  std::vector<PiecewiseConstantInput> sorted;
  sorted.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    remap[order[pos]] = pos;
    sorted.push_back(t.catalog[order[pos]]);
  }
  t.catalog = std::move(sorted);
  for (FiniteMTS::Transition& tr : t.transitions) tr.input = remap[tr.input];
  std::sort(t.transitions.begin(), t.transitions.end());
  t.transitions.erase(std::unique(t.transitions.begin(), t.transitions.end()),
                      t.transitions.end());
  return t;
}

// Candidate (bi)simulation relation: a sorted, deduplicated set of
// (left state, right state) index pairs.
class Relation {
 public:
  using Pair = std::pair<std::size_t, std::size_t>;

  explicit Relation(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  }

  static Relation identity(std::size_t n) {
    std::vector<Pair> p;
    p.reserve(n);
    for (std::size_t i = 0; i < n; ++i) p.emplace_back(i, i);
    return Relation(std::move(p));
  }

  bool empty() const { return pairs_.empty(); }
  const std::vector<Pair>& pairs() const { return pairs_; }

  bool contains(std::size_t a, std::size_t b) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), Pair{a, b});
  }

  Relation inverse() const {
    std::vector<Pair> swapped;
    swapped.reserve(pairs_.size());
    for (const Pair& p : pairs_) swapped.emplace_back(p.second, p.first);
    return Relation(std::move(swapped));
  }

 private:
  std::vector<Pair> pairs_;
};

namespace detail {

inline std::string fmt_vec(const Vec& v) {
  std::string out = "(";
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", v[i]);
    if (i) out += ", ";
    out += buf;
  }
  out += ")";
  return out;
}

inline double output_distance(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

// One-sided check: does T2 simulate T1 up to output distance eps under the
// candidate relation?  The matching input on the T2 side is unconstrained.
inline CheckReport is_approx_simulation(const Relation& r, const FiniteMTS& t1,
                                        const FiniteMTS& t2, double eps) {
  t1.validate();
  t2.validate();
  if (r.empty())
    throw std::domain_error("is_approx_simulation: relation must be non-empty");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("is_approx_simulation: eps must be >= 0");
  if (!t1.outputs.empty() && !t2.outputs.empty() &&
      t1.outputs[0].size() != t2.outputs[0].size())
    throw std::invalid_argument("is_approx_simulation: output spaces differ");
  for (const Relation::Pair& p : r.pairs())
    if (p.first >= t1.size() || p.second >= t2.size())
      throw std::invalid_argument("is_approx_simulation: relation out of range");

  std::vector<std::vector<const FiniteMTS::Transition*>> moves1(t1.size());
  for (const FiniteMTS::Transition& t : t1.transitions)
    moves1[t.src].push_back(&t);
  std::vector<std::vector<std::size_t>> succ2(t2.size());
  for (const FiniteMTS::Transition& t : t2.transitions)
    succ2[t.src].push_back(t.dst);

  CheckReport rep;
  double worst = 0.0;
  for (const Relation::Pair& p : r.pairs()) {
    ++rep.pairs_checked;
    const double d = detail::output_distance(t1.outputs[p.first], t2.outputs[p.second]);
    worst = std::max(worst, d);
    if (!(d <= eps)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "pair (%zu, %zu): output distance %.9g exceeds %.9g",
                    p.first, p.second, d, eps);
      rep.fail(Reason::proximity, buf);
    }
    for (const FiniteMTS::Transition* t : moves1[p.first]) {
      ++rep.transitions_checked;
      bool matched = false;
      for (std::size_t y2 : succ2[p.second])
        if (r.contains(t->dst, y2)) {
          matched = true;
          break;
        }
      if (!matched) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "pair (%zu, %zu): move %zu -[%zu]-> %zu has no matching "
                      "move on the right",
                      p.first, p.second, t->src, t->input, t->dst);
        rep.fail(Reason::no_matching_move, buf);
      }
    }
  }
  rep.metric("epsilon", eps);
  rep.metric("worst_output_distance", worst);
  return rep;
}

// Input-set trimming lifted to a finite system: catalog entries whose value
// trajectory leaves the rho-trimmed box are dropped with their transitions.
inline FiniteMTS trim_model(const FiniteMTS& t, const OpenBox& box, double rho) {
  t.validate();
  std::vector<std::size_t> remap(t.catalog.size(),
                                 std::numeric_limits<std::size_t>::max());
  FiniteMTS out;
  out.outputs = t.outputs;
  for (std::size_t j = 0; j < t.catalog.size(); ++j)
    if (trajectory_in_trimmed_set(t.catalog[j], box, rho)) {
      remap[j] = out.catalog.size();
      out.catalog.push_back(t.catalog[j]);
    }
  for (const FiniteMTS::Transition& tr : t.transitions)
    if (remap[tr.input] != std::numeric_limits<std::size_t>::max())
      out.transitions.push_back({tr.src, remap[tr.input], tr.dst});
  return out;
}

// Two-sided trimmed check: each side, after trimming its own inputs by rho,
// must be simulated by the untrimmed other side.
inline CheckReport is_trimmed_bisim(const FiniteMTS& t, const FiniteMTS& tp,
                                    const Relation& r, double rho, double eps,
                                    const OpenBox& box) {
  const CheckReport forward = is_approx_simulation(r, trim_model(t, box, rho), tp, eps);
  const CheckReport backward =
      is_approx_simulation(r.inverse(), trim_model(tp, box, rho), t, eps);
  CheckReport rep;
  rep.merge(forward, "forward");
  rep.merge(backward, "backward");
  rep.metric("rho", rho);
  rep.metric("epsilon", eps);
  return rep;
}

// Certifies gamma = alpha + beta near-completeness of T-hat with respect to
// T: (i) T-hat must be exactly the beta-trimmed restriction of the witness
// system T', and (ii) the alpha-trimmed T must be simulated by T' under the
// canonical relation pairing output-equal states.
inline CheckReport near_completeness_certificate(const FiniteMTS& t,
                                                 const FiniteMTS& t_hat,
                                                 double alpha, double beta,
                                                 const FiniteMTS& t_prime,
                                                 const OpenBox& box, double eps) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("near_completeness_certificate: alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("near_completeness_certificate: beta must be > 0");
  CheckReport rep;
  const FiniteMTS lhs = canonical_form(trim_model(t_prime, box, beta));
  const FiniteMTS rhs = canonical_form(t_hat);
  if (!(lhs == rhs)) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "beta-trimmed witness differs from the candidate: %zu vs %zu "
                  "states, %zu vs %zu inputs, %zu vs %zu transitions",
                  lhs.size(), rhs.size(), lhs.catalog.size(), rhs.catalog.size(),
                  lhs.transitions.size(), rhs.transitions.size());
    rep.fail(Reason::model_mismatch, buf);
  }
  std::vector<Relation::Pair> pairs;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t_prime.size(); ++j)
      if (detail::output_distance(t.outputs[i], t_prime.outputs[j]) <= 1e-12)
        pairs.emplace_back(i, j);
  if (pairs.empty())
    throw std::domain_error(
        "near_completeness_certificate: no output-equal state pairs");
  const CheckReport sim =
      is_approx_simulation(Relation(std::move(pairs)), trim_model(t, box, alpha),
                           t_prime, eps);
  rep.merge(sim, "completeness");
  rep.metric("alpha", alpha);
  rep.metric("beta", beta);
  rep.metric("gamma", alpha + beta);
  return rep;
}

// Sampling plan for the relational verification of the quantization result.
struct SamplePlan {
  std::size_t state_samples = 100;
  std::size_t input_samples = 50;
  std::uint64_t seed = 0;
  double dt = 1e-3;  // spacing of the supervisory admissibility envelope
};

namespace detail {

inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr std::uint64_t kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                           23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace detail

// Sampled verification of the quantization correspondence: every continuous
// move under a trimmed input is answered by the grid with a supervisory
// follower, and vice versa, landing within eps of each other.  States are
// drawn from a seeded low-discrepancy sequence plus the eps-ball corners
// around their grid anchors, where the worst error directions live.
inline CheckReport check_result1_sampled(const LinearSystem& sys,
                                         const AbstractionParams& params,
                                         const Region& region,
                                         const SamplePlan& plan) {
  const std::size_t n = sys.state_dim();
  const std::size_t m = sys.input_dim();
  if (region.dim() != n)
    throw std::invalid_argument("check_result1_sampled: region dimension mismatch");
  if (params.C.rows() != m || params.C.cols() != n)
    throw std::invalid_argument("check_result1_sampled: feedback shape mismatch");
  if (plan.state_samples == 0 || plan.input_samples == 0)
    throw std::invalid_argument("check_result1_sampled: empty sample plan");
  if (!(plan.dt > 0.0) || !std::isfinite(plan.dt))
    throw std::invalid_argument("check_result1_sampled: dt must be positive");
  if (n > std::size(detail::kHaltonPrimes))
    throw std::invalid_argument("check_result1_sampled: state dimension too large");

  const double eps = params.epsilon;
  const double eta = params.eta;
  const double tau = params.tau;
  const Matrix closed = sys.A + sys.B * params.C;

  // Trimmed quantized input levels, selected evenly across the catalog.
  const OpenBox trimmed = trim_box(sys.input_box, params.rho);
  std::vector<std::vector<double>> levels(m);
  std::size_t total_inputs = 1;
  for (std::size_t d = 0; d < m; ++d) {
    for (double v : sys.quantized_inputs.levels(d))
      if (v > trimmed.lower(d) && v < trimmed.upper(d)) levels[d].push_back(v);
    if (levels[d].empty())
      throw std::invalid_argument(
          "check_result1_sampled: trimmed quantized input set is empty");
    total_inputs *= levels[d].size();
  }
  const std::size_t n_inputs = std::min(total_inputs, plan.input_samples);
  std::vector<Vec> inputs;
  inputs.reserve(n_inputs);
  for (std::size_t t = 0; t < n_inputs; ++t) {
    std::size_t flat = t * total_inputs / n_inputs;
    Vec v(m);
    for (std::size_t d = m; d-- > 0;) {
      v[d] = levels[d][flat % levels[d].size()];
      flat /= levels[d].size();
    }
    inputs.push_back(std::move(v));
  }

  // Sampled continuous states: low-discrepancy points in the region plus the
  // clamped eps-corners of their grid anchors.
  std::vector<Vec> xs;
  xs.reserve(plan.state_samples);
  const std::uint64_t offset = plan.seed % 4096;
  for (std::uint64_t i = 1; xs.size() < plan.state_samples; ++i) {
    Vec x(n);
    for (std::size_t d = 0; d < n; ++d)
      x[d] = region.lower(d) +
             (region.upper(d) - region.lower(d)) *
                 detail::radical_inverse(offset + i, detail::kHaltonPrimes[d]);
    xs.push_back(x);
    const Vec anchor = quantize_state(x, eta);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      if (xs.size() >= plan.state_samples) break;
      Vec corner(n);
      for (std::size_t d = 0; d < n; ++d) {
        const double raw = anchor[d] + ((mask >> d) & 1 ? eps : -eps);
        corner[d] = std::min(std::max(raw, region.lower(d)), region.upper(d));
      }
      xs.push_back(std::move(corner));
    }
  }

  // One-step transition maps and the supervisory error envelope.
  const Discretization step = discretize(sys.A, sys.B, tau);
  const Matrix err_map = mat_exp(closed, tau);
  const std::size_t env_samples =
      static_cast<std::size_t>(std::ceil(tau / plan.dt - 1e-9));
  std::vector<Matrix> gains;  // C exp((A+BC) t) on the dt grid plus t = tau
  gains.reserve(env_samples + 2);
  {
    const Matrix phi = mat_exp(closed, plan.dt);
    Matrix acc = Matrix::identity(n);
    gains.push_back(params.C * acc);
    for (std::size_t i = 1; i <= env_samples; ++i) {
      acc = acc * phi;
      gains.push_back(params.C * acc);
    }
    gains.push_back(params.C * err_map);
  }

  CheckReport rep;
  double worst_fwd = 0.0, worst_bwd = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();

  auto envelope = [&](const Vec& e0, Vec& lo, Vec& hi) {
    lo.assign(m, std::numeric_limits<double>::infinity());
    hi.assign(m, -std::numeric_limits<double>::infinity());
    for (const Matrix& k : gains) {
      const Vec ke = mat_vec(k, e0);
      for (std::size_t j = 0; j < m; ++j) {
        lo[j] = std::min(lo[j], ke[j]);
        hi[j] = std::max(hi[j], ke[j]);
      }
    }
  };

  auto admissible = [&](const Vec& v, const Vec& lo, const Vec& hi,
                        double& margin, std::size_t& bad_dim) {
    margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double head = sys.input_box.upper(j) - (v[j] + hi[j]);
      const double foot = (v[j] + lo[j]) - sys.input_box.lower(j);
      const double local = std::min(head, foot);
      if (local < margin) {
        margin = local;
        bad_dim = j;
      }
    }
    return margin > 0.0;
  };

  for (const Vec& x : xs) {
    // Grid anchors within eps of x.
    std::vector<Vec> anchors;
    {
      std::vector<std::vector<double>> coords(n);
      for (std::size_t d = 0; d < n; ++d) {
        const long long klo =
            static_cast<long long>(std::ceil((x[d] - eps) / eta - 1e-9));
        const long long khi =
            static_cast<long long>(std::floor((x[d] + eps) / eta + 1e-9));
        for (long long k = klo; k <= khi; ++k) {
          const double g = static_cast<double>(k) * eta;
          if (std::abs(x[d] - g) <= eps + 1e-12) coords[d].push_back(g);
        }
      }
      std::vector<std::size_t> odo(n, 0);
      bool done = false;
      for (std::size_t d = 0; d < n; ++d) done = done || coords[d].empty();
      while (!done) {
        Vec g(n);
        for (std::size_t d = 0; d < n; ++d) g[d] = coords[d][odo[d]];
        anchors.push_back(std::move(g));
        std::size_t d = n;
        while (d-- > 0) {
          if (++odo[d] < coords[d].size()) break;
          odo[d] = 0;
          if (d == 0) done = true;
        }
      }
    }

    for (const Vec& g : anchors) {
      ++rep.pairs_checked;
      Vec follow_err(n);  // initial follower error g - x
      for (std::size_t d = 0; d < n; ++d) follow_err[d] = g[d] - x[d];
      Vec lo_fwd, hi_fwd;
      envelope(follow_err, lo_fwd, hi_fwd);
      // The reverse direction flips the error sign, which mirrors the band.
      Vec lo_bwd(m), hi_bwd(m);
      for (std::size_t j = 0; j < m; ++j) {
        lo_bwd[j] = -hi_fwd[j];
        hi_bwd[j] = -lo_fwd[j];
      }
      const Vec drift_fwd = mat_vec(err_map, follow_err);

      for (const Vec& v : inputs) {
        const Vec gv = mat_vec(step.G, v);

        // Continuous leader x, grid follower from g.
        ++rep.transitions_checked;
        Vec x_plus = mat_vec(step.E, x);
        for (std::size_t d = 0; d < n; ++d) x_plus[d] += gv[d];
        double margin;
        std::size_t bad_dim = 0;
        if (!admissible(v, lo_fwd, hi_fwd, margin, bad_dim)) {
          rep.fail(Reason::bounds_violation,
                   "x=" + detail::fmt_vec(x) + " g=" + detail::fmt_vec(g) +
                       " u=" + detail::fmt_vec(v) +
                       ": grid follower input leaves the box in component " +
                       std::to_string(bad_dim));
        }
        min_margin = std::min(min_margin, margin);
        Vec y_plus(n);
        for (std::size_t d = 0; d < n; ++d) y_plus[d] = x_plus[d] + drift_fwd[d];
        const Vec g_hat = quantize_state(y_plus, eta);
        const double prox = detail::output_distance(x_plus, g_hat);
        worst_fwd = std::max(worst_fwd, prox);
        if (!(prox <= eps)) {
          char buf[80];
          std::snprintf(buf, sizeof buf, ": endpoint distance %.9g > %.9g", prox,
                        eps);
          rep.fail(Reason::proximity, "x=" + detail::fmt_vec(x) +
                                          " g=" + detail::fmt_vec(g) +
                                          " u=" + detail::fmt_vec(v) + buf);
        }

        // Grid leader g, continuous follower from x.
        ++rep.transitions_checked;
        Vec reach_g = mat_vec(step.E, g);
        for (std::size_t d = 0; d < n; ++d) reach_g[d] += gv[d];
        const Vec g_hat2 = quantize_state(reach_g, eta);
        if (!admissible(v, lo_bwd, hi_bwd, margin, bad_dim)) {
          rep.fail(Reason::bounds_violation,
                   "x=" + detail::fmt_vec(x) + " g=" + detail::fmt_vec(g) +
                       " u=" + detail::fmt_vec(v) +
                       ": continuous follower input leaves the box in "
                       "component " +
                       std::to_string(bad_dim));
        }
        min_margin = std::min(min_margin, margin);
        Vec x_plus2(n);
        for (std::size_t d = 0; d < n; ++d)
          x_plus2[d] = reach_g[d] - drift_fwd[d];
        const double prox2 = detail::output_distance(x_plus2, g_hat2);
        worst_bwd = std::max(worst_bwd, prox2);
        if (!(prox2 <= eps)) {
          char buf[80];
          std::snprintf(buf, sizeof buf, ": endpoint distance %.9g > %.9g",
                        prox2, eps);
          rep.fail(Reason::proximity, "x=" + detail::fmt_vec(x) +
                                          " g=" + detail::fmt_vec(g) +
                                          " u=" + detail::fmt_vec(v) + buf);
        }
      }
    }
  }

  rep.metric("epsilon", eps);
  rep.metric("eta", eta);
  rep.metric("tau", tau);
  rep.metric("state_samples", static_cast<double>(xs.size()));
  rep.metric("inputs_used", static_cast<double>(inputs.size()));
  rep.metric("worst_proximity_forward", worst_fwd);
  rep.metric("worst_proximity_backward", worst_bwd);
  rep.metric("min_supervisory_margin", min_margin);
  rep.metric("seed", static_cast<double>(plan.seed));
  rep.notes.push_back("seed=" + std::to_string(plan.seed));
  return rep;
}

}  // namespace trimabs
