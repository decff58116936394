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
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "trimabs/box.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"

namespace trimabs {

// The plant: dx/dt = Ax + Bu with u confined to an open box and, for the
// quantized variant, to a finite level grid inside it.
struct LinearSystem {
  Matrix A;
  Matrix B;
  OpenBox input_box;
  InputGrid quantized_inputs;
  double h;  // canonical input segment length

  LinearSystem(Matrix a, Matrix b, OpenBox box, InputGrid grid, double seg_len)
      : A(std::move(a)),
        B(std::move(b)),
        input_box(std::move(box)),
        quantized_inputs(std::move(grid)),
        h(seg_len) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LinearSystem: A not square");
    if (B.rows() != A.rows())
      throw std::invalid_argument("LinearSystem: B row count mismatch");
    if (input_box.dim() != B.cols())
      throw std::invalid_argument("LinearSystem: input box dimension mismatch");
    if (input_box.empty())
      throw std::invalid_argument("LinearSystem: input box is empty");
    if (quantized_inputs.dims() != B.cols())
      throw std::invalid_argument("LinearSystem: input grid dimension mismatch");
    for (std::size_t d = 0; d < quantized_inputs.dims(); ++d)
      for (double v : quantized_inputs.levels(d))
        if (!(v > input_box.lower(d) && v < input_box.upper(d)))
          throw std::invalid_argument("LinearSystem: grid level outside input box");
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("LinearSystem: segment length must be > 0");
  }

  std::size_t state_dim() const { return A.rows(); }
  std::size_t input_dim() const { return B.cols(); }
};

// One-step transition pair: x(t+delta) = E x(t) + G v for constant input v.
struct Discretization {
  Matrix E;
  Matrix G;
};

// E = exp(A*delta), G = integral of exp(A s) ds * B, both from one augmented
// exponential so singular A needs no special case.
inline Discretization discretize(const Matrix& A, const Matrix& B, double delta) {
  if (A.rows() != A.cols() || B.rows() != A.rows())
    throw std::invalid_argument("discretize: dimension mismatch");
  const std::size_t n = A.rows(), m = B.cols();
  Matrix aug(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = A(i, j);
    for (std::size_t j = 0; j < m; ++j) aug(i, n + j) = B(i, j);
  }
  const Matrix big = mat_exp(aug, delta);
  Discretization d{Matrix(n, n), Matrix(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.E(i, j) = big(i, j);
    for (std::size_t j = 0; j < m; ++j) d.G(i, j) = big(i, n + j);
  }
  return d;
}

namespace detail {

// Segment count of tau on a grid of the given spacing; rejects misalignment.
inline std::size_t aligned_steps(double tau, double spacing, double rel_tol,
                                 const char* what) {
  const double ratio = tau / spacing;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) ||
      std::abs(ratio - rounded) > rel_tol * std::max(1.0, std::abs(ratio)))
    throw std::invalid_argument(std::string(what) +
                                ": horizon is not a positive step multiple");
  return static_cast<std::size_t>(rounded);
}

// Memoizes (E, G) per step length; step lengths repeat heavily during a run.
class StepCache {
 public:
  StepCache(const Matrix& a, const Matrix& b) : a_(a), b_(b) {}
  const Discretization& at(double delta) {
    auto it = cache_.find(delta);
    if (it == cache_.end())
      it = cache_.emplace(delta, discretize(a_, b_, delta)).first;
    return it->second;
  }

 private:
  const Matrix& a_;
  const Matrix& b_;
  std::map<double, Discretization> cache_;
};

}  // namespace detail

// Endpoint of the state trajectory from x0 under u after time tau, stepped
// segment-exactly over u's constancy intervals.
inline Vec reach(const LinearSystem& sys, const Vec& x0,
                 const PiecewiseConstantInput& u, double tau) {
  if (x0.size() != sys.state_dim())
    throw std::invalid_argument("reach: state dimension mismatch");
  if (u.dims() != sys.input_dim())
    throw std::invalid_argument("reach: input dimension mismatch");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("reach: horizon must be > 0");
  if (tau > u.duration() + 1e-9 * std::max(1.0, tau))
    throw std::invalid_argument("reach: input does not cover the horizon");
  const std::size_t steps = detail::aligned_steps(tau, u.segment_length(), 1e-12, "reach");
  const Discretization d = discretize(sys.A, sys.B, u.segment_length());
  Vec x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    Vec next = mat_vec(d.E, x);
    const Vec drive = mat_vec(d.G, u.values()[k]);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += drive[i];
    x = std::move(next);
  }
  return x;
}

struct TrajectoryTrace {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
};

// CSV with header t,x1..xn,u1..um, one row per sample, %.9g throughout.
inline void write_csv(const TrajectoryTrace& trace, std::ostream& os) {
  if (trace.times.empty() || trace.times.size() != trace.states.size() ||
      trace.times.size() != trace.inputs.size())
    throw std::invalid_argument("write_csv: inconsistent trace");
  const std::size_t n = trace.states.front().size();
  const std::size_t m = trace.inputs.front().size();
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",u" << i;
  os << "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    put(trace.times[k]);
    for (double v : trace.states[k]) {
      os << ",";
      put(v);
    }
    for (double v : trace.inputs[k]) {
      os << ",";
      put(v);
    }
    os << "\n";
  }
}

struct InputTrace {
  std::vector<double> times;
  std::vector<Vec> values;
};

struct SupervisoryRun {
  TrajectoryTrace tracked;    // y, with the supervisory input column
  TrajectoryTrace reference;  // x, with the nominal input column
  InputTrace supervisory;
};

// Co-integrates the reference x (driven by u) and the tracked state y (driven
// by u + C(y-x)) as one augmented linear system, stepped exactly per constancy
// interval; samples every dt.
inline SupervisoryRun simulate_supervisory(const LinearSystem& sys, const Matrix& C,
                                           const Vec& y0, const Vec& x0,
                                           const PiecewiseConstantInput& u, double tau,
                                           double dt) {
  const std::size_t n = sys.state_dim(), m = sys.input_dim();
  if (C.rows() != m || C.cols() != n)
    throw std::invalid_argument("simulate_supervisory: C dimension mismatch");
  if (y0.size() != n || x0.size() != n)
    throw std::invalid_argument("simulate_supervisory: state dimension mismatch");
  if (u.dims() != m)
    throw std::invalid_argument("simulate_supervisory: input dimension mismatch");
  if (!(dt > 0.0) || dt > sys.h * (1 + 1e-12))
    throw std::invalid_argument("simulate_supervisory: need 0 < dt <= h");
  if (!(tau > 0.0) || tau > u.duration() + 1e-9 * std::max(1.0, tau))
    throw std::invalid_argument("simulate_supervisory: input does not cover horizon");
  const std::size_t steps =
      detail::aligned_steps(tau, dt, 1e-9, "simulate_supervisory");

  // d/dt [x; y] = [[A, 0], [-BC, A+BC]] [x; y] + [B; B] u
  const Matrix BC = sys.B * C;
  Matrix big_a(2 * n, 2 * n);
  Matrix big_b(2 * n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      big_a(i, j) = sys.A(i, j);
      big_a(n + i, j) = -BC(i, j);
      big_a(n + i, n + j) = sys.A(i, j) + BC(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) {
      big_b(i, j) = sys.B(i, j);
      big_b(n + i, j) = sys.B(i, j);
    }
  }
  detail::StepCache cache(big_a, big_b);

  Vec z(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = x0[i];
    z[n + i] = y0[i];
  }

  SupervisoryRun run;
  const double seg = u.segment_length();
  auto record = [&](double t) {
    Vec x(z.begin(), z.begin() + n), y(z.begin() + n, z.end());
    const Vec uv = u.value_at(std::min(t, u.duration()));
    Vec e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = y[i] - x[i];
    Vec usup = mat_vec(C, e);
    for (std::size_t i = 0; i < m; ++i) usup[i] += uv[i];
    run.reference.times.push_back(t);
    run.reference.states.push_back(std::move(x));
    run.reference.inputs.push_back(uv);
    run.tracked.times.push_back(t);
    run.tracked.states.push_back(std::move(y));
    run.tracked.inputs.push_back(usup);
    run.supervisory.times.push_back(t);
    run.supervisory.values.push_back(std::move(usup));
  };

  record(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double t1 = (k + 1 == steps) ? tau : static_cast<double>(k + 1) * dt;
    double t = t0;
    while (t < t1 - 1e-12 * std::max(1.0, t1)) {
      // Next input-constancy boundary strictly inside (t, t1), if any.
      double cut = (std::floor(t / seg + 1e-9) + 1.0) * seg;
      while (cut <= t) cut += seg;
      if (!(cut < t1 - 1e-12 * std::max(1.0, t1))) cut = t1;
      const Discretization& d = cache.at(cut - t);
      Vec next = mat_vec(d.E, z);
      const Vec drive = mat_vec(d.G, u.value_at(std::min((t + cut) / 2, u.duration())));
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += drive[i];
      z = std::move(next);
      t = cut;
    }
    record(t1);
  }
  return run;
}

struct BoundsCheck {
  bool ok = true;
  std::optional<double> first_violation;
  Vec offending_value;
};

// Samples the supervisory input u + C exp((A+BC)t)(y0-x0) every dt over [0,tau]
// and reports the earliest sample leaving the open input box.
inline BoundsCheck supervisory_in_bounds(const LinearSystem& sys, const Matrix& C,
                                         const Vec& y0, const Vec& x0,
                                         const PiecewiseConstantInput& u, double tau,
                                         double dt) {
  const std::size_t n = sys.state_dim(), m = sys.input_dim();
  if (C.rows() != m || C.cols() != n)
    throw std::invalid_argument("supervisory_in_bounds: C dimension mismatch");
  if (y0.size() != n || x0.size() != n)
    throw std::invalid_argument("supervisory_in_bounds: state dimension mismatch");
  if (!(dt > 0.0) || dt > sys.h * (1 + 1e-12))
    throw std::invalid_argument("supervisory_in_bounds: need 0 < dt <= h");
  if (!(tau > 0.0) || tau > u.duration() + 1e-9 * std::max(1.0, tau))
    throw std::invalid_argument("supervisory_in_bounds: input does not cover horizon");
  const std::size_t steps =
      detail::aligned_steps(tau, dt, 1e-9, "supervisory_in_bounds");

  const Matrix closed = sys.A + sys.B * C;
  const Matrix phi = mat_exp(closed, dt);
  Vec e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = y0[i] - x0[i];

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = (k == steps) ? tau : static_cast<double>(k) * dt;
    const Vec uv = u.value_at(std::min(t, u.duration()));
    Vec usup = mat_vec(C, e);
    for (std::size_t i = 0; i < m; ++i) usup[i] += uv[i];
    if (!sys.input_box.contains(usup))
      return BoundsCheck{false, t, std::move(usup)};
    e = mat_vec(phi, e);
  }
  return BoundsCheck{};
}

// Piecewise-constant input on segment length h whose value on segment k is the
// grid level nearest the trace value at the segment start.
inline PiecewiseConstantInput quantize_feedback(const InputTrace& trace,
                                                const InputGrid& grid, double h) {
  if (trace.times.empty() || trace.times.size() != trace.values.size())
    throw std::invalid_argument("quantize_feedback: inconsistent trace");
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("quantize_feedback: segment length must be > 0");
  const double duration = trace.times.back();
  const std::size_t segments =
      static_cast<std::size_t>(std::floor(duration / h + 1e-9));
  if (segments == 0)
    throw std::invalid_argument("quantize_feedback: trace shorter than one segment");
  std::vector<Vec> out;
  out.reserve(segments);
  for (std::size_t k = 0; k < segments; ++k) {
    const double target = static_cast<double>(k) * h;
    auto it = std::lower_bound(trace.times.begin(), trace.times.end(), target);
    std::size_t idx = static_cast<std::size_t>(it - trace.times.begin());
    if (idx == trace.times.size()) {
      idx = trace.times.size() - 1;
    } else if (idx > 0 &&
               target - trace.times[idx - 1] < trace.times[idx] - target) {
      --idx;
    }
    out.push_back(grid.nearest(trace.values[idx]));
  }
  return PiecewiseConstantInput(h, std::move(out));
}

}  // namespace trimabs
