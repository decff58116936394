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

#ifndef TRIMABS_STABILITY_HPP_
#define TRIMABS_STABILITY_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimabs/box.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"
#include "trimabs/report.hpp"
#include "trimabs/system.hpp"

namespace trimabs {

/**
 * Spectral summary of a plant/feedback pair: open- and closed-loop spectra,
 * the Hurwitz verdict for the closed loop, the largest state-space radius on
 * which the supervisory feedback is guaranteed to keep inputs inside the box,
 * and (for plants whose every open-loop mode grows) the radius outside of
 * which no bounded input can ever bring two trajectories together again.
 * The two radii are optional because each exists only under the spectral
 * condition that defines it.
 */
struct StabilizabilityReport {
  bool hurwitz = false;
  std::vector<std::complex<double>> open_loop_eigenvalues;
  std::vector<std::complex<double>> closed_loop_eigenvalues;
  std::optional<double> local_radius;
  std::optional<double> divergence_radius;
};

/**
 * Largest r such that ||y - x_eq|| < r guarantees u_eq + C (y - x_eq) stays
 * inside the input box: the distance from u_eq to the box boundary divided by
 * the induced norm of C.  C = 0 yields the +infinity sentinel (any radius
 * works).  Requires (x_eq, u_eq) to be an equilibrium to 1e-9, u_eq strictly
 * interior, and A + B C Hurwitz; violations raise std::domain_error.
 */
inline double local_stabilizability_radius(const Matrix& a, const Matrix& b,
                                           const Matrix& c, const OpenBox& box,
                                           const Vec& x_eq, const Vec& u_eq) {
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  if (a.cols() != n || b.rows() != n || c.rows() != m || c.cols() != n)
    throw std::invalid_argument(
        "local_stabilizability_radius: inconsistent matrix shapes");
  if (box.dim() != m || x_eq.size() != n || u_eq.size() != m)
    throw std::invalid_argument(
        "local_stabilizability_radius: inconsistent vector dimensions");
  Vec residual = mat_vec(a, x_eq);
  const Vec bu = mat_vec(b, u_eq);
  for (std::size_t i = 0; i < n; ++i) residual[i] += bu[i];
  if (inf_norm(residual) > 1e-9)
    throw std::domain_error(
        "local_stabilizability_radius: (x_eq, u_eq) is not an equilibrium");
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    dist = std::min(dist,
                    std::min(u_eq[i] - box.lower(i), box.upper(i) - u_eq[i]));
  if (!(dist > 0.0))
    throw std::domain_error(
        "local_stabilizability_radius: u_eq is not interior to the input box");
  if (!is_hurwitz(a + b * c))
    throw std::domain_error(
        "local_stabilizability_radius: closed loop is not Hurwitz");
  const double gain = induced_inf_norm(c);
  if (gain == 0.0) return std::numeric_limits<double>::infinity();
  return dist / gain;
}

/**
 * For a plant whose every open-loop eigenvalue has positive real part, the
 * separation radius 4 ||B|| M / min Re(lambda): two states further apart than
 * this can never be driven arbitrarily close by inputs bounded by M.
 */
inline double divergence_radius(const Matrix& a, const Matrix& b,
                                double input_bound) {
  if (a.rows() != a.cols() || b.rows() != a.rows())
    throw std::invalid_argument("divergence_radius: inconsistent shapes");
  if (!(input_bound > 0.0))
    throw std::invalid_argument("divergence_radius: input bound must be > 0");
  const double slowest = min_real_part(a);
  if (!(slowest > 0.0))
    throw std::domain_error(
        "divergence_radius: a mode does not grow; the system is not everywhere "
        "divergent");
  return 4.0 * induced_inf_norm(b) * input_bound / slowest;
}

namespace detail {

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  // splitmix64 of the trial index, offset by the master seed.
  std::uint64_t z = master + (trial + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Vec random_box_point(const OpenBox& box, std::mt19937_64& rng) {
  Vec v(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    std::uniform_real_distribution<double> dist(box.lower(i), box.upper(i));
    double x = dist(rng);
    while (!(x > box.lower(i) && x < box.upper(i))) x = dist(rng);
    v[i] = x;
  }
  return v;
}

}  // namespace detail

/**
 * Numerical refutation of global stabilizability for everywhere-divergent
 * plants.  Starting from a pair separated by more than the divergence radius,
 * drives both states with independent random bounded piecewise-constant
 * inputs (segment length = the control period) and asserts at every sample
 * time t that the measured separation dominates the analytic floor
 * 2 M ||B|| ||exp(A t)|| / min Re(lambda), with 1e-6 slack for accumulated
 * rounding.  Preconditions (growing modes, sufficient separation) raise
 * std::domain_error.
 */
inline CheckReport verify_divergence(const LinearSystem& sys, const Vec& x0,
                                     const Vec& y0, double horizon,
                                     std::size_t trials, std::uint64_t seed) {
  if (x0.size() != sys.state_dim() || y0.size() != sys.state_dim())
    throw std::invalid_argument("verify_divergence: state dimension mismatch");
  if (!(horizon > 0.0))
    throw std::invalid_argument("verify_divergence: horizon must be > 0");
  if (trials == 0)
    throw std::invalid_argument("verify_divergence: need at least one trial");
  const double slowest = min_real_part(sys.A);
  if (!(slowest > 0.0))
    throw std::domain_error(
        "verify_divergence: a mode does not grow; the system is not everywhere "
        "divergent");
  const double input_bound = sys.input_box.max_abs_bound();
  const double radius = divergence_radius(sys.A, sys.B, input_bound);
  Vec e0(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) e0[i] = x0[i] - y0[i];
  if (!(inf_norm(e0) > radius))
    throw std::domain_error(
        "verify_divergence: initial separation does not exceed the divergence "
        "radius");

  const std::size_t steps =
      detail::aligned_steps(horizon, sys.h, 1e-9, "verify_divergence");
  const Discretization step = discretize(sys.A, sys.B, sys.h);
  const double scale = 2.0 * input_bound * induced_inf_norm(sys.B) / slowest;
  std::vector<double> floor_at(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    floor_at[k] =
        scale * induced_inf_norm(mat_exp(sys.A, static_cast<double>(k) * sys.h));

  constexpr double kSlack = 1e-6;
  CheckReport rep;
  double min_margin = std::numeric_limits<double>::infinity();
  char buf[192];
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(detail::trial_seed(seed, trial));
    Vec x = x0;
    Vec y = y0;
    for (std::size_t k = 0; k <= steps; ++k) {
      Vec diff(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
      const double sep = inf_norm(diff);
      min_margin = std::min(min_margin, sep - floor_at[k]);
      if (sep < floor_at[k] - kSlack) {
        std::snprintf(buf, sizeof buf,
                      "trial %zu, time %s: separation %s below floor %s", trial,
                      detail::fmt_g9(static_cast<double>(k) * sys.h).c_str(),
                      detail::fmt_g9(sep).c_str(),
                      detail::fmt_g9(floor_at[k]).c_str());
        rep.fail(Reason::separation_violation, buf);
      }
      if (k == steps) break;
      const Vec u = detail::random_box_point(sys.input_box, rng);
      const Vec v = detail::random_box_point(sys.input_box, rng);
      Vec xn = mat_vec(step.E, x);
      const Vec gu = mat_vec(step.G, u);
      Vec yn = mat_vec(step.E, y);
      const Vec gv = mat_vec(step.G, v);
      for (std::size_t i = 0; i < x.size(); ++i) {
        xn[i] += gu[i];
        yn[i] += gv[i];
      }
      x = std::move(xn);
      y = std::move(yn);
    }
    ++rep.pairs_checked;
  }
  rep.transitions_checked = trials * steps;
  rep.metric("divergence_radius", radius);
  rep.metric("horizon", horizon);
  rep.metric("trials", static_cast<double>(trials));
  rep.metric("min_separation_margin", min_margin);
  rep.metric("floor_at_horizon", floor_at[steps]);
  rep.metric("seed", static_cast<double>(seed));
  rep.notes.push_back("seed=" + std::to_string(seed));
  rep.check_consistent();
  return rep;
}

/**
 * Assembles the spectral summary for a plant/feedback pair around the
 * equilibrium (x_eq, u_eq).  Radii that exist under the spectral conditions
 * are filled in; the others stay empty.
 */
inline StabilizabilityReport assess_stabilizability(const Matrix& a,
                                                    const Matrix& b,
                                                    const Matrix& c,
                                                    const OpenBox& box,
                                                    const Vec& x_eq,
                                                    const Vec& u_eq) {
  StabilizabilityReport out;
  out.open_loop_eigenvalues = eigenvalues(a);
  const Matrix closed = a + b * c;
  out.closed_loop_eigenvalues = eigenvalues(closed);
  out.hurwitz = is_hurwitz(closed);
  if (out.hurwitz) {
    try {
      out.local_radius =
          local_stabilizability_radius(a, b, c, box, x_eq, u_eq);
    } catch (const std::domain_error&) {
      // Not an interior equilibrium: no guaranteed neighborhood.
    }
  }
  if (min_real_part(a) > 0.0)
    out.divergence_radius = divergence_radius(a, b, box.max_abs_bound());
  return out;
}

inline StabilizabilityReport assess_stabilizability(const Matrix& a,
                                                    const Matrix& b,
                                                    const Matrix& c,
                                                    const OpenBox& box) {
  return assess_stabilizability(a, b, c, box, Vec(a.rows(), 0.0),
                                Vec(b.cols(), 0.0));
}

/** Key=value serialization matching the CLI report format. */
inline void write_stabilizability(const StabilizabilityReport& r,
                                  std::ostream& os) {
  os << "hurwitz=" << (r.hurwitz ? "true" : "false") << '\n';
  const auto spectrum = [&os](const char* key,
                              const std::vector<std::complex<double>>& eig) {
    for (std::size_t i = 0; i < eig.size(); ++i) {
      os << key << '.' << i << '=' << detail::fmt_g9(eig[i].real());
      const double im = eig[i].imag();
      os << (im < 0.0 || std::signbit(im) ? "-" : "+")
         << detail::fmt_g9(std::abs(im)) << "i\n";
    }
  };
  spectrum("open_loop_eigenvalue", r.open_loop_eigenvalues);
  spectrum("closed_loop_eigenvalue", r.closed_loop_eigenvalues);
  if (r.local_radius)
    os << "local_radius=" << detail::fmt_g9(*r.local_radius) << '\n';
  if (r.divergence_radius)
    os << "divergence_radius=" << detail::fmt_g9(*r.divergence_radius) << '\n';
}

}  // namespace trimabs

#endif  // TRIMABS_STABILITY_HPP_
