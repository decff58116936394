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

#ifndef TRIMABS_CLI_HPP_
#define TRIMABS_CLI_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimabs/abstraction.hpp"
#include "trimabs/bisim.hpp"
#include "trimabs/box.hpp"
#include "trimabs/config.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"
#include "trimabs/report.hpp"
#include "trimabs/stability.hpp"
#include "trimabs/system.hpp"

namespace trimabs {

/** Command-line switches shared by the subcommands. */
struct CliOptions {
  std::optional<double> tau_override;
  std::optional<std::uint64_t> seed;
  bool reduce = false;
  bool strict_eta_half = false;
};

/** Exit codes shared by every subcommand. */
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitConfigError = 2,
  kExitNumericalError = 3,
};

namespace detail {

struct ResolvedTau {
  double value = 0.0;
  const char* source = "synthesized";
};

inline ResolvedTau resolve_tau(const Config& cfg, const CliOptions& opt) {
  if (opt.tau_override) return {*opt.tau_override, "override"};
  if (cfg.tau) return {*cfg.tau, "config"};
  if (cfg.tau_max)
    return {synth_tau(cfg.a, cfg.b, cfg.c, cfg.epsilon, cfg.eta, cfg.tau_step,
                      *cfg.tau_max),
            "synthesized"};
  return {synth_tau(cfg.a, cfg.b, cfg.c, cfg.epsilon, cfg.eta, cfg.tau_step),
          "synthesized"};
}

inline AbstractionParams resolve_params(const Config& cfg, const CliOptions& opt,
                                        const ResolvedTau& tau) {
  // A horizon pinned by hand may fail its certificate; keep it and let the
  // checks report the consequences instead of refusing to run diagnostics.
  const bool pinned = std::string(tau.source) != "synthesized";
  return make_params(cfg.a, cfg.b, cfg.c, cfg.epsilon, cfg.eta, tau.value,
                     opt.strict_eta_half, pinned);
}

inline std::uint64_t effective_seed(const Config& cfg, const CliOptions& opt) {
  return opt.seed ? *opt.seed : cfg.seed;
}

inline std::string fmt_vec_row(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt_g9(v[i]);
  }
  return out;
}

inline BuildOptions build_options(const Config& cfg) {
  BuildOptions opts;
  opts.catalog_cap = cfg.catalog_cap;
  opts.input_segments = cfg.input_segments;
  return opts;
}

}  // namespace detail

/**
 * Prints the abstraction parameters for the configured plant: trim radius,
 * synthesized (or pinned) horizon with its certificate, the optimistic
 * spectral-abscissa horizon for comparison, and the stabilizability summary.
 */
inline int cmd_params(const Config& cfg, const CliOptions& opt,
                      std::ostream& out) {
  const detail::ResolvedTau tau = detail::resolve_tau(cfg, opt);
  const AbstractionParams params = detail::resolve_params(cfg, opt, tau);
  const OpenBox box = cfg.input_box();
  const OpenBox trimmed = trim_box(box, params.rho);
  if (trimmed.empty())
    throw ConfigError(
        "the trim radius consumes the whole input box; shrink epsilon or the "
        "feedback gain");

  out << "epsilon=" << detail::fmt_g9(params.epsilon) << '\n';
  out << "eta=" << detail::fmt_g9(params.eta) << '\n';
  out << "rho=" << detail::fmt_g9(params.rho) << '\n';
  out << "tau=" << detail::fmt_g9(params.tau) << '\n';
  out << "tau_source=" << tau.source << '\n';
  out << "certificate=" << detail::fmt_g9(params.certificate) << '\n';
  out << "certificate_threshold=" << detail::fmt_g9(params.eta / 2.0) << '\n';
  out << "certified=" << (params.certified ? "true" : "false") << '\n';

  // The shortcut a spectral-abscissa argument would give: it ignores the
  // transient polynomial growth of the matrix exponential, so its horizon can
  // flunk the real certificate.
  const Matrix closed = cfg.a + cfg.b * cfg.c;
  const double decay = -max_real_part(closed);
  const double spectral_tau =
      std::ceil(std::log(params.epsilon / (params.eta / 2.0)) / decay);
  const double spectral_cert =
      tau_certificate(cfg.a, cfg.b, cfg.c, params.epsilon, spectral_tau);
  out << "spectral_tau=" << detail::fmt_g9(spectral_tau) << '\n';
  out << "spectral_certificate=" << detail::fmt_g9(spectral_cert) << '\n';
  const bool spectral_ok = spectral_cert < params.eta / 2.0;
  out << "spectral_certificate_ok=" << (spectral_ok ? "true" : "false") << '\n';
  if (!spectral_ok)
    out << "note=the spectral-abscissa horizon fails the induced-norm "
           "certificate; use the synthesized horizon\n";

  write_stabilizability(assess_stabilizability(cfg.a, cfg.b, cfg.c, box), out);
  return kExitOk;
}

/**
 * Builds the trimmed, grid-restricted symbolic model over the configured
 * region and writes it to out_path; bytes are a pure function of the config.
 */
inline int cmd_build(const Config& cfg, const CliOptions& opt,
                     const std::string& out_path, std::ostream& out) {
  const detail::ResolvedTau tau = detail::resolve_tau(cfg, opt);
  const AbstractionParams params = detail::resolve_params(cfg, opt, tau);
  const LinearSystem sys = cfg.system();
  SymbolicModel model =
      build_symbolic_model(sys, params, cfg.region(), detail::build_options(cfg));
  if (opt.reduce) model = reduce_edges(model);

  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file " + out_path);
  write_model(model, file);
  if (!file.flush())
    throw ConfigError("failed writing output file " + out_path);

  out << "states=" << model.states.size() << '\n';
  out << "inputs=" << model.catalog.size() << '\n';
  out << "edges=" << model.edges.size() << '\n';
  out << "out_of_region=" << model.out_of_region.size() << '\n';
  for (const std::string& w : model.warnings) out << "warning=" << w << '\n';
  return kExitOk;
}

/**
 * Co-simulates the reference trajectory, the supervisory tracker, and the
 * grid-quantized supervisory tracker from the given initial states under the
 * requested input, writes per-trace CSVs next to out_path, and prints endpoint
 * distances to the symbolic successor plus the peak input displacements.
 */
inline int cmd_simulate(const Config& cfg, const CliOptions& opt, const Vec& y0,
                        const Vec& x0, const std::string& input_spec,
                        const std::string& out_path, std::ostream& out) {
  const detail::ResolvedTau tau = detail::resolve_tau(cfg, opt);
  const AbstractionParams params = detail::resolve_params(cfg, opt, tau);
  const LinearSystem sys = cfg.system();

  const std::vector<Vec> segments = detail::parse_rows(input_spec, "input");
  for (const Vec& v : segments) {
    if (v.size() != sys.input_dim())
      throw ConfigError("input segment dimension does not match the plant");
    if (!sys.input_box.contains(v))
      throw ConfigError("input value " + detail::fmt_vec_row(v) +
                        " lies outside the input box");
  }
  const PiecewiseConstantInput u(
      params.tau / static_cast<double>(segments.size()), segments);

  const SupervisoryRun run =
      simulate_supervisory(sys, cfg.c, y0, x0, u, params.tau, sys.h);
  const Vec& x_end = run.reference.states.back();
  const Vec& y_end = run.tracked.states.back();
  const Vec successor = quantize_state(x_end, params.eta);

  // Replay the quantized supervisory input open loop from y0.
  const PiecewiseConstantInput uq =
      quantize_feedback(run.supervisory, sys.quantized_inputs, sys.h);
  TrajectoryTrace quant;
  {
    const Discretization step = discretize(sys.A, sys.B, sys.h);
    const std::size_t steps =
        detail::aligned_steps(params.tau, sys.h, 1e-9, "cmd_simulate");
    Vec z = y0;
    quant.times.push_back(0.0);
    quant.states.push_back(z);
    quant.inputs.push_back(uq.value_at(0.0));
    for (std::size_t k = 0; k < steps; ++k) {
      const double t0 = static_cast<double>(k) * sys.h;
      Vec next = mat_vec(step.E, z);
      const Vec drive = mat_vec(step.G, uq.value_at(t0));
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += drive[i];
      z = std::move(next);
      const double t1 = static_cast<double>(k + 1) * sys.h;
      quant.times.push_back(t1);
      quant.states.push_back(z);
      quant.inputs.push_back(uq.value_at(std::min(t1, uq.duration())));
    }
  }
  const Vec& q_end = quant.states.back();

  if (!out_path.empty()) {
    const auto dump = [&](const TrajectoryTrace& trace, const char* suffix) {
      const std::string path = out_path + "." + suffix + ".csv";
      std::ofstream file(path, std::ios::binary);
      if (!file) throw ConfigError("cannot open output file " + path);
      write_csv(trace, file);
    };
    dump(run.reference, "reference");
    dump(run.tracked, "supervisory");
    dump(quant, "quantized");
  }

  const auto dist = [](const Vec& p, const Vec& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      d = std::max(d, std::abs(p[i] - q[i]));
    return d;
  };
  double max_sup = 0.0;
  double max_quant = 0.0;
  for (std::size_t k = 0; k < run.supervisory.times.size(); ++k) {
    const double t = run.supervisory.times[k];
    const Vec nominal = u.value_at(std::min(t, u.duration()));
    max_sup = std::max(max_sup, dist(run.supervisory.values[k], nominal));
    max_quant =
        std::max(max_quant, dist(uq.value_at(std::min(t, uq.duration())), nominal));
  }

  out << "tau=" << detail::fmt_g9(params.tau) << '\n';
  out << "reference_endpoint=" << detail::fmt_vec_row(x_end) << '\n';
  out << "supervisory_endpoint=" << detail::fmt_vec_row(y_end) << '\n';
  out << "quantized_endpoint=" << detail::fmt_vec_row(q_end) << '\n';
  out << "symbolic_successor=" << detail::fmt_vec_row(successor) << '\n';
  out << "reference_endpoint_distance=" << detail::fmt_g9(dist(x_end, successor))
      << '\n';
  out << "supervisory_endpoint_distance="
      << detail::fmt_g9(dist(y_end, successor)) << '\n';
  out << "quantized_endpoint_distance=" << detail::fmt_g9(dist(q_end, successor))
      << '\n';
  out << "max_supervisory_displacement=" << detail::fmt_g9(max_sup) << '\n';
  out << "max_quantized_displacement=" << detail::fmt_g9(max_quant) << '\n';
  return kExitOk;
}

/**
 * Samples random nearby state pairs and trimmed inputs and confirms the
 * supervisory input never leaves the open input box at dt sampling.
 */
inline CheckReport check_supervisory_sampled(const LinearSystem& sys,
                                             const Matrix& C,
                                             const AbstractionParams& params,
                                             const Region& region,
                                             std::size_t pairs,
                                             std::size_t inputs_per_pair,
                                             std::uint64_t seed, double dt) {
  if (pairs == 0 || inputs_per_pair == 0)
    throw std::invalid_argument(
        "check_supervisory_sampled: need at least one pair and one input");
  if (region.dim() != sys.state_dim())
    throw std::invalid_argument(
        "check_supervisory_sampled: region dimension mismatch");
  const OpenBox trimmed = trim_box(sys.input_box, params.rho);
  if (trimmed.empty())
    throw std::invalid_argument(
        "check_supervisory_sampled: trimmed input box is empty");

  CheckReport rep;
  char buf[192];
  for (std::size_t p = 0; p < pairs; ++p) {
    std::mt19937_64 rng(detail::trial_seed(seed ^ 0x7431u, p));
    Vec x0(region.dim());
    Vec y0(region.dim());
    for (std::size_t i = 0; i < region.dim(); ++i) {
      std::uniform_real_distribution<double> pos(region.lower(i),
                                                 region.upper(i));
      std::uniform_real_distribution<double> off(-params.epsilon,
                                                 params.epsilon);
      x0[i] = region.lower(i) == region.upper(i) ? region.lower(i) : pos(rng);
      y0[i] = x0[i] + off(rng);
    }
    for (std::size_t j = 0; j < inputs_per_pair; ++j) {
      const Vec v = detail::random_box_point(trimmed, rng);
      const PiecewiseConstantInput u =
          PiecewiseConstantInput::constant(v, params.tau);
      const BoundsCheck bc =
          supervisory_in_bounds(sys, C, y0, x0, u, params.tau, dt);
      ++rep.transitions_checked;
      if (!bc.ok) {
        std::snprintf(buf, sizeof buf,
                      "pair %zu, input %zu: supervisory input %s leaves the box "
                      "at time %s",
                      p, j, detail::fmt_vec_row(bc.offending_value).c_str(),
                      detail::fmt_g9(bc.first_violation.value_or(-1.0)).c_str());
        rep.fail(Reason::bounds_violation, buf);
      }
    }
    ++rep.pairs_checked;
  }
  rep.metric("epsilon", params.epsilon);
  rep.metric("rho", params.rho);
  rep.metric("tau", params.tau);
  rep.metric("pairs", static_cast<double>(pairs));
  rep.metric("inputs_per_pair", static_cast<double>(inputs_per_pair));
  rep.metric("dt", dt);
  rep.metric("seed", static_cast<double>(seed));
  rep.notes.push_back("seed=" + std::to_string(seed));
  rep.check_consistent();
  return rep;
}

/**
 * Runs the full verification battery: sampled quantization correspondence,
 * sampled supervisory admissibility, the near-completeness certificate, and
 * (for plants whose every mode grows) the divergence floor.  Writes one
 * report file per check under out_dir and prints one verdict line each.
 * Returns 0 iff every verdict is true.
 */
inline int cmd_check(const Config& cfg, const CliOptions& opt,
                     const std::string& out_dir, std::ostream& out) {
  const detail::ResolvedTau tau = detail::resolve_tau(cfg, opt);
  const AbstractionParams params = detail::resolve_params(cfg, opt, tau);
  const LinearSystem sys = cfg.system();
  const Region region = cfg.region();
  const std::uint64_t seed = detail::effective_seed(cfg, opt);

  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  const auto emit = [&](const char* name, const CheckReport& rep) {
    const std::filesystem::path path =
        std::filesystem::path(out_dir.empty() ? "." : out_dir) /
        (std::string(name) + ".txt");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open report file " + path.string());
    write_text(rep, file);
    out << name << ": " << (rep.verdict ? "PASS" : "FAIL");
    if (!rep.verdict) out << " (" << rep.counterexamples_total << " counterexamples)";
    out << '\n';
    return rep.verdict;
  };

  bool all_ok = true;

  SamplePlan plan;
  plan.state_samples = cfg.samples;
  plan.input_samples = std::max<std::size_t>(1, cfg.samples / 4);
  plan.seed = seed;
  all_ok &= emit("result1", check_result1_sampled(sys, params, region, plan));

  all_ok &= emit("supervisory",
                 check_supervisory_sampled(sys, cfg.c, params, region,
                                           cfg.samples, cfg.samples, seed, 1e-3));

  {
    BuildOptions wide = detail::build_options(cfg);
    wide.catalog_trim = 0.0;
    const FiniteMTS witness =
        to_finite_mts(build_symbolic_model(sys, params, region, wide));
    const FiniteMTS candidate = to_finite_mts(
        build_symbolic_model(sys, params, region, detail::build_options(cfg)));
    CheckReport near;
    if (params.rho > 0.0) {
      near = near_completeness_certificate(witness, candidate, params.rho,
                                           params.rho, witness, sys.input_box,
                                           params.epsilon);
    } else {
      // Zero trim: the candidate must coincide with the untrimmed witness.
      if (canonical_form(candidate) != canonical_form(witness))
        near.fail(Reason::model_mismatch,
                  "zero-trim candidate differs from the untrimmed model");
      near.metric("gamma", 0.0);
      near.notes.push_back("zero trim radius; models must coincide exactly");
      near.check_consistent();
    }
    all_ok &= emit("near_completeness", near);
  }

  if (min_real_part(cfg.a) > 0.0) {
    const double radius =
        divergence_radius(cfg.a, cfg.b, sys.input_box.max_abs_bound());
    const double half = (radius + 1.0) / 2.0;
    Vec x0(sys.state_dim());
    Vec y0(sys.state_dim());
    for (std::size_t i = 0; i < x0.size(); ++i) {
      // Alternating signs excite the full induced norm rather than riding a
      // single eigendirection.
      x0[i] = (i % 2 == 0) ? half : -half;
      y0[i] = -x0[i];
    }
    all_ok &= emit("divergence", verify_divergence(sys, x0, y0, cfg.horizon,
                                                   cfg.trials, seed));
  } else {
    out << "divergence: SKIP (a mode does not grow)\n";
  }

  return all_ok ? kExitOk : kExitVerificationFailed;
}

/** Maps exceptions from a command body onto the exit-code contract. */
template <typename F>
int run_command(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalError;
  }
}

}  // namespace trimabs

#endif  // TRIMABS_CLI_HPP_
