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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "trimabs/cli.hpp"
#include "trimabs/config.hpp"

namespace {

trimabs::Config load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw trimabs::ConfigError("cannot open config file " + path);
  return trimabs::parse_config(file);
}

struct CommonArgs {
  std::string config_path;
  trimabs::CliOptions options;
  std::optional<double> tau_override;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")
      ->required();
  cmd->add_option("--tau-override", args.tau_override,
                  "use this sampling horizon instead of the configured or "
                  "synthesized one");
  cmd->add_option("--seed", args.seed, "override the configured random seed");
  cmd->add_flag("--strict-eta-half", args.options.strict_eta_half,
                "require eta < epsilon/2 instead of eta < epsilon");
}

trimabs::CliOptions finalize(const CommonArgs& args) {
  trimabs::CliOptions opt = args.options;
  opt.tau_override = args.tau_override;
  opt.seed = args.seed;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "trimabs: trimmed approximate-bisimulation abstractions of bounded-input "
      "linear systems"};
  app.require_subcommand(1);

  CommonArgs params_args;
  CLI::App* params = app.add_subcommand(
      "params", "print abstraction parameters and the stabilizability summary");
  add_common(params, params_args);

  CommonArgs build_args;
  std::string build_out = "model.txt";
  bool reduce = false;
  CLI::App* build =
      app.add_subcommand("build", "build and export the symbolic model");
  add_common(build, build_args);
  build->add_option("--out", build_out, "model output path");
  build->add_flag("--reduce", reduce,
                  "drop redundant edges that reach an already covered successor");

  CommonArgs sim_args;
  std::string sim_y0, sim_x0, sim_input, sim_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "co-simulate reference, supervisory, and quantized traces");
  add_common(simulate, sim_args);
  simulate->add_option("--y0", sim_y0, "tracked initial state, e.g. \"0.23 -0.24\"")
      ->required();
  simulate->add_option("--x0", sim_x0, "reference initial state")->required();
  simulate
      ->add_option("--input", sim_input,
                   "input value, or semicolon-separated segment values")
      ->required();
  simulate->add_option("--out", sim_out,
                       "trace path prefix (writes <out>.reference.csv etc.)");

  CommonArgs check_args;
  std::string check_out = "reports";
  CLI::App* check =
      app.add_subcommand("check", "run the verification battery and write reports");
  add_common(check, check_args);
  check->add_option("--out", check_out, "report output directory");

  CLI11_PARSE(app, argc, argv);

  return trimabs::run_command(
      [&]() -> int {
        if (params->parsed()) {
          const trimabs::Config cfg = load_config(params_args.config_path);
          return trimabs::cmd_params(cfg, finalize(params_args), std::cout);
        }
        if (build->parsed()) {
          const trimabs::Config cfg = load_config(build_args.config_path);
          trimabs::CliOptions opt = finalize(build_args);
          opt.reduce = reduce;
          return trimabs::cmd_build(cfg, opt, build_out, std::cout);
        }
        if (simulate->parsed()) {
          const trimabs::Config cfg = load_config(sim_args.config_path);
          const auto parse_state = [](const std::string& text, const char* key) {
            const auto rows = trimabs::detail::parse_rows(text, key);
            if (rows.size() != 1)
              throw trimabs::ConfigError(std::string("expected a single row for ") +
                                         key);
            return rows.front();
          };
          return trimabs::cmd_simulate(cfg, finalize(sim_args),
                                       parse_state(sim_y0, "y0"),
                                       parse_state(sim_x0, "x0"), sim_input,
                                       sim_out, std::cout);
        }
        const trimabs::Config cfg = load_config(check_args.config_path);
        return trimabs::cmd_check(cfg, finalize(check_args), check_out,
                                  std::cout);
      },
      std::cerr);
}
