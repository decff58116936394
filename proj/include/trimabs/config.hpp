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

#ifndef TRIMABS_CONFIG_HPP_
#define TRIMABS_CONFIG_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trimabs/abstraction.hpp"
#include "trimabs/box.hpp"
#include "trimabs/input.hpp"
#include "trimabs/matrix.hpp"
#include "trimabs/system.hpp"

namespace trimabs {

/** Malformed or inconsistent configuration text. */
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Everything a command needs, parsed from a sectioned key = value file.
 * Matrices are written as semicolon-separated rows; boxes and regions as a
 * lower row followed by an upper row.  Lines starting with # are comments.
 * Unknown sections or keys are errors, so typos cannot silently fall back to
 * defaults.
 */
struct Config {
  // [system]
  Matrix a = Matrix(1, 1);
  Matrix b = Matrix(1, 1);
  Vec box_lower, box_upper;
  double grid_step = 0.0;
  double grid_offset = 0.0;
  double h = 0.0;
  // [feedback]
  Matrix c = Matrix(1, 1);
  // [abstraction]
  double epsilon = 0.0;
  double eta = 0.0;
  std::optional<double> tau;
  double tau_step = 0.01;
  std::optional<double> tau_max;
  Vec region_lower, region_upper;
  std::size_t catalog_cap = 10000;
  std::size_t input_segments = 1;
  // [check]
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  double horizon = 5.0;
  std::size_t trials = 100;

  OpenBox input_box() const { return OpenBox(box_lower, box_upper); }
  Region region() const { return Region(region_lower, region_upper); }
  LinearSystem system() const {
    const OpenBox box = input_box();
    return LinearSystem(a, b, box, InputGrid::regular(box, grid_step, grid_offset),
                        h);
  }

  friend bool operator==(const Config& x, const Config& y) = default;
};

namespace detail {

inline std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view tok, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ConfigError("config: bad number '" + std::string(tok) + "' for " + key);
  if (!std::isfinite(v))
    throw ConfigError("config: non-finite value for " + key);
  return v;
}

inline std::vector<Vec> parse_rows(std::string_view text, const std::string& key) {
  std::vector<Vec> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string_view row = strip(
        text.substr(start, semi == std::string_view::npos ? semi : semi - start));
    Vec values;
    std::size_t pos = 0;
    while (pos < row.size()) {
      while (pos < row.size() && (row[pos] == ' ' || row[pos] == '\t')) ++pos;
      if (pos >= row.size()) break;
      std::size_t end = pos;
      while (end < row.size() && row[end] != ' ' && row[end] != '\t') ++end;
      values.push_back(parse_double(row.substr(pos, end - pos), key));
      pos = end;
    }
    if (values.empty())
      throw ConfigError("config: empty row in " + key);
    rows.push_back(std::move(values));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  for (const Vec& r : rows)
    if (r.size() != rows.front().size())
      throw ConfigError("config: ragged rows in " + key);
  return rows;
}

inline Matrix parse_matrix(std::string_view text, const std::string& key) {
  const std::vector<Vec> rows = parse_rows(text, key);
  return Matrix::from_rows(rows);
}

inline std::size_t parse_count(std::string_view tok, const std::string& key) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ConfigError("config: bad count '" + std::string(tok) + "' for " + key);
  return v;
}

inline std::uint64_t parse_seed(std::string_view tok, const std::string& key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ConfigError("config: bad seed '" + std::string(tok) + "' for " + key);
  return v;
}

// Shortest representation that parses back to the same double.
inline std::string fmt_shortest(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::logic_error("fmt_shortest: buffer too small");
  return std::string(buf, ptr);
}

inline std::string fmt_row(const Vec& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ' ';
    out += fmt_shortest(row[i]);
  }
  return out;
}

inline std::string fmt_matrix(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += " ; ";
    Vec row(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    out += fmt_row(row);
  }
  return out;
}

}  // namespace detail

/**
 * Parses the sectioned text format.  Every key is validated, required keys
 * must be present, and the assembled pieces must agree on dimensions.
 */
inline Config parse_config(std::istream& is) {
  Config cfg;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  bool seen_a = false, seen_b = false, seen_box = false, seen_step = false,
       seen_h = false, seen_c = false, seen_eps = false, seen_eta = false,
       seen_region = false;

  const auto two_rows = [](std::string_view text, const std::string& key) {
    const std::vector<Vec> rows = detail::parse_rows(text, key);
    if (rows.size() != 2)
      throw ConfigError("config: " + key + " needs a lower row and an upper row");
    return rows;
  };

  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view body = detail::strip(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = std::string(body.substr(1, body.size() - 2));
      if (section != "system" && section != "feedback" &&
          section != "abstraction" && section != "check")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key(detail::strip(body.substr(0, eq)));
    const std::string_view value = detail::strip(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    if (section.empty())
      throw ConfigError("config: key '" + key + "' before any section");

    if (section == "system") {
      if (key == "a") {
        cfg.a = detail::parse_matrix(value, key);
        seen_a = true;
      } else if (key == "b") {
        cfg.b = detail::parse_matrix(value, key);
        seen_b = true;
      } else if (key == "input_box") {
        const auto rows = two_rows(value, key);
        cfg.box_lower = rows[0];
        cfg.box_upper = rows[1];
        seen_box = true;
      } else if (key == "grid_step") {
        cfg.grid_step = detail::parse_double(value, key);
        seen_step = true;
      } else if (key == "grid_offset") {
        cfg.grid_offset = detail::parse_double(value, key);
      } else if (key == "h") {
        cfg.h = detail::parse_double(value, key);
        seen_h = true;
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [system]");
      }
    } else if (section == "feedback") {
      if (key == "c") {
        cfg.c = detail::parse_matrix(value, key);
        seen_c = true;
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [feedback]");
      }
    } else if (section == "abstraction") {
      if (key == "epsilon") {
        cfg.epsilon = detail::parse_double(value, key);
        seen_eps = true;
      } else if (key == "eta") {
        cfg.eta = detail::parse_double(value, key);
        seen_eta = true;
      } else if (key == "tau") {
        cfg.tau = detail::parse_double(value, key);
      } else if (key == "tau_step") {
        cfg.tau_step = detail::parse_double(value, key);
      } else if (key == "tau_max") {
        cfg.tau_max = detail::parse_double(value, key);
      } else if (key == "region") {
        const auto rows = two_rows(value, key);
        cfg.region_lower = rows[0];
        cfg.region_upper = rows[1];
        seen_region = true;
      } else if (key == "catalog_cap") {
        cfg.catalog_cap = detail::parse_count(value, key);
      } else if (key == "input_segments") {
        cfg.input_segments = detail::parse_count(value, key);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [abstraction]");
      }
    } else {  // check
      if (key == "samples") {
        cfg.samples = detail::parse_count(value, key);
      } else if (key == "seed") {
        cfg.seed = detail::parse_seed(value, key);
      } else if (key == "horizon") {
        cfg.horizon = detail::parse_double(value, key);
      } else if (key == "trials") {
        cfg.trials = detail::parse_count(value, key);
      } else {
        throw ConfigError("config: unknown key '" + key + "' in [check]");
      }
    }
  }

  const auto require = [](bool seen, const char* what) {
    if (!seen) throw ConfigError(std::string("config: missing required key ") + what);
  };
  require(seen_a, "[system] a");
  require(seen_b, "[system] b");
  require(seen_box, "[system] input_box");
  require(seen_step, "[system] grid_step");
  require(seen_h, "[system] h");
  require(seen_c, "[feedback] c");
  require(seen_eps, "[abstraction] epsilon");
  require(seen_eta, "[abstraction] eta");
  require(seen_region, "[abstraction] region");

  const std::size_t n = cfg.a.rows();
  const std::size_t m = cfg.b.cols();
  if (cfg.a.cols() != n) throw ConfigError("config: a must be square");
  if (cfg.b.rows() != n)
    throw ConfigError("config: b row count must match the state dimension");
  if (cfg.c.rows() != m || cfg.c.cols() != n)
    throw ConfigError("config: c must map states to inputs");
  if (cfg.box_lower.size() != m)
    throw ConfigError("config: input_box dimension must match the input count");
  if (cfg.region_lower.size() != n)
    throw ConfigError("config: region dimension must match the state dimension");
  try {
    (void)cfg.input_box();
    (void)cfg.region();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(cfg.grid_step > 0.0)) throw ConfigError("config: grid_step must be > 0");
  if (!(cfg.h > 0.0)) throw ConfigError("config: h must be > 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  if (!(cfg.eta > 0.0)) throw ConfigError("config: eta must be > 0");
  if (!(cfg.tau_step > 0.0)) throw ConfigError("config: tau_step must be > 0");
  if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError("config: tau must be > 0");
  if (cfg.tau_max && !(*cfg.tau_max > 0.0))
    throw ConfigError("config: tau_max must be > 0");
  if (!(cfg.horizon > 0.0)) throw ConfigError("config: horizon must be > 0");
  if (cfg.input_segments == 0)
    throw ConfigError("config: input_segments must be >= 1");
  if (cfg.samples == 0) throw ConfigError("config: samples must be >= 1");
  if (cfg.trials == 0) throw ConfigError("config: trials must be >= 1");
  return cfg;
}

inline Config parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

/** Canonical emission; parse_config(emit_config(c)) reproduces c exactly. */
inline void emit_config(const Config& cfg, std::ostream& os) {
  using detail::fmt_matrix;
  using detail::fmt_row;
  using detail::fmt_shortest;
  os << "[system]\n";
  os << "a = " << fmt_matrix(cfg.a) << '\n';
  os << "b = " << fmt_matrix(cfg.b) << '\n';
  os << "input_box = " << fmt_row(cfg.box_lower) << " ; " << fmt_row(cfg.box_upper)
     << '\n';
  os << "grid_step = " << fmt_shortest(cfg.grid_step) << '\n';
  os << "grid_offset = " << fmt_shortest(cfg.grid_offset) << '\n';
  os << "h = " << fmt_shortest(cfg.h) << '\n';
  os << "\n[feedback]\n";
  os << "c = " << fmt_matrix(cfg.c) << '\n';
  os << "\n[abstraction]\n";
  os << "epsilon = " << fmt_shortest(cfg.epsilon) << '\n';
  os << "eta = " << fmt_shortest(cfg.eta) << '\n';
  if (cfg.tau) os << "tau = " << fmt_shortest(*cfg.tau) << '\n';
  os << "tau_step = " << fmt_shortest(cfg.tau_step) << '\n';
  if (cfg.tau_max) os << "tau_max = " << fmt_shortest(*cfg.tau_max) << '\n';
  os << "region = " << fmt_row(cfg.region_lower) << " ; "
     << fmt_row(cfg.region_upper) << '\n';
  os << "catalog_cap = " << cfg.catalog_cap << '\n';
  os << "input_segments = " << cfg.input_segments << '\n';
  os << "\n[check]\n";
  os << "samples = " << cfg.samples << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "horizon = " << fmt_shortest(cfg.horizon) << '\n';
  os << "trials = " << cfg.trials << '\n';
}

inline std::string emit_config(const Config& cfg) {
  std::ostringstream os;
  emit_config(cfg, os);
  return os.str();
}

}  // namespace trimabs

#endif  // TRIMABS_CONFIG_HPP_
