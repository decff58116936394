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

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trimabs {

enum class Reason {
  proximity,
  no_matching_move,
  bounds_violation,
  separation_violation,
  model_mismatch,
};

inline const char* reason_name(Reason r) {
  switch (r) {
    case Reason::proximity: return "proximity";
    case Reason::no_matching_move: return "no-matching-move";
    case Reason::bounds_violation: return "bounds-violation";
    case Reason::separation_violation: return "separation-violation";
    case Reason::model_mismatch: return "model-mismatch";
  }
  return "unknown";
}

struct Counterexample {
  Reason reason;
  std::string detail;  // one-line witness
};

// Outcome of a relational or sampled check.  The verdict is false exactly
// when at least one counterexample was recorded; the first kMaxStored
// witnesses are kept verbatim and the rest only counted.
struct CheckReport {
  static constexpr std::size_t kMaxStored = 100;

  bool verdict = true;
  std::vector<Counterexample> counterexamples;
  std::size_t counterexamples_total = 0;
  std::size_t pairs_checked = 0;
  std::size_t transitions_checked = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;

  void fail(Reason reason, std::string detail) {
    verdict = false;
    ++counterexamples_total;
    if (counterexamples.size() < kMaxStored)
      counterexamples.push_back({reason, std::move(detail)});
  }

  void metric(std::string name, double value) {
    metrics.emplace_back(std::move(name), value);
  }

  void merge(const CheckReport& other, const std::string& prefix) {
    verdict = verdict && other.verdict;
    counterexamples_total += other.counterexamples_total;
    for (const Counterexample& c : other.counterexamples) {
      if (counterexamples.size() >= kMaxStored) break;
      counterexamples.push_back({c.reason, prefix + ": " + c.detail});
    }
    pairs_checked += other.pairs_checked;
    transitions_checked += other.transitions_checked;
    for (const auto& [k, v] : other.metrics) metrics.emplace_back(prefix + "." + k, v);
    for (const std::string& n : other.notes) notes.push_back(prefix + ": " + n);
  }

  void check_consistent() const {
    if (verdict != (counterexamples_total == 0))
      throw std::logic_error("CheckReport: verdict disagrees with counterexamples");
  }
};

namespace detail {
inline std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

inline void write_text(const CheckReport& r, std::ostream& os) {
  r.check_consistent();
  os << "verdict: " << (r.verdict ? "PASS" : "FAIL") << "\n";
  os << "pairs checked: " << r.pairs_checked << "\n";
  os << "transitions checked: " << r.transitions_checked << "\n";
  for (const auto& [k, v] : r.metrics) os << k << ": " << detail::fmt_g9(v) << "\n";
  for (const std::string& n : r.notes) os << "note: " << n << "\n";
  os << "counterexamples: " << r.counterexamples_total << "\n";
  for (const Counterexample& c : r.counterexamples)
    os << "  [" << reason_name(c.reason) << "] " << c.detail << "\n";
  if (r.counterexamples_total > r.counterexamples.size())
    os << "  (" << r.counterexamples_total - r.counterexamples.size()
       << " further counterexamples not listed)\n";
}

inline void write_kv(const CheckReport& r, std::ostream& os) {
  r.check_consistent();
  os << "verdict=" << (r.verdict ? "true" : "false") << "\n";
  os << "pairs_checked=" << r.pairs_checked << "\n";
  os << "transitions_checked=" << r.transitions_checked << "\n";
  for (const auto& [k, v] : r.metrics) os << k << "=" << detail::fmt_g9(v) << "\n";
  for (std::size_t i = 0; i < r.notes.size(); ++i)
    os << "note." << i << "=" << r.notes[i] << "\n";
  os << "counterexamples=" << r.counterexamples_total << "\n";
  for (std::size_t i = 0; i < r.counterexamples.size(); ++i) {
    os << "counterexample." << i << ".reason=" << reason_name(r.counterexamples[i].reason)
       << "\n";
    os << "counterexample." << i << ".detail=" << r.counterexamples[i].detail << "\n";
  }
}

}  // namespace trimabs
