// Copyright 2026 The apcdn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CPLEX-style LP text export of a ProblemSpec, for cross-checking models
// with external solvers (CBC, HiGHS, GLPK all read it).

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "apcdn/milp.hpp"

namespace apcdn::milp {

namespace detail {

inline std::string lp_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  std::string s(buf, res.ptr);
  return s;
}

inline std::string lp_name(const std::string& raw, char prefix, int index) {
  if (raw.empty()) return std::string(1, prefix) + std::to_string(index);
  std::string out;
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') {
    out.insert(out.begin(), '_');
  }
  return out;
}

inline void write_terms(std::ostream& os, const ProblemSpec& p,
                        const std::vector<Term>& terms) {
  bool first = true;
  int on_line = 0;
  for (const Term& t : terms) {
    if (t.coef == 0.0) continue;
    const double mag = std::abs(t.coef);
    if (first) {
      os << (t.coef < 0 ? "- " : "");
    } else {
      os << (t.coef < 0 ? " - " : " + ");
    }
    os << lp_number(mag) << ' '
       << lp_name(p.variables[t.var].name, 'x', t.var);
    first = false;
    if (++on_line == 8) {
      os << "\n  ";
      on_line = 0;
    }
  }
  if (first) {
    os << "0 " << lp_name(p.variables[0].name, 'x', 0);
  }
}

}  // namespace detail

inline void write_lp(std::ostream& os, const ProblemSpec& p,
                     const std::string& title = "") {
  using detail::lp_name;
  using detail::lp_number;
  if (!title.empty()) os << "\\ " << title << '\n';
  os << (p.objective.sense == ObjectiveSense::kMaximize ? "Maximize" : "Minimize")
     << "\n obj: ";
  detail::write_terms(os, p, p.objective.terms);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < p.constraints.size(); ++r) {
    const LinearConstraint& c = p.constraints[r];
    os << ' ' << lp_name(c.name, 'c', static_cast<int>(r)) << ": ";
    detail::write_terms(os, p, c.terms);
    switch (c.sense) {
      case RowSense::kLessEqual: os << " <= "; break;
      case RowSense::kGreaterEqual: os << " >= "; break;
      case RowSense::kEqual: os << " = "; break;
    }
    os << lp_number(c.rhs) << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < p.variables.size(); ++j) {
    const VariableSpec& v = p.variables[j];
    const std::string name = lp_name(v.name, 'x', static_cast<int>(j));
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      os << ' ' << name << " free\n";
    } else if (v.lower == v.upper) {
      os << ' ' << name << " = " << lp_number(v.lower) << '\n';
    } else {
      os << ' ' << (std::isfinite(v.lower) ? lp_number(v.lower) : "-inf")
         << " <= " << name << " <= "
         << (std::isfinite(v.upper) ? lp_number(v.upper) : "+inf") << '\n';
    }
  }
  bool any_int = false;
  for (std::size_t j = 0; j < p.variables.size(); ++j) {
    if (!p.variables[j].integral) continue;
    if (!any_int) os << "General\n";
    any_int = true;
    os << ' ' << lp_name(p.variables[j].name, 'x', static_cast<int>(j)) << '\n';
  }
  os << "End\n";
}

inline std::string to_lp_string(const ProblemSpec& p, const std::string& title = "") {
  std::ostringstream os;
  write_lp(os, p, title);
  return os.str();
}

}  // namespace apcdn::milp
