#pragma once

// CPLEX LP-file text, as read by CBC, HiGHS, GLPK and others. Rows and
// columns appear in model order so identical models give identical files.

#include <string>

#include "fcuc/io.hpp"
#include "fcuc/lp/model.hpp"

namespace fcuc::lp {

namespace detail {

inline void append_terms(std::string& out, const std::vector<Term>& terms, const Model& m) {
  int on_line = 0;
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    if (on_line == 8) {
      out += "\n   ";
      on_line = 0;
    }
    out += first ? (t.coef < 0 ? " -" : " ") : (t.coef < 0 ? " - " : " + ");
    out += io::fmt(std::abs(t.coef));
    out += ' ';
    out += m.var(t.var).name;
    first = false;
    ++on_line;
  }
  if (first) out += " 0 " + m.var(0).name;
}

}  // namespace detail

/// The objective constant is not representable in every reader's dialect;
/// it is written as a comment and must be added back by the caller.
inline std::string to_lp_string(const Model& m) {
  std::string out = "\\ objective constant " + io::fmt(m.objective_constant) + "\n";
  out += "Minimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.var(j).obj != 0.0) obj.push_back({j, m.var(j).obj});
  }
  if (m.num_vars() > 0) detail::append_terms(out, obj, m);
  out += "\nSubject To\n";
  for (const auto& row : m.rows()) {
    out += ' ' + row.name + ':';
    detail::append_terms(out, row.terms, m);
    switch (row.sense) {
      case Sense::Le: out += " <= "; break;
      case Sense::Ge: out += " >= "; break;
      case Sense::Eq: out += " = "; break;
    }
    out += io::fmt(row.rhs) + '\n';
  }
  out += "Bounds\n";
  for (const auto& v : m.vars()) {
    if (std::isinf(v.lb) && std::isinf(v.ub)) {
      out += ' ' + v.name + " free\n";
    } else if (v.lb == v.ub) {
      out += ' ' + v.name + " = " + io::fmt(v.lb) + '\n';
    } else {
      out += ' ' + (std::isinf(v.lb) ? std::string("-inf") : io::fmt(v.lb)) + " <= " + v.name + " <= " +
             (std::isinf(v.ub) ? std::string("+inf") : io::fmt(v.ub)) + '\n';
    }
  }
  bool any_binary = false;
  for (const auto& v : m.vars()) {
    if (v.type != VarType::Binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += ' ' + v.name + '\n';
  }
  out += "End\n";
  return out;
}

}  // namespace fcuc::lp
