#include "certclose/transform.hpp"

#include <algorithm>
#include <cmath>

#include "certclose/error.hpp"

namespace certclose {

void IntervalLinearSystem::validate() const {
  if (domains.size() != variables.size()) throw ModelError("ILS: domain count differs from variables");
  if (rel.size() != a.size() || b.size() != a.size() || source.size() != a.size()) {
    throw ModelError("ILS: |A|, |R|, |b| differ");
  }
  for (const auto& row : a) {
    if (row.size() != variables.size()) throw ModelError("ILS: row arity differs from variables");
    for (const auto& iv : row) {
      if (!iv.valid()) throw ModelError("ILS: inverted coefficient interval");
    }
  }
  for (const auto& iv : b) {
    if (!iv.valid()) throw ModelError("ILS: inverted rhs interval");
  }
  for (const auto& iv : domains) {
    if (!iv.valid()) throw ModelError("ILS: inverted domain");
  }
}

void IntervalLinearSystem::add_row(std::vector<Interval> coefs, Relation r, Interval rhs,
                                   std::size_t src) {
  if (coefs.size() != variables.size()) throw ModelError("ILS: row arity differs from variables");
  a.push_back(std::move(coefs));
  rel.push_back(r);
  b.push_back(rhs);
  source.push_back(src);
}

bool CertainLinearSystem::contains(std::span<const double> x, double tol) const {
  if (x.size() != cols()) return false;
  for (std::size_t j = 0; j < cols(); ++j) {
    if (!(domains[j].lo - tol <= x[j] && x[j] <= domains[j].hi + tol)) return false;
  }
  for (std::size_t i = 0; i < rows(); ++i) {
    if (b[i] == kInf) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < cols(); ++j) s += a[i][j] * x[j];
    if (s > b[i] + tol) return false;
  }
  return true;
}

namespace {

Interval coefficient_interval(const UncertainCSP& p, const Coefficient& c) {
  if (const auto* k = std::get_if<double>(&c)) return Interval::point(*k);
  const auto& id = std::get<ParamRef>(c).id;
  const auto& u = p.parameters().at(id);
  if (u.is_finite() && u.values().size() > 1) {
    throw ModelError("parameter '" + id +
                     "' has a finite non-singleton set; use enumeration or the parameter-monotone "
                     "transform");
  }
  Interval h = u.hull();
  if (!std::isfinite(h.lo) || !std::isfinite(h.hi)) {
    throw ModelError("parameter '" + id + "' has an unbounded uncertainty interval");
  }
  return h;
}

bool is_less(Relation r) { return r == Relation::Less || r == Relation::LessEq; }

void check_transformable(const IntervalLinearSystem& ils) {
  ils.validate();
  if (!is_poli(ils)) throw ModelError("system is not in the positive orthant");
  for (auto r : ils.rel) {
    if (r == Relation::Eq) throw ModelError("equality row present; rewrite equalities first");
  }
}

CertainLinearSystem transform(const IntervalLinearSystem& ils, CetKind kind) {
  check_transformable(ils);
  CertainLinearSystem out;
  out.variables = ils.variables;
  out.domains = ils.domains;
  out.source = ils.source;
  const bool full = kind == CetKind::Full;
  for (std::size_t i = 0; i < ils.rows(); ++i) {
    std::vector<double> row(ils.cols());
    double rhs;
    if (is_less(ils.rel[i])) {
      for (std::size_t j = 0; j < ils.cols(); ++j) row[j] = full ? ils.a[i][j].lo : ils.a[i][j].hi;
      rhs = full ? ils.b[i].hi : ils.b[i].lo;
    } else {
      for (std::size_t j = 0; j < ils.cols(); ++j) {
        row[j] = -(full ? ils.a[i][j].hi : ils.a[i][j].lo);
        if (row[j] == 0.0) row[j] = 0.0;  // no negative zeros in output
      }
      rhs = -(full ? ils.b[i].lo : ils.b[i].hi);
      if (rhs == 0.0) rhs = 0.0;
    }
    out.a.push_back(std::move(row));
    out.b.push_back(rhs);
  }
  return out;
}

}  // namespace

IntervalLinearSystem ucsp_to_ils(const UncertainCSP& p) {
  IntervalLinearSystem ils;
  ils.variables = p.variable_ids();
  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < ils.variables.size(); ++j) {
    col[ils.variables[j]] = j;
    ils.domains.push_back(p.variables().at(ils.variables[j]).hull());
  }
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    const auto* lin = std::get_if<LinearConstraint>(&p.constraints()[k]);
    if (!lin) throw ModelError("constraint " + std::to_string(k) + " is not linear");
    std::vector<Interval> row(ils.cols(), Interval::point(0.0));
    for (const auto& t : lin->lhs) {
      auto& cell = row[col.at(t.var)];
      cell = cell + coefficient_interval(p, t.coef);
    }
    ils.add_row(std::move(row), lin->rel, coefficient_interval(p, lin->rhs), k);
  }
  return ils;
}

IntervalLinearSystem rewrite_equalities(const IntervalLinearSystem& ils) {
  IntervalLinearSystem out;
  out.variables = ils.variables;
  out.domains = ils.domains;
  for (std::size_t i = 0; i < ils.rows(); ++i) {
    if (ils.rel[i] == Relation::Eq) {
      out.add_row(ils.a[i], Relation::GreaterEq, ils.b[i], ils.source[i]);
      out.add_row(ils.a[i], Relation::LessEq, ils.b[i], ils.source[i]);
    } else {
      out.add_row(ils.a[i], ils.rel[i], ils.b[i], ils.source[i]);
    }
  }
  return out;
}

bool is_poli(const IntervalLinearSystem& ils) {
  return std::all_of(ils.domains.begin(), ils.domains.end(),
                     [](const Interval& d) { return d.lo >= 0.0; });
}

CertainLinearSystem cet_poli(const IntervalLinearSystem& ils) {
  return transform(ils, CetKind::Full);
}

CertainLinearSystem cet_robust(const IntervalLinearSystem& ils) {
  return transform(ils, CetKind::Robust);
}

HullResult interval_hull_with_witnesses(const CertainLinearSystem& sys,
                                        std::span<const Interval> domains,
                                        const lp::SolveOptions& opts) {
  const std::size_t n = sys.cols();
  if (domains.size() != n) throw ModelError("hull: domain count differs from variables");
  HullResult res;
  res.box.coords.assign(n, Interval{});
  res.lower_witness.assign(n, {});
  res.upper_witness.assign(n, {});

  lp::LinearProgram base;
  base.objective.assign(n, 0.0);
  for (std::size_t i = 0; i < sys.rows(); ++i) {
    if (sys.b[i] == kInf) continue;
    if (sys.b[i] == -kInf) {
      res.box = Box::make_empty(n);
      return res;
    }
    base.rows.push_back({sys.a[i], lp::RowRelation::LessEq, sys.b[i]});
  }
  for (const auto& d : domains) {
    if (d.lo > d.hi) {
      res.box = Box::make_empty(n);
      return res;
    }
    base.lower.push_back(d.lo);
    base.upper.push_back(d.hi);
  }

  for (std::size_t j = 0; j < n; ++j) {
    for (int dir = 0; dir < 2; ++dir) {
      lp::LinearProgram prog = base;
      prog.objective[j] = 1.0;
      prog.sense = dir == 0 ? lp::Sense::Minimize : lp::Sense::Maximize;
      auto out = lp::solve(prog, opts);
      if (out.status == lp::Status::Infeasible) {
        res.box = Box::make_empty(n);
        res.lower_witness.assign(n, {});
        res.upper_witness.assign(n, {});
        return res;
      }
      if (dir == 0) {
        if (out.status == lp::Status::Unbounded) {
          res.box.coords[j].lo = -kInf;
        } else {
          res.box.coords[j].lo = out.value;
          res.lower_witness[j] = out.point;
        }
      } else {
        if (out.status == lp::Status::Unbounded) {
          res.box.coords[j].hi = kInf;
        } else {
          res.box.coords[j].hi = out.value;
          res.upper_witness[j] = out.point;
        }
      }
    }
  }
  return res;
}

Box interval_hull(const CertainLinearSystem& sys, std::span<const Interval> domains) {
  return interval_hull_with_witnesses(sys, domains).box;
}

UncertainCSP to_ucsp(const CertainLinearSystem& sys, const std::map<std::string, Domain>& vars) {
  UncertainCSP out;
  for (const auto& [id, d] : vars) out.add_variable(id, d);
  for (std::size_t i = 0; i < sys.rows(); ++i) {
    if (sys.b[i] == kInf) continue;  // vacuous
    LinearConstraint c;
    c.rel = Relation::LessEq;
    if (sys.b[i] == -kInf) {
      c.rhs = -1.0;  // 0 <= -1: unsatisfiable
    } else {
      for (std::size_t j = 0; j < sys.cols(); ++j) {
        if (sys.a[i][j] != 0.0) c.lhs.push_back({sys.a[i][j], sys.variables[j]});
      }
      c.rhs = sys.b[i];
    }
    out.add_constraint(std::move(c));
  }
  return out;
}

UncertainCSP certain_equivalent(const UncertainCSP& p, CetKind kind) {
  auto ils = rewrite_equalities(ucsp_to_ils(p));
  return to_ucsp(transform(ils, kind), p.variables());
}

Box projected_closure(const UncertainCSP& p, CetKind kind) {
  auto ils = rewrite_equalities(ucsp_to_ils(p));
  auto sys = transform(ils, kind);
  return interval_hull(sys, ils.domains);
}

// ---------------------------------------------------------------------------
// Parameter-monotone constraints

namespace {

/// Ordering of `param`'s values from strongest to weakest, the remaining
/// parameters of `p` left existentially quantified.
std::optional<std::vector<double>> monotone_ordering(const UncertainCSP& p,
                                                     const std::string& param) {
  const auto& u = p.parameters().at(param);
  if (!u.is_finite()) throw ModelError("parameter '" + param + "' has an infinite uncertainty set");

  struct Group {
    std::set<Assignment> sols;
    std::vector<double> values;
  };
  std::vector<Group> groups;
  for (double v : u.values()) {
    auto sols = complete_solutions(realize_partial(p, {{param, v}}));
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.sols == sols; });
    if (it == groups.end()) {
      groups.push_back({std::move(sols), {v}});
    } else {
      it->values.push_back(v);
    }
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    return a.sols.size() < b.sols.size();
  });
  for (std::size_t g = 1; g < groups.size(); ++g) {
    if (!std::includes(groups[g].sols.begin(), groups[g].sols.end(), groups[g - 1].sols.begin(),
                       groups[g - 1].sols.end())) {
      return std::nullopt;
    }
  }
  // Values with equal solution sets are ordered along the direction in which
  // the constraint weakens, so the weakest value is an extreme of U.
  bool increasing = true;
  if (groups.size() > 1) {
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    increasing = mean(groups.back().values) >= mean(groups.front().values);
  }
  std::vector<double> order;
  for (auto& g : groups) {
    if (increasing) {
      std::sort(g.values.begin(), g.values.end());
    } else {
      std::sort(g.values.begin(), g.values.end(), std::greater<>());
    }
    order.insert(order.end(), g.values.begin(), g.values.end());
  }
  return order;
}

}  // namespace

std::optional<std::vector<double>> is_parameter_monotone(const UncertainCSP& single) {
  if (single.parameters().size() != 1) {
    throw ModelError("parameter-monotone test needs exactly one parameter");
  }
  return monotone_ordering(single, single.parameters().begin()->first);
}

UncertainCSP cet_parameter_monotone(const UncertainCSP& p) {
  UncertainCSP q = p;
  for (const auto& id : p.parameter_ids()) {
    const auto& u = p.parameters().at(id);
    double top;
    if (u.is_singleton()) {
      top = u.hull().lo;
    } else {
      if (!u.is_finite()) {
        throw ModelError("parameter '" + id + "' is an interval; use the linear transform");
      }
      auto order = monotone_ordering(q, id);
      if (!order) throw ModelError("parameter '" + id + "' admits no monotone ordering");
      top = order->back();
    }
    q = realize_partial(q, {{id, top}});
  }
  return q;
}

// ---------------------------------------------------------------------------
// Single interval row over variables of arbitrary sign

bool OrthantPiece::contains(std::span<const double> x, double tol) const {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (signs[j] == Sign::NonNegative && x[j] < -tol) return false;
    if (signs[j] == Sign::NonPositive && x[j] > tol) return false;
    s += a[j] * x[j];
  }
  return s <= b + tol;
}

bool PiecewiseConstraint::contains(std::span<const double> x, double tol) const {
  return std::any_of(pieces.begin(), pieces.end(),
                     [&](const OrthantPiece& p) { return p.contains(x, tol); });
}

PiecewiseConstraint closure_single_row_general(const IntervalLinearSystem& row, CetKind kind) {
  row.validate();
  if (row.rows() != 1) throw ModelError("expected a single row; use the positive-orthant path");
  if (row.rel[0] == Relation::Eq) throw ModelError("equality row; rewrite equalities first");

  const std::size_t n = row.cols();
  std::vector<Interval> a = row.a[0];
  Interval b = row.b[0];
  if (!is_less(row.rel[0])) {
    for (auto& iv : a) iv = -iv;
    b = -b;
  }
  const bool full = kind == CetKind::Full;
  // Coefficient for x >= 0 and for x <= 0 under the chosen semantics.
  auto pick = [&](const Interval& c, bool nonneg) {
    return nonneg == full ? c.lo : c.hi;
  };

  std::vector<std::size_t> split;
  std::vector<Sign> base_signs(n, Sign::Any);
  std::vector<double> base_a(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Interval& d = row.domains[j];
    if (a[j].degenerate()) {
      base_a[j] = a[j].lo;
    } else if (d.lo >= 0.0) {
      base_a[j] = pick(a[j], true);
    } else if (d.hi <= 0.0) {
      base_a[j] = pick(a[j], false);
    } else {
      split.push_back(j);
    }
  }
  if (split.size() > 20) throw CapExceeded("too many sign-split variables");

  PiecewiseConstraint out;
  out.variables = row.variables;
  const double rhs = full ? b.hi : b.lo;
  for (std::size_t mask = 0; mask < (std::size_t{1} << split.size()); ++mask) {
    OrthantPiece piece{base_signs, base_a, rhs};
    for (std::size_t k = 0; k < split.size(); ++k) {
      const std::size_t j = split[k];
      const bool nonneg = (mask & (std::size_t{1} << k)) == 0;
      piece.signs[j] = nonneg ? Sign::NonNegative : Sign::NonPositive;
      piece.a[j] = pick(a[j], nonneg);
    }
    out.pieces.push_back(std::move(piece));
  }
  return out;
}

}  // namespace certclose
