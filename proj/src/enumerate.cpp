#include "certclose/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "certclose/error.hpp"

namespace certclose {

std::vector<Realization> realizations(const UncertainCSP& p, std::size_t cap) {
  const auto ids = p.parameter_ids();
  std::size_t total = 1;
  for (const auto& id : ids) {
    const auto& u = p.parameters().at(id);
    if (!u.is_finite()) {
      if (!u.is_singleton()) {
        throw ModelError("parameter '" + id + "' has an infinite uncertainty set");
      }
      continue;
    }
    if (total > cap / u.values().size()) throw CapExceeded("realisation count exceeds cap");
    total *= u.values().size();
  }
  if (total > cap) throw CapExceeded("realisation count exceeds cap");

  std::vector<Realization> out;
  out.reserve(total);
  std::vector<std::size_t> idx(ids.size(), 0);
  auto value_of = [&](std::size_t i) {
    const auto& u = p.parameters().at(ids[i]);
    return u.is_finite() ? u.values()[idx[i]] : u.hull().lo;
  };
  auto size_of = [&](std::size_t i) {
    const auto& u = p.parameters().at(ids[i]);
    return u.is_finite() ? u.values().size() : std::size_t{1};
  };
  for (;;) {
    Realization r;
    for (std::size_t i = 0; i < ids.size(); ++i) r.values[ids[i]] = value_of(i);
    out.push_back(std::move(r));
    std::size_t k = ids.size();
    for (;;) {
      if (k == 0) return out;
      --k;
      if (++idx[k] < size_of(k)) break;
      idx[k] = 0;
    }
  }
}

std::vector<Assignment> solve_realized(const UncertainCSP& csp) {
  if (!csp.all_domains_finite()) throw ModelError("backtracking needs finite domains");
  std::map<std::string, double> values;
  for (const auto& [id, u] : csp.parameters()) {
    if (!u.is_singleton()) throw ModelError("CSP still holds uncertain parameter '" + id + "'");
    values[id] = u.hull().lo;
  }
  const auto ids = csp.variable_ids();
  std::map<std::string, std::size_t> depth_of;
  for (std::size_t i = 0; i < ids.size(); ++i) depth_of[ids[i]] = i;

  // Each constraint is checked as soon as its deepest variable is assigned.
  std::vector<std::vector<const UncertainConstraint*>> check_at(ids.size());
  for (const auto& c : csp.constraints()) {
    auto vars = csp.variables_of(c);
    if (vars.empty()) {
      if (!holds(csp, c, values)) return {};
      continue;
    }
    std::size_t deepest = 0;
    for (const auto& v : vars) deepest = std::max(deepest, depth_of.at(v));
    check_at[deepest].push_back(&c);
  }

  std::vector<Assignment> out;
  Assignment current(ids.size());
  auto recurse = [&](auto&& self, std::size_t d) -> void {
    if (d == ids.size()) {
      out.push_back(current);
      return;
    }
    for (double v : csp.variables().at(ids[d]).values()) {
      current[d] = v;
      values[ids[d]] = v;
      bool ok = std::all_of(check_at[d].begin(), check_at[d].end(),
                            [&](const UncertainConstraint* c) { return holds(csp, *c, values); });
      if (ok) self(self, d + 1);
    }
    values.erase(ids[d]);
  };
  recurse(recurse, 0);
  return out;
}

std::vector<std::size_t> SupportTable::good_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < good.size(); ++i) {
    if (good[i]) out.push_back(i);
  }
  return out;
}

SupportTable support_table(const UncertainCSP& p, const EnumerateOptions& opts) {
  SupportTable t;
  t.variables = p.variable_ids();
  t.realisations = realizations(p, opts.max_realisations);
  t.good.assign(t.realisations.size(), false);
  std::map<Assignment, std::vector<std::size_t>> cover;
  for (std::size_t r = 0; r < t.realisations.size(); ++r) {
    auto sols = solve_realized(realize(p, t.realisations[r]));
    t.good[r] = !sols.empty();
    for (auto& s : sols) cover[std::move(s)].push_back(r);
  }
  for (auto& [s, rs] : cover) {
    t.solutions.push_back(s);
    t.cover.push_back(std::move(rs));
  }
  return t;
}

std::string_view to_string(ClosureKind k) {
  switch (k) {
    case ClosureKind::Full: return "full";
    case ClosureKind::RobustSet: return "robust-set";
    case ClosureKind::MostRobust: return "most-robust";
    case ClosureKind::CoveringSet: return "covering-set";
    case ClosureKind::ProjectedBox: return "hull";
  }
  return "?";
}

ClosureKind parse_closure_kind(std::string_view s) {
  if (s == "full") return ClosureKind::Full;
  if (s == "robust-set") return ClosureKind::RobustSet;
  if (s == "most-robust") return ClosureKind::MostRobust;
  if (s == "covering-set") return ClosureKind::CoveringSet;
  if (s == "hull" || s == "projected-box") return ClosureKind::ProjectedBox;
  throw ParseError("unknown closure kind '" + std::string(s) + "'");
}

namespace {

Closure base_closure(const SupportTable& t, ClosureKind kind) {
  Closure c;
  c.kind = kind;
  c.variables = t.variables;
  c.realisations = t.realisations;
  return c;
}

void add(Closure& c, const SupportTable& t, std::size_t s) {
  c.solutions.push_back(t.solutions[s]);
  c.support.push_back(t.cover[s]);
}

}  // namespace

Closure full_closure(const SupportTable& t) {
  Closure c = base_closure(t, ClosureKind::Full);
  for (std::size_t s = 0; s < t.solutions.size(); ++s) add(c, t, s);
  return c;
}

Closure robust_set(const SupportTable& t) {
  Closure c = base_closure(t, ClosureKind::RobustSet);
  const auto good = t.good_indices();
  for (std::size_t s = 0; s < t.solutions.size(); ++s) {
    if (t.cover[s] == good) add(c, t, s);
  }
  return c;
}

Closure most_robust_solution(const SupportTable& t) {
  Closure c = base_closure(t, ClosureKind::MostRobust);
  for (const auto& cv : t.cover) c.coverage = std::max(c.coverage, cv.size());
  for (std::size_t s = 0; s < t.solutions.size(); ++s) {
    if (t.cover[s].size() == c.coverage) add(c, t, s);
  }
  return c;
}

namespace {

/// Calls fn on every k-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

Closure covering_sets_minimal(const SupportTable& t, std::size_t max_cover) {
  Closure c = base_closure(t, ClosureKind::CoveringSet);
  const auto good = t.good_indices();
  if (good.empty()) return c;

  std::vector<std::size_t> pos(t.realisations.size(), 0);
  for (std::size_t i = 0; i < good.size(); ++i) pos[good[i]] = i;
  std::vector<std::vector<bool>> masks(t.solutions.size(), std::vector<bool>(good.size(), false));
  for (std::size_t s = 0; s < t.solutions.size(); ++s) {
    for (auto r : t.cover[s]) masks[s][pos[r]] = true;
  }
  auto covers_all = [&](const std::vector<std::size_t>& subset) {
    for (std::size_t g = 0; g < good.size(); ++g) {
      bool hit = std::any_of(subset.begin(), subset.end(), [&](std::size_t s) { return masks[s][g]; });
      if (!hit) return false;
    }
    return true;
  };

  std::vector<std::vector<std::size_t>> found;
  constexpr double kSubsetBudget = 5e7;
  bool exact = good.size() <= max_cover;
  if (exact) {
    double spent = 0.0;
    for (std::size_t k = 1; k <= t.solutions.size() && found.empty(); ++k) {
      spent += binomial(t.solutions.size(), k);
      if (spent > kSubsetBudget) {
        exact = false;
        break;
      }
      for_each_subset(t.solutions.size(), k, [&](const std::vector<std::size_t>& sub) {
        if (covers_all(sub)) found.push_back(sub);
      });
    }
  }
  if (!exact) {
    found.clear();
    std::vector<bool> covered(good.size(), false);
    std::vector<std::size_t> pick;
    std::size_t left = good.size();
    while (left > 0) {
      std::size_t best = 0, best_gain = 0;
      for (std::size_t s = 0; s < t.solutions.size(); ++s) {
        std::size_t gain = 0;
        for (std::size_t g = 0; g < good.size(); ++g) gain += masks[s][g] && !covered[g];
        if (gain > best_gain) best = s, best_gain = gain;
      }
      if (best_gain == 0) throw Error("good realisation without a covering solution");
      pick.push_back(best);
      for (std::size_t g = 0; g < good.size(); ++g) {
        if (masks[best][g] && !covered[g]) covered[g] = true, --left;
      }
    }
    std::sort(pick.begin(), pick.end());
    found.push_back(pick);
  }
  if (found.empty()) throw Error("good realisation without a covering solution");

  // Pool the solutions of every cover; covers refer to the pooled order.
  std::vector<std::size_t> pool;
  for (const auto& f : found) pool.insert(pool.end(), f.begin(), f.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  for (auto s : pool) add(c, t, s);
  for (const auto& f : found) {
    std::vector<std::size_t> local;
    for (auto s : f) local.push_back(static_cast<std::size_t>(
        std::lower_bound(pool.begin(), pool.end(), s) - pool.begin()));
    c.covers.push_back(std::move(local));
  }
  c.minimal_guaranteed = exact;
  return c;
}

Closure full_closure(const UncertainCSP& p, const EnumerateOptions& opts) {
  return full_closure(support_table(p, opts));
}
Closure robust_set(const UncertainCSP& p, const EnumerateOptions& opts) {
  return robust_set(support_table(p, opts));
}
Closure most_robust_solution(const UncertainCSP& p, const EnumerateOptions& opts) {
  return most_robust_solution(support_table(p, opts));
}
Closure covering_sets_minimal(const UncertainCSP& p, const EnumerateOptions& opts) {
  return covering_sets_minimal(support_table(p, opts), opts.max_cover);
}

Box bounding_box(const Closure& c) {
  if (c.kind == ClosureKind::ProjectedBox) return c.box;
  const std::size_t n = c.variables.size();
  if (c.solutions.empty()) return Box::make_empty(n);
  Box b;
  for (std::size_t j = 0; j < n; ++j) b.coords.push_back(Interval::point(c.solutions[0][j]));
  for (const auto& s : c.solutions) {
    for (std::size_t j = 0; j < n; ++j) {
      b.coords[j].lo = std::min(b.coords[j].lo, s[j]);
      b.coords[j].hi = std::max(b.coords[j].hi, s[j]);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Grid oracle

namespace {

std::vector<double> grid(const ValueSet& s, double step, int interior) {
  if (s.is_finite()) return s.values();
  Interval h = s.hull();
  if (!std::isfinite(h.lo) || !std::isfinite(h.hi)) throw ModelError("oracle needs bounded sets");
  if (h.degenerate()) return {h.lo};
  std::vector<double> out;
  if (step > 0) {
    auto n = static_cast<long long>(std::floor(h.width() / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(h.lo + static_cast<double>(k) * step);
    if (out.back() < h.hi) out.push_back(h.hi);
  } else {
    for (int k = 0; k <= interior + 1; ++k) {
      out.push_back(h.lo + h.width() * static_cast<double>(k) / (interior + 1));
    }
    out.back() = h.hi;
  }
  return out;
}

struct OracleRow {
  /// Per variable: constant part of the coefficient.
  std::vector<double> constant;
  double rhs_constant = 0.0;
  /// Local parameters: samples and per-variable weights (rhs weight last).
  struct Local {
    std::vector<double> samples;
    std::vector<double> var_weight;
    double rhs_weight = 0.0;
  };
  std::vector<Local> locals;
  Relation rel = Relation::LessEq;
};

}  // namespace

Box hull_oracle(const UncertainCSP& p, double step, const OracleOptions& opts) {
  if (!(step > 0)) throw ModelError("oracle step must be positive");
  const auto ids = p.variable_ids();
  const std::size_t n = ids.size();
  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < n; ++j) col[ids[j]] = j;

  std::vector<std::vector<double>> var_grid;
  double points = 1.0;
  for (const auto& id : ids) {
    var_grid.push_back(grid(p.variables().at(id), step, 0));
    points *= static_cast<double>(var_grid.back().size());
  }

  std::map<std::string, int> occurrences;
  for (const auto& c : p.constraints()) {
    for (const auto& id : p.parameters_of(c)) ++occurrences[id];
  }
  std::vector<std::string> shared;
  std::vector<std::vector<double>> shared_samples;
  for (const auto& [id, k] : occurrences) {
    const auto& u = p.parameters().at(id);
    if (!u.is_singleton() && (k > 1)) {
      shared.push_back(id);
      shared_samples.push_back(grid(u, 0.0, opts.interior_samples));
    }
  }
  if (shared.size() > opts.max_shared) throw CapExceeded("oracle: too many shared parameters");
  for (const auto& s : shared_samples) points *= static_cast<double>(s.size());
  if (points > static_cast<double>(opts.max_grid_points)) throw CapExceeded("oracle: grid too large");

  // One branch per joint sample of the shared parameters.
  std::vector<std::map<std::string, double>> branches(1);
  for (std::size_t i = 0; i < shared.size(); ++i) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& b : branches) {
      for (double v : shared_samples[i]) {
        auto c = b;
        c[shared[i]] = v;
        next.push_back(std::move(c));
      }
    }
    branches = std::move(next);
  }

  Box box = Box::make_empty(n);
  std::vector<double> x(n);
  std::vector<std::size_t> idx(n, 0);

  for (const auto& fix : branches) {
    UncertainCSP q = realize_partial(p, fix);
    std::vector<OracleRow> rows;
    std::vector<const UncertainConstraint*> relational;
    for (const auto& c : q.constraints()) {
      const auto* lin = std::get_if<LinearConstraint>(&c);
      if (!lin) {
        relational.push_back(&c);
        continue;
      }
      OracleRow r;
      r.rel = lin->rel;
      r.constant.assign(n, 0.0);
      std::map<std::string, OracleRow::Local> locals;
      auto param = [&](const std::string& id) -> OracleRow::Local& {
        auto it = locals.find(id);
        if (it == locals.end()) {
          OracleRow::Local l;
          l.samples = grid(q.parameters().at(id), 0.0, opts.interior_samples);
          l.var_weight.assign(n, 0.0);
          it = locals.emplace(id, std::move(l)).first;
        }
        return it->second;
      };
      for (const auto& t : lin->lhs) {
        if (const auto* k = std::get_if<double>(&t.coef)) {
          r.constant[col.at(t.var)] += *k;
        } else {
          param(std::get<ParamRef>(t.coef).id).var_weight[col.at(t.var)] += 1.0;
        }
      }
      if (const auto* k = std::get_if<double>(&lin->rhs)) {
        r.rhs_constant = *k;
      } else {
        param(std::get<ParamRef>(lin->rhs).id).rhs_weight += 1.0;
      }
      for (auto& [id, l] : locals) r.locals.push_back(std::move(l));
      rows.push_back(std::move(r));
    }

    auto accepted = [&]() {
      for (const auto& r : rows) {
        double lo = -r.rhs_constant, hi = -r.rhs_constant;
        for (std::size_t j = 0; j < n; ++j) lo += r.constant[j] * x[j];
        hi = lo;
        for (const auto& l : r.locals) {
          double w = -l.rhs_weight;
          for (std::size_t j = 0; j < n; ++j) w += l.var_weight[j] * x[j];
          double mn = kInf, mx = -kInf;
          for (double s : l.samples) {
            mn = std::min(mn, s * w);
            mx = std::max(mx, s * w);
          }
          lo += mn;
          hi += mx;
        }
        bool ok = false;
        switch (r.rel) {
          case Relation::LessEq: ok = lo <= opts.tol; break;
          case Relation::Less: ok = lo < 0.0; break;
          case Relation::Eq: ok = lo <= opts.tol && hi >= -opts.tol; break;
          case Relation::GreaterEq: ok = hi >= -opts.tol; break;
          case Relation::Greater: ok = hi > 0.0; break;
        }
        if (!ok) return false;
      }
      if (!relational.empty()) {
        std::map<std::string, double> v;
        for (std::size_t j = 0; j < n; ++j) v[ids[j]] = x[j];
        for (const auto* c : relational) {
          if (!satisfies(q, *c, v)) return false;
        }
      }
      return true;
    };

    std::fill(idx.begin(), idx.end(), 0);
    bool done = false;
    while (!done) {
      for (std::size_t j = 0; j < n; ++j) x[j] = var_grid[j][idx[j]];
      if (accepted()) {
        for (std::size_t j = 0; j < n; ++j) {
          if (box.empty) {
            box.coords[j] = Interval::point(x[j]);
          } else {
            box.coords[j].lo = std::min(box.coords[j].lo, x[j]);
            box.coords[j].hi = std::max(box.coords[j].hi, x[j]);
          }
        }
        box.empty = false;
      }
      done = true;
      for (std::size_t k = n; k-- > 0;) {
        if (++idx[k] < var_grid[k].size()) {
          done = false;
          break;
        }
        idx[k] = 0;
      }
    }
  }
  return box;
}

UncertainCSP promote_parameters(const UncertainCSP& p) {
  UncertainCSP out;
  for (const auto& [id, d] : p.variables()) out.add_variable(id, d);
  for (const auto& [id, u] : p.parameters()) {
    if (!u.is_finite()) {
      if (!u.is_singleton()) throw ModelError("cannot promote interval parameter '" + id + "'");
      out.add_variable(id, Domain::integers({u.hull().lo}));
    } else {
      out.add_variable(id, Domain::integers(u.values()));
    }
  }
  for (const auto& c : p.constraints()) {
    std::vector<std::string> scope = p.variables_of(c);
    auto params = p.parameters_of(c);
    scope.insert(scope.end(), params.begin(), params.end());
    auto pred = [p, c, scope](const std::vector<double>& vals) {
      std::map<std::string, double> v;
      for (std::size_t i = 0; i < scope.size(); ++i) v[scope[i]] = vals[i];
      return holds(p, c, v);
    };
    out.add_constraint(RelationalConstraint::from_predicate(scope, pred, "promoted"));
  }
  return out;
}

}  // namespace certclose
