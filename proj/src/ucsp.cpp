#include "certclose/ucsp.hpp"

#include <algorithm>
#include <cmath>

#include "certclose/error.hpp"

namespace certclose {

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Less: return "<";
    case Relation::LessEq: return "<=";
    case Relation::Eq: return "=";
    case Relation::GreaterEq: return ">=";
    case Relation::Greater: return ">";
  }
  return "?";
}

Relation parse_relation(std::string_view s) {
  if (s == "<") return Relation::Less;
  if (s == "<=" || s == "≤") return Relation::LessEq;
  if (s == "=" || s == "==") return Relation::Eq;
  if (s == ">=" || s == "≥") return Relation::GreaterEq;
  if (s == ">") return Relation::Greater;
  throw ParseError("unknown relation '" + std::string(s) + "'");
}

bool holds(double lhs, Relation r, double rhs) {
  switch (r) {
    case Relation::Less: return lhs < rhs;
    case Relation::LessEq: return lhs <= rhs;
    case Relation::Eq: return lhs == rhs;
    case Relation::GreaterEq: return lhs >= rhs;
    case Relation::Greater: return lhs > rhs;
  }
  return false;
}

Relation flip(Relation r) {
  switch (r) {
    case Relation::Less: return Relation::Greater;
    case Relation::LessEq: return Relation::GreaterEq;
    case Relation::Eq: return Relation::Eq;
    case Relation::GreaterEq: return Relation::LessEq;
    case Relation::Greater: return Relation::Less;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Value sets

bool ValueSet::contains(double v) const {
  if (finite_) return std::binary_search(values_.begin(), values_.end(), v);
  return hull_.contains(v);
}

std::optional<std::size_t> ValueSet::cardinality() const {
  if (finite_) return values_.size();
  if (hull_.degenerate()) return 1;
  return std::nullopt;
}

void ValueSet::init_finite(std::vector<double> values) {
  if (values.empty()) throw ModelError("finite set must be non-empty");
  for (double v : values) {
    if (!std::isfinite(v)) throw ModelError("finite set members must be finite reals");
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  finite_ = true;
  hull_ = {values.front(), values.back()};
  values_ = std::move(values);
}

void ValueSet::init_interval(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo <= hi)) {
    throw ModelError("interval requires lo <= hi");
  }
  if (lo == kInf || hi == -kInf) throw ModelError("interval is empty");
  finite_ = false;
  hull_ = {lo, hi};
  values_.clear();
}

Domain Domain::integers(std::vector<double> values) {
  for (double v : values) {
    if (std::isfinite(v) && v != std::floor(v)) {
      throw ModelError("integer domain holds non-integer value " + std::to_string(v));
    }
  }
  Domain d;
  d.init_finite(std::move(values));
  return d;
}

Domain Domain::int_range(long long lo, long long hi) {
  if (lo > hi) throw ModelError("integer range requires lo <= hi");
  std::vector<double> v;
  for (long long i = lo; i <= hi; ++i) v.push_back(static_cast<double>(i));
  return integers(std::move(v));
}

Domain Domain::interval(double lo, double hi) {
  Domain d;
  d.init_interval(lo, hi);
  return d;
}

UncertaintySet UncertaintySet::finite(std::vector<double> values) {
  UncertaintySet u;
  u.init_finite(std::move(values));
  return u;
}

UncertaintySet UncertaintySet::interval(double lo, double hi) {
  UncertaintySet u;
  u.init_interval(lo, hi);
  return u;
}

// ---------------------------------------------------------------------------
// Relational constraints

struct RelationalConstraint::Impl {
  std::vector<std::string> scope;
  std::optional<Expression> expr;
  std::optional<std::set<std::vector<double>>> table;
  Predicate pred;
  std::string label;
};

RelationalConstraint RelationalConstraint::from_expression(std::string_view source) {
  auto impl = std::make_shared<Impl>();
  impl->expr = Expression::parse(source);
  impl->scope = impl->expr->identifiers();
  impl->label = impl->expr->source();
  RelationalConstraint c;
  c.scope_ = impl->scope;
  c.impl_ = std::move(impl);
  return c;
}

RelationalConstraint RelationalConstraint::from_table(std::vector<std::string> scope,
                                                      std::set<std::vector<double>> tuples) {
  for (const auto& t : tuples) {
    if (t.size() != scope.size()) throw ModelError("table tuple arity differs from scope");
  }
  auto impl = std::make_shared<Impl>();
  impl->scope = std::move(scope);
  impl->table = std::move(tuples);
  impl->label = "table";
  RelationalConstraint c;
  c.scope_ = impl->scope;
  c.impl_ = std::move(impl);
  return c;
}

RelationalConstraint RelationalConstraint::from_predicate(std::vector<std::string> scope,
                                                          Predicate pred, std::string label) {
  auto impl = std::make_shared<Impl>();
  impl->scope = std::move(scope);
  impl->pred = std::move(pred);
  impl->label = std::move(label);
  RelationalConstraint c;
  c.scope_ = impl->scope;
  c.impl_ = std::move(impl);
  return c;
}

bool RelationalConstraint::evaluate(const std::vector<double>& scope_values) const {
  if (scope_values.size() != scope_.size()) {
    throw ModelError("relational constraint evaluated with wrong arity");
  }
  std::vector<double> full;
  full.reserve(impl_->scope.size());
  std::size_t next = 0;
  for (const auto& id : impl_->scope) {
    auto it = bound_.find(id);
    full.push_back(it != bound_.end() ? it->second : scope_values[next++]);
  }
  if (impl_->expr) return impl_->expr->evaluate(full) != 0.0;
  if (impl_->table) return impl_->table->count(full) != 0;
  return impl_->pred(full);
}

RelationalConstraint RelationalConstraint::bind(const std::map<std::string, double>& values) const {
  RelationalConstraint c = *this;
  c.scope_.clear();
  for (const auto& id : scope_) {
    auto it = values.find(id);
    if (it != values.end()) {
      c.bound_[id] = it->second;
    } else {
      c.scope_.push_back(id);
    }
  }
  return c;
}

const std::optional<Expression>& RelationalConstraint::expression() const { return impl_->expr; }

const std::set<std::vector<double>>* RelationalConstraint::table() const {
  return impl_->table ? &*impl_->table : nullptr;
}

const std::vector<std::string>& RelationalConstraint::original_scope() const {
  return impl_->scope;
}

const std::string& RelationalConstraint::label() const { return impl_->label; }

bool operator==(const RelationalConstraint& a, const RelationalConstraint& b) {
  if (a.scope_ != b.scope_ || a.bound_ != b.bound_) return false;
  if (a.impl_ == b.impl_) return true;
  const auto& x = *a.impl_;
  const auto& y = *b.impl_;
  if (x.scope != y.scope) return false;
  if (x.expr && y.expr) return x.expr->source() == y.expr->source();
  if (x.table && y.table) return *x.table == *y.table;
  return false;
}

// ---------------------------------------------------------------------------
// UncertainCSP

void UncertainCSP::add_variable(const std::string& id, Domain d) {
  if (id.empty()) throw ModelError("empty variable id");
  if (parameters_.count(id)) throw ModelError("id '" + id + "' is already a parameter");
  if (!variables_.emplace(id, std::move(d)).second) {
    throw ModelError("duplicate variable '" + id + "'");
  }
}

void UncertainCSP::add_parameter(const std::string& id, UncertaintySet u) {
  if (id.empty()) throw ModelError("empty parameter id");
  if (variables_.count(id)) throw ModelError("id '" + id + "' is already a variable");
  if (!parameters_.emplace(id, std::move(u)).second) {
    throw ModelError("duplicate parameter '" + id + "'");
  }
}

namespace {

void check_coef(const UncertainCSP& p, const Coefficient& c) {
  if (const auto* ref = std::get_if<ParamRef>(&c)) {
    if (!p.is_parameter(ref->id)) throw ModelError("unknown parameter '" + ref->id + "'");
  } else if (std::isnan(std::get<double>(c))) {
    throw ModelError("NaN coefficient");
  }
}

}  // namespace

void UncertainCSP::add_constraint(UncertainConstraint c) {
  if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
    for (const auto& t : lin->lhs) {
      if (!is_variable(t.var)) throw ModelError("unknown variable '" + t.var + "'");
      check_coef(*this, t.coef);
    }
    check_coef(*this, lin->rhs);
  } else {
    for (const auto& id : std::get<RelationalConstraint>(c).scope()) {
      if (!is_variable(id) && !is_parameter(id)) {
        throw ModelError("relational constraint references undeclared id '" + id + "'");
      }
    }
  }
  constraints_.push_back(std::move(c));
}

std::vector<std::string> UncertainCSP::variable_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, d] : variables_) ids.push_back(id);
  return ids;
}

std::vector<std::string> UncertainCSP::parameter_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, u] : parameters_) ids.push_back(id);
  return ids;
}

std::vector<std::string> UncertainCSP::parameters_of(const UncertainConstraint& c) const {
  std::set<std::string> ids;
  if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
    for (const auto& t : lin->lhs) {
      if (const auto* r = std::get_if<ParamRef>(&t.coef)) ids.insert(r->id);
    }
    if (const auto* r = std::get_if<ParamRef>(&lin->rhs)) ids.insert(r->id);
  } else {
    for (const auto& id : std::get<RelationalConstraint>(c).scope()) {
      if (is_parameter(id)) ids.insert(id);
    }
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::string> UncertainCSP::variables_of(const UncertainConstraint& c) const {
  std::set<std::string> ids;
  if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
    for (const auto& t : lin->lhs) ids.insert(t.var);
  } else {
    for (const auto& id : std::get<RelationalConstraint>(c).scope()) {
      if (is_variable(id)) ids.insert(id);
    }
  }
  return {ids.begin(), ids.end()};
}

bool UncertainCSP::is_certain() const {
  for (const auto& c : constraints_) {
    for (const auto& id : parameters_of(c)) {
      if (!parameters_.at(id).is_singleton()) return false;
    }
  }
  return true;
}

bool UncertainCSP::all_domains_finite() const {
  return std::all_of(variables_.begin(), variables_.end(),
                     [](const auto& kv) { return kv.second.is_finite(); });
}

// ---------------------------------------------------------------------------
// Realisation semantics

namespace {

double coef_value(const Coefficient& c, const std::map<std::string, double>& values) {
  if (const auto* v = std::get_if<double>(&c)) return *v;
  const auto& id = std::get<ParamRef>(c).id;
  auto it = values.find(id);
  if (it == values.end()) throw ModelError("no value for parameter '" + id + "'");
  return it->second;
}

double lookup(const std::map<std::string, double>& values, const std::string& id) {
  auto it = values.find(id);
  if (it == values.end()) throw ModelError("assignment does not cover '" + id + "'");
  return it->second;
}

Coefficient substitute(const Coefficient& c, const std::map<std::string, double>& values) {
  if (const auto* r = std::get_if<ParamRef>(&c)) {
    auto it = values.find(r->id);
    if (it != values.end()) return it->second;
  }
  return c;
}

}  // namespace

UncertainCSP realize_partial(const UncertainCSP& p, const std::map<std::string, double>& values) {
  UncertainCSP out;
  for (const auto& [id, d] : p.variables()) out.add_variable(id, d);
  for (const auto& [id, u] : p.parameters()) {
    if (!values.count(id)) out.add_parameter(id, u);
  }
  for (const auto& c : p.constraints()) {
    if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
      LinearConstraint r = *lin;
      for (auto& t : r.lhs) t.coef = substitute(t.coef, values);
      r.rhs = substitute(r.rhs, values);
      out.add_constraint(std::move(r));
    } else {
      out.add_constraint(std::get<RelationalConstraint>(c).bind(values));
    }
  }
  return out;
}

namespace {

/// Calls `fn` with every combination of values of finite sets `sets`.
template <class Fn>
bool any_combination(const std::vector<const std::vector<double>*>& sets, Fn&& fn) {
  std::vector<std::size_t> idx(sets.size(), 0);
  std::vector<double> vals(sets.size());
  for (;;) {
    for (std::size_t i = 0; i < sets.size(); ++i) vals[i] = (*sets[i])[idx[i]];
    if (fn(vals)) return true;
    std::size_t k = sets.size();
    while (k > 0) {
      --k;
      if (++idx[k] < sets[k]->size()) break;
      idx[k] = 0;
      if (k == 0) return false;
    }
    if (sets.empty()) return false;
  }
}

bool satisfies_linear(const UncertainCSP& p, const LinearConstraint& c,
                      const std::map<std::string, double>& v) {
  // f(lambda) = lhs - rhs is affine in each parameter: constant + sum_p lambda_p * w_p.
  double constant = 0.0;
  std::map<std::string, double> weight;
  for (const auto& t : c.lhs) {
    double x = lookup(v, t.var);
    if (const auto* k = std::get_if<double>(&t.coef)) {
      constant += *k * x;
    } else {
      weight[std::get<ParamRef>(t.coef).id] += x;
    }
  }
  if (const auto* k = std::get_if<double>(&c.rhs)) {
    constant -= *k;
  } else {
    weight[std::get<ParamRef>(c.rhs).id] -= 1.0;
  }

  std::vector<std::string> enumerated;
  std::vector<const std::vector<double>*> sets;
  Interval base = Interval::point(constant);
  for (const auto& [id, w] : weight) {
    const auto& u = p.parameters().at(id);
    if (u.is_finite() && u.values().size() > 1) {
      enumerated.push_back(id);
      sets.push_back(&u.values());
    } else {
      base = base + scale(u.hull(), w);
    }
  }
  return any_combination(sets, [&](const std::vector<double>& vals) {
    Interval f = base;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      f = f + Interval::point(vals[i] * weight.at(enumerated[i]));
    }
    switch (c.rel) {
      case Relation::LessEq: return f.lo <= 0.0;
      case Relation::Less: return f.lo < 0.0;
      case Relation::Eq: return f.lo <= 0.0 && 0.0 <= f.hi;
      case Relation::GreaterEq: return f.hi >= 0.0;
      case Relation::Greater: return f.hi > 0.0;
    }
    return false;
  });
}

bool satisfies_relational(const UncertainCSP& p, const RelationalConstraint& c,
                          const std::map<std::string, double>& v) {
  std::vector<double> vals(c.scope().size());
  std::vector<std::size_t> param_pos;
  std::vector<const std::vector<double>*> sets;
  for (std::size_t i = 0; i < c.scope().size(); ++i) {
    const auto& id = c.scope()[i];
    if (p.is_parameter(id)) {
      const auto& u = p.parameters().at(id);
      if (!u.is_finite()) {
        if (!u.is_singleton()) {
          throw ModelError("relational constraint over interval parameter '" + id + "'");
        }
        vals[i] = u.hull().lo;
        continue;
      }
      param_pos.push_back(i);
      sets.push_back(&u.values());
    } else {
      vals[i] = lookup(v, id);
    }
  }
  return any_combination(sets, [&](const std::vector<double>& pv) {
    for (std::size_t k = 0; k < pv.size(); ++k) vals[param_pos[k]] = pv[k];
    return c.evaluate(vals);
  });
}

}  // namespace

UncertainCSP realize(const UncertainCSP& p, const Realization& r) {
  for (const auto& [id, value] : r.values) {
    auto it = p.parameters().find(id);
    if (it == p.parameters().end()) throw ModelError("unknown parameter '" + id + "'");
    if (!it->second.contains(value)) {
      throw ModelError("value " + std::to_string(value) + " not in uncertainty set of '" + id + "'");
    }
  }
  for (const auto& [id, u] : p.parameters()) {
    if (!r.values.count(id)) throw ModelError("realisation misses parameter '" + id + "'");
  }
  return realize_partial(p, r.values);
}

bool holds(const UncertainCSP& p, const UncertainConstraint& c,
           const std::map<std::string, double>& values) {
  if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
    double lhs = 0.0;
    for (const auto& t : lin->lhs) lhs += coef_value(t.coef, values) * lookup(values, t.var);
    return holds(lhs, lin->rel, coef_value(lin->rhs, values));
  }
  const auto& rel = std::get<RelationalConstraint>(c);
  std::vector<double> vals;
  for (const auto& id : rel.scope()) {
    if (p.is_parameter(id) && !values.count(id)) {
      const auto& u = p.parameters().at(id);
      if (!u.is_singleton()) throw ModelError("no value for parameter '" + id + "'");
      vals.push_back(u.hull().lo);
    } else {
      vals.push_back(lookup(values, id));
    }
  }
  return rel.evaluate(vals);
}

bool satisfies(const UncertainCSP& p, const UncertainConstraint& c,
               const std::map<std::string, double>& v) {
  for (const auto& id : p.variables_of(c)) {
    if (!v.count(id)) throw ModelError("partial assignment: '" + id + "' unassigned");
  }
  if (const auto* lin = std::get_if<LinearConstraint>(&c)) return satisfies_linear(p, *lin, v);
  return satisfies_relational(p, std::get<RelationalConstraint>(c), v);
}

std::set<Assignment> complete_solutions(const UncertainCSP& p) {
  if (!p.all_domains_finite()) throw ModelError("brute-force solution set needs finite domains");

  std::map<std::string, int> occurrences;
  for (const auto& c : p.constraints()) {
    for (const auto& id : p.parameters_of(c)) ++occurrences[id];
  }
  std::vector<std::string> shared;
  std::vector<const std::vector<double>*> shared_sets;
  for (const auto& [id, n] : occurrences) {
    const auto& u = p.parameters().at(id);
    if (n > 1 && !u.is_singleton()) {
      if (!u.is_finite()) {
        throw ModelError("interval parameter '" + id + "' shared across constraints");
      }
      shared.push_back(id);
      shared_sets.push_back(&u.values());
    }
  }
  // One partially realised problem per combination of shared parameters.
  std::vector<UncertainCSP> branches;
  any_combination(shared_sets, [&](const std::vector<double>& vals) {
    std::map<std::string, double> fix;
    for (std::size_t i = 0; i < vals.size(); ++i) fix[shared[i]] = vals[i];
    branches.push_back(realize_partial(p, fix));
    return false;
  });

  const auto ids = p.variable_ids();
  std::vector<const std::vector<double>*> doms;
  for (const auto& id : ids) doms.push_back(&p.variables().at(id).values());

  std::set<Assignment> out;
  any_combination(doms, [&](const std::vector<double>& vals) {
    std::map<std::string, double> v;
    for (std::size_t i = 0; i < ids.size(); ++i) v[ids[i]] = vals[i];
    for (const auto& b : branches) {
      bool ok = std::all_of(b.constraints().begin(), b.constraints().end(),
                            [&](const auto& c) { return satisfies(b, c, v); });
      if (ok) {
        out.insert(vals);
        break;
      }
    }
    return false;
  });
  return out;
}

bool subsumes(const UncertainCSP& lower, const UncertainCSP& upper) {
  if (lower.variables() != upper.variables()) {
    throw ModelError("subsumes: operands declare different variables or domains");
  }
  auto a = complete_solutions(lower);
  auto b = complete_solutions(upper);
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool equivalent(const UncertainCSP& a, const UncertainCSP& b) {
  return subsumes(a, b) && subsumes(b, a);
}

UncertainCSP conjoin(const UncertainCSP& a, const UncertainCSP& b) {
  if (a.variables() != b.variables()) throw ModelError("conjoin: different variables");
  UncertainCSP out = a;
  for (const auto& [id, u] : b.parameters()) {
    auto it = a.parameters().find(id);
    if (it == a.parameters().end()) {
      out.add_parameter(id, u);
    } else if (!(it->second == u)) {
      throw ModelError("conjoin: parameter '" + id + "' declared with different sets");
    }
  }
  for (const auto& c : b.constraints()) out.add_constraint(c);
  return out;
}

UncertainCSP disjoin(const UncertainCSP& a, const UncertainCSP& b) {
  if (a.variables() != b.variables()) throw ModelError("disjoin: different variables");
  UncertainCSP out = universal(a);
  std::vector<std::string> scope = a.variable_ids();
  for (const auto* side : {&a, &b}) {
    for (const auto& [id, u] : side->parameters()) {
      auto it = out.parameters().find(id);
      if (it == out.parameters().end()) {
        out.add_parameter(id, u);
        scope.push_back(id);
      } else if (!(it->second == u)) {
        throw ModelError("disjoin: parameter '" + id + "' declared with different sets");
      }
    }
  }
  auto pred = [a, b, scope](const std::vector<double>& vals) {
    std::map<std::string, double> v;
    for (std::size_t i = 0; i < scope.size(); ++i) v[scope[i]] = vals[i];
    auto all = [&v](const UncertainCSP& side) {
      return std::all_of(side.constraints().begin(), side.constraints().end(),
                         [&](const auto& c) { return holds(side, c, v); });
    };
    return all(a) || all(b);
  };
  out.add_constraint(RelationalConstraint::from_predicate(scope, pred, "disjunction"));
  return out;
}

UncertainCSP universal(const UncertainCSP& like) {
  UncertainCSP out;
  for (const auto& [id, d] : like.variables()) out.add_variable(id, d);
  return out;
}

}  // namespace certclose
