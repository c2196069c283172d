#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "certclose/expression.hpp"
#include "certclose/interval.hpp"

namespace certclose {

enum class Relation { Less, LessEq, Eq, GreaterEq, Greater };

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view s);
bool holds(double lhs, Relation r, double rhs);
/// The relation obtained by multiplying both sides by -1.
Relation flip(Relation r);

/// A finite set of reals or a closed real interval. Shared representation of
/// variable domains and parameter uncertainty sets.
class ValueSet {
 public:
  bool is_finite() const { return finite_; }
  /// Sorted, distinct members (finite sets only).
  const std::vector<double>& values() const { return values_; }
  /// Smallest enclosing interval.
  Interval hull() const { return hull_; }
  bool contains(double v) const;
  /// Members for a finite set, infinite for a proper interval, 1 for a point interval.
  std::optional<std::size_t> cardinality() const;
  bool is_singleton() const { return cardinality() == std::optional<std::size_t>{1}; }
  bool nonnegative() const { return hull_.lo >= 0.0; }

  friend bool operator==(const ValueSet&, const ValueSet&) = default;

 protected:
  ValueSet() = default;
  void init_finite(std::vector<double> values);
  void init_interval(double lo, double hi);

 private:
  bool finite_ = false;
  std::vector<double> values_;
  Interval hull_;
};

/// Variable domain: a finite set of integers or a real interval (upper end may
/// be +inf, lower end may be -inf).
class Domain : public ValueSet {
 public:
  static Domain integers(std::vector<double> values);
  static Domain int_range(long long lo, long long hi);
  static Domain interval(double lo, double hi);
  /// True iff every value is >= 0 (the positive-orthant flag).
  bool positive_orthant() const { return nonnegative(); }
};

/// Uncertainty set of a parameter: finite set of reals or closed interval.
class UncertaintySet : public ValueSet {
 public:
  static UncertaintySet finite(std::vector<double> values);
  static UncertaintySet interval(double lo, double hi);
  static UncertaintySet point(double v) { return finite({v}); }
};

struct ParamRef {
  std::string id;
  friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

/// A coefficient of a linear constraint: a constant or a parameter reference.
using Coefficient = std::variant<double, ParamRef>;

struct Term {
  Coefficient coef;
  std::string var;
  friend bool operator==(const Term&, const Term&) = default;
};

/// sum(coef_i * var_i) rel rhs.
struct LinearConstraint {
  std::vector<Term> lhs;
  Relation rel = Relation::LessEq;
  Coefficient rhs = 0.0;
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// Constraint over a finite scope of variables and parameters, given by an
/// expression, an explicit table of allowed tuples, or a callback.
class RelationalConstraint {
 public:
  using Predicate = std::function<bool(const std::vector<double>&)>;

  static RelationalConstraint from_expression(std::string_view source);
  static RelationalConstraint from_table(std::vector<std::string> scope,
                                         std::set<std::vector<double>> tuples);
  static RelationalConstraint from_predicate(std::vector<std::string> scope, Predicate pred,
                                             std::string label);

  /// Ids still free (not bound) in this constraint, in evaluation order.
  const std::vector<std::string>& scope() const { return scope_; }
  /// Values fixed by bind().
  const std::map<std::string, double>& bindings() const { return bound_; }

  bool evaluate(const std::vector<double>& scope_values) const;

  /// Fixes the listed ids to values; the ids leave the scope.
  RelationalConstraint bind(const std::map<std::string, double>& values) const;

  const std::optional<Expression>& expression() const;
  /// Allowed tuples over the original scope (table form only).
  const std::set<std::vector<double>>* table() const;
  /// Scope before any binding.
  const std::vector<std::string>& original_scope() const;
  const std::string& label() const;

  friend bool operator==(const RelationalConstraint& a, const RelationalConstraint& b);

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::vector<std::string> scope_;
  std::map<std::string, double> bound_;
};

using UncertainConstraint = std::variant<LinearConstraint, RelationalConstraint>;

/// Total fixing of parameters to members of their uncertainty sets.
struct Realization {
  std::map<std::string, double> values;
  friend bool operator==(const Realization&, const Realization&) = default;
};

/// Values aligned with UncertainCSP::variable_ids() (sorted by id).
using Assignment = std::vector<double>;

/// Uncertain CSP: variables with domains, parameters with uncertainty sets,
/// and constraints over both. A parameter occurring in several constraints
/// takes a single shared value under a realisation. Parameters are mutually
/// independent: no constraint restricts parameters alone.
class UncertainCSP {
 public:
  void add_variable(const std::string& id, Domain d);
  void add_parameter(const std::string& id, UncertaintySet u);
  /// Validates that every referenced id is declared.
  void add_constraint(UncertainConstraint c);

  const std::map<std::string, Domain>& variables() const { return variables_; }
  const std::map<std::string, UncertaintySet>& parameters() const { return parameters_; }
  const std::vector<UncertainConstraint>& constraints() const { return constraints_; }

  std::vector<std::string> variable_ids() const;
  std::vector<std::string> parameter_ids() const;
  bool is_variable(const std::string& id) const { return variables_.count(id) != 0; }
  bool is_parameter(const std::string& id) const { return parameters_.count(id) != 0; }

  /// Parameters referenced by constraint `c`, sorted.
  std::vector<std::string> parameters_of(const UncertainConstraint& c) const;
  /// Variables referenced by constraint `c`, sorted.
  std::vector<std::string> variables_of(const UncertainConstraint& c) const;

  /// No constraint references a parameter with more than one value.
  bool is_certain() const;
  bool all_domains_finite() const;

  friend bool operator==(const UncertainCSP&, const UncertainCSP&) = default;

 private:
  std::map<std::string, Domain> variables_;
  std::map<std::string, UncertaintySet> parameters_;
  std::vector<UncertainConstraint> constraints_;
};

/// Substitutes every parameter by its value under `r`. The result declares no
/// parameters and keeps variables and domains unchanged.
UncertainCSP realize(const UncertainCSP& p, const Realization& r);

/// Substitutes only the listed parameters; the others stay declared. Values
/// are not checked for membership.
UncertainCSP realize_partial(const UncertainCSP& p, const std::map<std::string, double>& values);

/// Evaluates a constraint with every variable and parameter in `values`.
bool holds(const UncertainCSP& p, const UncertainConstraint& c,
           const std::map<std::string, double>& values);

/// Local satisfaction: true iff some values of c's own parameters make the
/// realised constraint hold under the variable values `v`. Interval
/// parameters are decided by sign-case interval evaluation, finite sets by
/// enumeration.
bool satisfies(const UncertainCSP& p, const UncertainConstraint& c,
               const std::map<std::string, double>& v);

/// Complete solution set by brute force over finite variable domains.
/// Parameters occurring in several constraints must have finite sets and are
/// enumerated jointly; the others are decided locally by satisfies().
std::set<Assignment> complete_solutions(const UncertainCSP& p);

/// True iff the complete solution set of `lower` is contained in that of
/// `upper`. Both must declare identical finite variable domains.
bool subsumes(const UncertainCSP& lower, const UncertainCSP& upper);
bool equivalent(const UncertainCSP& a, const UncertainCSP& b);

/// Conjunction: constraints of both (parameters merged by id).
UncertainCSP conjoin(const UncertainCSP& a, const UncertainCSP& b);
/// Disjunction, encoded as one relational constraint over all ids.
UncertainCSP disjoin(const UncertainCSP& a, const UncertainCSP& b);
/// Same variables, no constraints: the universal constraint.
UncertainCSP universal(const UncertainCSP& like);

}  // namespace certclose
