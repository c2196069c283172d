#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certclose/interval.hpp"
#include "certclose/lp.hpp"
#include "certclose/ucsp.hpp"

namespace certclose {

/// Interval linear system <A, R, b> over real variables with interval domains.
struct IntervalLinearSystem {
  std::vector<std::string> variables;
  std::vector<Interval> domains;
  std::vector<std::vector<Interval>> a;  ///< m x n
  std::vector<Relation> rel;
  std::vector<Interval> b;
  /// Index of the source constraint that produced each row.
  std::vector<std::size_t> source;

  std::size_t rows() const { return a.size(); }
  std::size_t cols() const { return variables.size(); }
  /// Throws ModelError on arity mismatch or an inverted interval.
  void validate() const;
  void add_row(std::vector<Interval> coefs, Relation r, Interval rhs, std::size_t src);
};

/// Real system A'x <= b' produced by a certain equivalence transform. A row
/// with b' = +inf is vacuous and is skipped by the hull computation.
struct CertainLinearSystem {
  std::vector<std::string> variables;
  std::vector<Interval> domains;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<std::size_t> source;

  std::size_t rows() const { return a.size(); }
  std::size_t cols() const { return variables.size(); }
  bool contains(std::span<const double> x, double tol = 0.0) const;
};

/// One row per linear constraint; parameters become their uncertainty
/// intervals, constants degenerate intervals. Finite variable domains are
/// relaxed to their hull.
IntervalLinearSystem ucsp_to_ils(const UncertainCSP& p);

/// Replaces each `=` row by a `>=` row followed by a `<=` row.
IntervalLinearSystem rewrite_equalities(const IntervalLinearSystem& ils);

/// Every variable domain lies in [0, +inf).
bool is_poli(const IntervalLinearSystem& ils);

/// Tight transform for the full closure of a positive-orthant system:
/// `<`/`<=` rows take (lower A, upper b); `>`/`>=` rows take (-upper A, -lower b).
/// Strict relations are treated as their closure.
CertainLinearSystem cet_poli(const IntervalLinearSystem& ils);

/// Robust transform: `<=` rows take (upper A, lower b); `>=` rows take
/// (-lower A, -upper b). Solutions satisfy every realisation.
CertainLinearSystem cet_robust(const IntervalLinearSystem& ils);

struct HullResult {
  Box box;
  /// LP optimisers attaining the lower/upper bound of each coordinate
  /// (empty vector where the bound is infinite).
  std::vector<std::vector<double>> lower_witness;
  std::vector<std::vector<double>> upper_witness;
};

/// 2n LPs: min and max of every variable over the system and the domains.
/// Any infeasible LP yields an empty box; unbounded directions give +/-inf.
HullResult interval_hull_with_witnesses(const CertainLinearSystem& sys,
                                        std::span<const Interval> domains,
                                        const lp::SolveOptions& opts = {});
Box interval_hull(const CertainLinearSystem& sys, std::span<const Interval> domains);

enum class CetKind { Full, Robust };

/// Constraint-wise transform of a linear UCSP to a certain UCSP with the same
/// variables and domains (finite domains are kept as they are).
UncertainCSP certain_equivalent(const UncertainCSP& p, CetKind kind = CetKind::Full);

/// Certain linear UCSP encoding of `sys` over the given variable declarations.
UncertainCSP to_ucsp(const CertainLinearSystem& sys, const std::map<std::string, Domain>& vars);

/// Transform then hull: the projected full closure (or robust box) of a
/// positive-orthant linear UCSP.
Box projected_closure(const UncertainCSP& p, CetKind kind = CetKind::Full);

// ---------------------------------------------------------------------------
// Parameter-monotone constraints

/// For a UCSP with exactly one parameter (finite set) and finite variable
/// domains: an ordering of the parameter's values from strongest to weakest
/// such that each realised constraint implies every later one, or nullopt.
std::optional<std::vector<double>> is_parameter_monotone(const UncertainCSP& single);

/// Replaces each finite-set parameter in turn by the weakest value of its
/// monotone ordering (the other parameters stay existentially quantified when
/// the ordering is tested). Throws ModelError when some parameter admits no
/// ordering.
UncertainCSP cet_parameter_monotone(const UncertainCSP& p);

// ---------------------------------------------------------------------------
// Single interval row over variables of arbitrary sign

enum class Sign { Any, NonNegative, NonPositive };

/// a.x <= b restricted to the orthant given by `signs`.
struct OrthantPiece {
  std::vector<Sign> signs;
  std::vector<double> a;
  double b = 0.0;
  bool contains(std::span<const double> x, double tol = 0.0) const;
};

/// Disjunction of orthant pieces.
struct PiecewiseConstraint {
  std::vector<std::string> variables;
  std::vector<OrthantPiece> pieces;
  bool contains(std::span<const double> x, double tol = 0.0) const;
};

/// Full (or robust) closure of a single interval inequality whose variables
/// may take negative values, split by coordinate sign. Only variables whose
/// coefficient is a proper interval and whose domain spans zero are split.
PiecewiseConstraint closure_single_row_general(const IntervalLinearSystem& row,
                                               CetKind kind = CetKind::Full);

}  // namespace certclose
