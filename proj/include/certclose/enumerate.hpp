#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "certclose/interval.hpp"
#include "certclose/ucsp.hpp"

namespace certclose {

struct EnumerateOptions {
  std::size_t max_realisations = 1'000'000;
  /// Exact minimum-cover search runs up to this many good realisations;
  /// beyond it a greedy cover is returned and flagged.
  std::size_t max_cover = 20;
};

/// Cartesian product of the parameters' finite sets, ordered by parameter id
/// then set order (odometer with the last id fastest).
std::vector<Realization> realizations(const UncertainCSP& p, std::size_t cap = 1'000'000);

/// All solutions of a certain CSP with finite domains by backtracking
/// (variables in id order, values in domain order). The result is sorted.
std::vector<Assignment> solve_realized(const UncertainCSP& csp);

/// Support information: which solution covers which realisation.
struct SupportTable {
  std::vector<std::string> variables;
  std::vector<Realization> realisations;
  std::vector<bool> good;
  std::vector<Assignment> solutions;
  /// cover[s]: sorted indices of the realisations solution s satisfies.
  std::vector<std::vector<std::size_t>> cover;

  std::vector<std::size_t> good_indices() const;
};

SupportTable support_table(const UncertainCSP& p, const EnumerateOptions& opts = {});

enum class ClosureKind { Full, RobustSet, MostRobust, CoveringSet, ProjectedBox };

std::string_view to_string(ClosureKind k);
ClosureKind parse_closure_kind(std::string_view s);

struct Closure {
  ClosureKind kind = ClosureKind::Full;
  std::vector<std::string> variables;
  std::vector<Assignment> solutions;
  /// Aligned with `solutions` when support is recorded, otherwise empty.
  std::vector<std::vector<std::size_t>> support;
  /// Realisations behind the support indices.
  std::vector<Realization> realisations;
  /// ProjectedBox only.
  Box box;
  /// MostRobust: realisations covered by each maximiser.
  std::size_t coverage = 0;
  /// CoveringSet: every cover found, as indices into `solutions`.
  std::vector<std::vector<std::size_t>> covers;
  /// CoveringSet: false when the greedy fallback produced `covers`.
  bool minimal_guaranteed = true;

  bool empty() const { return kind == ClosureKind::ProjectedBox ? box.empty : solutions.empty(); }
};

Closure full_closure(const SupportTable& t);
/// Solutions covering every good realisation.
Closure robust_set(const SupportTable& t);
/// Solutions of maximal coverage, lexicographically smallest first.
Closure most_robust_solution(const SupportTable& t);
/// All covers of minimum cardinality; `solutions` is their union.
Closure covering_sets_minimal(const SupportTable& t, std::size_t max_cover = 20);

Closure full_closure(const UncertainCSP& p, const EnumerateOptions& opts = {});
Closure robust_set(const UncertainCSP& p, const EnumerateOptions& opts = {});
Closure most_robust_solution(const UncertainCSP& p, const EnumerateOptions& opts = {});
Closure covering_sets_minimal(const UncertainCSP& p, const EnumerateOptions& opts = {});

/// Bounding box of the closure's solutions (empty box for an empty closure).
Box bounding_box(const Closure& c);

struct OracleOptions {
  /// Interior samples per uncertainty interval, on top of both endpoints.
  int interior_samples = 9;
  /// Parameters shared by several constraints are sampled jointly; at most this many.
  std::size_t max_shared = 3;
  std::size_t max_grid_points = 20'000'000;
  /// Slack on weak relations, absorbing grid rounding.
  double tol = 1e-9;
};

/// Grid oracle for the projected full closure: samples every bounded
/// variable domain with `step` (finite domains use their members) and every
/// uncertainty interval at endpoints plus interior points; returns the
/// bounding box of grid points satisfied under some sampled realisation.
/// Parameters local to one linear constraint are handled by per-parameter
/// minima and maxima over their samples; `=` rows accept a point when the
/// sampled range of lhs - rhs straddles zero.
Box hull_oracle(const UncertainCSP& p, double step, const OracleOptions& opts = {});

/// Classical CSP in which every parameter becomes a variable ranging over its
/// (finite, integer) uncertainty set.
UncertainCSP promote_parameters(const UncertainCSP& p);

}  // namespace certclose
