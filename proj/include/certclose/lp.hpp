#pragma once

#include <ostream>
#include <string_view>
#include <vector>

#include "certclose/interval.hpp"

namespace certclose::lp {

/// Centralised solver tolerances.
namespace tol {
inline constexpr double kFeasibility = 1e-9;
inline constexpr double kPivot = 1e-10;
}  // namespace tol

enum class Sense { Minimize, Maximize };
enum class RowRelation { LessEq, Eq, GreaterEq };

struct Row {
  std::vector<double> coefs;
  RowRelation rel = RowRelation::LessEq;
  double rhs = 0.0;
};

/// Dense LP. Variable bounds default to [0, +inf) when `lower`/`upper` are
/// left empty; a lower bound of -inf makes the variable free below.
struct LinearProgram {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
};

enum class Status { Optimal, Unbounded, Infeasible };

std::string_view to_string(Status s);

struct Outcome {
  Status status = Status::Infeasible;
  double value = 0.0;              ///< optimal objective (Optimal only)
  std::vector<double> point;       ///< optimiser (Optimal only)
  std::size_t iterations = 0;
};

struct SolveOptions {
  /// 0 silent, 1 phase summaries, 2 full tableau after every pivot.
  int verbosity = 0;
  std::ostream* log = nullptr;
};

/// Two-phase primal simplex on a dense tableau with Bland's rule. Throws
/// ModelError on dimension mismatch or non-finite data.
Outcome solve(const LinearProgram& lp, const SolveOptions& opts = {});

/// Largest violation of any row or bound by `x`, each row scaled by
/// max(1, ||row||_inf).
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace certclose::lp
