#include "certclose/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "certclose/error.hpp"

namespace certclose::lp {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Unbounded: return "unbounded";
    case Status::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

constexpr double kOptimality = 1e-9;
constexpr std::size_t kMaxIterations = 1'000'000;

// x_j = offset + y[col]   (Shift)
// x_j = offset - y[col]   (Mirror, finite upper bound only)
// x_j = y[col] - y[col2]  (Split, free variable)
struct VarMap {
  enum class Kind { Shift, Mirror, Split } kind = Kind::Shift;
  double offset = 0.0;
  std::size_t col = 0;
  std::size_t col2 = 0;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double& cost(std::size_t j) { return at(m_, j); }
  double& objective() { return at(m_, n_); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t p, std::size_t q) {
    const double piv = at(p, q);
    for (std::size_t j = 0; j <= n_; ++j) at(p, j) /= piv;
    at(p, q) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == p) continue;
      const double f = at(i, q);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(p, j);
      at(i, q) = 0.0;
    }
    basis_[p] = q;
  }

  /// Sets the cost row to c - c_B B^-1 A and the objective cell to -c_B b.
  void price(const std::vector<double>& c) {
    for (std::size_t j = 0; j < n_; ++j) cost(j) = c[j];
    objective() = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(m_, j) -= cb * at(i, j);
    }
  }

  void dump(std::ostream& os, std::string_view title) const {
    os << "-- " << title << " (basis:";
    for (auto b : basis_) os << ' ' << b;
    os << ")\n";
    for (std::size_t i = 0; i <= m_; ++i) {
      for (std::size_t j = 0; j <= n_; ++j) os << std::setw(11) << std::setprecision(4) << at(i, j);
      os << '\n';
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

/// Minimises the priced tableau over columns [0, allowed) using Bland's rule.
PhaseResult run_phase(Tableau& t, std::size_t allowed, std::size_t& iterations,
                      const SolveOptions& opts) {
  for (;;) {
    if (++iterations > kMaxIterations) throw Error("simplex iteration limit exceeded");
    std::size_t q = allowed;
    for (std::size_t j = 0; j < allowed; ++j) {
      if (t.cost(j) < -kOptimality) {
        q = j;
        break;
      }
    }
    if (q == allowed) return PhaseResult::Optimal;

    std::size_t p = t.rows();
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, q);
      if (a <= tol::kPivot) continue;
      const double ratio = std::max(t.rhs(i), 0.0) / a;
      if (p == t.rows() || ratio < best - 1e-12 * (1.0 + std::fabs(best)) ||
          (std::fabs(ratio - best) <= 1e-12 * (1.0 + std::fabs(best)) &&
           t.basis()[i] < t.basis()[p])) {
        p = i;
        best = ratio;
      }
    }
    if (p == t.rows()) return PhaseResult::Unbounded;
    t.pivot(p, q);
    if (opts.verbosity >= 2 && opts.log) {
      t.dump(*opts.log, "pivot row " + std::to_string(p) + " col " + std::to_string(q));
    }
  }
}

void validate(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  for (double c : lp.objective) {
    if (!std::isfinite(c)) throw ModelError("LP objective coefficient is not finite");
  }
  for (const auto& r : lp.rows) {
    if (r.coefs.size() != n) throw ModelError("LP row arity differs from objective");
    if (!std::isfinite(r.rhs)) throw ModelError("LP right-hand side is not finite");
    for (double a : r.coefs) {
      if (!std::isfinite(a)) throw ModelError("LP coefficient is not finite");
    }
  }
  if (!lp.lower.empty() && lp.lower.size() != n) throw ModelError("LP lower bounds arity");
  if (!lp.upper.empty() && lp.upper.size() != n) throw ModelError("LP upper bounds arity");
  for (double l : lp.lower) {
    if (std::isnan(l) || l == kInf) throw ModelError("LP lower bound invalid");
  }
  for (double u : lp.upper) {
    if (std::isnan(u) || u == -kInf) throw ModelError("LP upper bound invalid");
  }
}

}  // namespace

Outcome solve(const LinearProgram& lp, const SolveOptions& opts) {
  validate(lp);
  const std::size_t n = lp.num_vars();
  auto lower = [&](std::size_t j) { return lp.lower.empty() ? 0.0 : lp.lower[j]; };
  auto upper = [&](std::size_t j) { return lp.upper.empty() ? kInf : lp.upper[j]; };

  Outcome out;
  for (std::size_t j = 0; j < n; ++j) {
    if (lower(j) > upper(j)) return out;  // empty bound box
  }

  // Map original variables to non-negative columns.
  std::vector<VarMap> map(n);
  std::size_t ny = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lower(j))) {
      map[j] = {VarMap::Kind::Shift, lower(j), ny++, 0};
    } else if (std::isfinite(upper(j))) {
      map[j] = {VarMap::Kind::Mirror, upper(j), ny++, 0};
    } else {
      map[j] = {VarMap::Kind::Split, 0.0, ny, ny + 1};
      ny += 2;
    }
  }

  struct StdRow {
    std::vector<double> a;
    RowRelation rel;
    double b;
  };
  std::vector<StdRow> rows;
  for (const auto& r : lp.rows) {
    StdRow s{std::vector<double>(ny, 0.0), r.rel, r.rhs};
    for (std::size_t j = 0; j < n; ++j) {
      const double a = r.coefs[j];
      if (a == 0.0) continue;
      const auto& vm = map[j];
      s.b -= a * vm.offset;
      switch (vm.kind) {
        case VarMap::Kind::Shift: s.a[vm.col] += a; break;
        case VarMap::Kind::Mirror: s.a[vm.col] -= a; break;
        case VarMap::Kind::Split:
          s.a[vm.col] += a;
          s.a[vm.col2] -= a;
          break;
      }
    }
    rows.push_back(std::move(s));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (map[j].kind == VarMap::Kind::Shift && std::isfinite(upper(j))) {
      StdRow s{std::vector<double>(ny, 0.0), RowRelation::LessEq, upper(j) - lower(j)};
      s.a[map[j].col] = 1.0;
      rows.push_back(std::move(s));
    }
  }
  double max_b = 0.0;
  for (auto& s : rows) {
    if (s.b < 0.0) {
      for (double& a : s.a) a = -a;
      s.b = -s.b;
      if (s.rel == RowRelation::LessEq) {
        s.rel = RowRelation::GreaterEq;
      } else if (s.rel == RowRelation::GreaterEq) {
        s.rel = RowRelation::LessEq;
      }
    }
    max_b = std::max(max_b, s.b);
  }

  // Column layout: [y | slack/surplus | artificial].
  const std::size_t m = rows.size();
  std::size_t n_slack = 0, n_art = 0;
  for (const auto& s : rows) {
    if (s.rel != RowRelation::Eq) ++n_slack;
    if (s.rel != RowRelation::LessEq) ++n_art;
  }
  const std::size_t first_slack = ny;
  const std::size_t first_art = ny + n_slack;
  const std::size_t ncols = first_art + n_art;
  Tableau t(m, ncols);
  std::size_t next_slack = first_slack, next_art = first_art;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = rows[i];
    for (std::size_t j = 0; j < ny; ++j) t.at(i, j) = s.a[j];
    t.rhs(i) = s.b;
    switch (s.rel) {
      case RowRelation::LessEq:
        t.at(i, next_slack) = 1.0;
        t.basis()[i] = next_slack++;
        break;
      case RowRelation::GreaterEq:
        t.at(i, next_slack++) = -1.0;
        t.at(i, next_art) = 1.0;
        t.basis()[i] = next_art++;
        break;
      case RowRelation::Eq:
        t.at(i, next_art) = 1.0;
        t.basis()[i] = next_art++;
        break;
    }
  }

  // Phase 1: minimise the sum of artificials.
  if (n_art > 0) {
    std::vector<double> c1(ncols, 0.0);
    for (std::size_t j = first_art; j < ncols; ++j) c1[j] = 1.0;
    t.price(c1);
    if (opts.verbosity >= 2 && opts.log) t.dump(*opts.log, "phase 1 start");
    run_phase(t, ncols, out.iterations, opts);
    const double infeas = -t.objective();
    if (opts.verbosity >= 1 && opts.log) {
      *opts.log << "phase 1: residual " << infeas << " after " << out.iterations << " pivots\n";
    }
    if (infeas > tol::kFeasibility * (1.0 + max_b)) {
      out.status = Status::Infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis where possible; rows where
    // that fails are redundant and stay inert in phase 2.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < first_art) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::fabs(t.at(i, j)) > tol::kPivot) {
          t.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2 on the original objective (as a minimisation).
  const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> c2(ncols, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = sign * lp.objective[j];
    const auto& vm = map[j];
    switch (vm.kind) {
      case VarMap::Kind::Shift: c2[vm.col] += c; break;
      case VarMap::Kind::Mirror: c2[vm.col] -= c; break;
      case VarMap::Kind::Split:
        c2[vm.col] += c;
        c2[vm.col2] -= c;
        break;
    }
  }
  t.price(c2);
  if (opts.verbosity >= 2 && opts.log) t.dump(*opts.log, "phase 2 start");
  if (run_phase(t, first_art, out.iterations, opts) == PhaseResult::Unbounded) {
    out.status = Status::Unbounded;
    return out;
  }

  std::vector<double> y(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) y[t.basis()[i]] = std::max(t.rhs(i), 0.0);
  out.point.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& vm = map[j];
    switch (vm.kind) {
      case VarMap::Kind::Shift: out.point[j] = vm.offset + y[vm.col]; break;
      case VarMap::Kind::Mirror: out.point[j] = vm.offset - y[vm.col]; break;
      case VarMap::Kind::Split: out.point[j] = y[vm.col] - y[vm.col2]; break;
    }
  }
  out.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.value += lp.objective[j] * out.point[j];
  out.status = Status::Optimal;
  if (opts.verbosity >= 1 && opts.log) {
    *opts.log << "phase 2: optimal " << out.value << " after " << out.iterations << " pivots\n";
  }
  return out;
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& r : lp.rows) {
    double lhs = 0.0, norm = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      lhs += r.coefs[j] * x[j];
      norm = std::max(norm, std::fabs(r.coefs[j]));
    }
    double v = 0.0;
    switch (r.rel) {
      case RowRelation::LessEq: v = lhs - r.rhs; break;
      case RowRelation::GreaterEq: v = r.rhs - lhs; break;
      case RowRelation::Eq: v = std::fabs(lhs - r.rhs); break;
    }
    worst = std::max(worst, v / norm);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double l = lp.lower.empty() ? 0.0 : lp.lower[j];
    const double u = lp.upper.empty() ? kInf : lp.upper[j];
    worst = std::max({worst, l - x[j], x[j] - u});
  }
  return worst;
}

}  // namespace certclose::lp
