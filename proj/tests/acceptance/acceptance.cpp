// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "certclose/cli.hpp"
#include "certclose/enumerate.hpp"
#include "certclose/ntap.hpp"
#include "certclose/transform.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace certclose;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

bool box_within(const Box& inner, const Box& outer, double tol) {
  if (inner.empty) return true;
  if (outer.empty) return false;
  for (std::size_t j = 0; j < inner.coords.size(); ++j) {
    if (inner[j].lo < outer[j].lo - tol || inner[j].hi > outer[j].hi + tol) return false;
  }
  return true;
}

Verdict golden_enumeration() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  auto c = full_closure(models::ex31());
  double dt = seconds_since(t0);
  std::vector<Assignment> expected{{3, 1}, {3, 5}, {4, 2}, {5, 3}};
  v.require(c.solutions == expected, "closure differs from {(3,1),(3,5),(4,2),(5,3)}");
  v.require(dt < 0.1, "took " + fmt(dt) + " s");
  if (v.pass) v.detail = "4 solutions in " + fmt(dt, 4) + " s";
  return v;
}

std::vector<std::vector<double>> rows_of(const CertainLinearSystem& s) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto r = s.a[i];
    r.push_back(s.b[i]);
    out.push_back(r);
  }
  return out;
}

Verdict golden_transform() {
  Verdict v;
  auto ils = ucsp_to_ils(models::load_ucsp("ex43.ucsp"));
  v.require(ils.rows() == 3, "source system has " + std::to_string(ils.rows()) + " rows");
  auto sys = cet_poli(rewrite_equalities(ils));
  v.require(sys.rows() == 5, "transformed system has " + std::to_string(sys.rows()) + " rows");
  auto got = rows_of(sys);
  auto expected = models::kEx43Transformed;
  v.require(!got.empty() && got[0] == expected[0], "first row differs");
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  v.require(got == expected, "rows differ from the expected five");

  // F_AC + [0.3,0.7] F_AD = [591, 613] becomes two certain rows.
  IntervalLinearSystem link;
  link.variables = {"F_AC", "F_AD"};
  link.domains = {Interval::nonnegative(), Interval::nonnegative()};
  link.add_row({{1, 1}, {0.3, 0.7}}, Relation::Eq, {591, 613}, 0);
  auto pair = rows_of(cet_poli(rewrite_equalities(link)));
  std::sort(pair.begin(), pair.end());
  std::vector<std::vector<double>> want{{-1, -0.7, -591}, {1, 0.3, 613}};
  v.require(pair == want, "link row pair differs");
  if (v.pass) v.detail = "3 rows -> 5 rows exact; link row -> 2 rows exact";
  return v;
}

Verdict golden_hull() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  auto sys = cet_poli(rewrite_equalities(models::ex43_ils()));
  std::vector<Interval> dom{Interval::nonnegative(), Interval::nonnegative()};
  auto box = interval_hull(sys, dom);
  double dt = seconds_since(t0);
  v.require(!box.empty, "hull is empty");
  if (!box.empty) {
    const double want[2][2] = {{0, 2.5}, {0, 14.0 / 3.0}};
    for (int j = 0; j < 2; ++j) {
      v.require(std::abs(box[j].lo - want[j][0]) <= 1e-6 && std::abs(box[j].hi - want[j][1]) <= 1e-6,
                "coordinate " + std::to_string(j) + " is [" + fmt(box[j].lo, 6) + ", " +
                    fmt(box[j].hi, 6) + "]");
    }
  }
  v.require(dt < 0.1, "took " + fmt(dt) + " s");
  if (v.pass) v.detail = "[0, 2.5] x [0, " + fmt(box[1].hi, 6) + "] in " + fmt(dt, 4) + " s";
  return v;
}

Verdict golden_monotone() {
  Verdict v;
  auto p = models::monotone_pair();
  auto q = cet_parameter_monotone(p);
  v.require(q.parameters().empty() && q.constraints().size() == 1, "result is not one certain constraint");
  if (v.pass) {
    const auto& c = std::get<LinearConstraint>(q.constraints()[0]);
    // a X - 2 Z <= b with a = -3, b = 5.
    bool shape = c.lhs.size() == 2 && std::get<double>(c.lhs[0].coef) == -3.0 &&
                 c.lhs[0].var == "X" && std::get<double>(c.lhs[1].coef) == -2.0 &&
                 c.lhs[1].var == "Z" && c.rel == Relation::LessEq && std::get<double>(c.rhs) == 5.0;
    v.require(shape, "constraint is not -3X - 2Z <= 5");
  }
  v.require(complete_solutions(p) == complete_solutions(q), "solution sets differ");
  if (v.pass) v.detail = "-3X <= 2Z + 5; " + std::to_string(complete_solutions(q).size()) + " solutions on both sides";
  return v;
}

Verdict fig5_closures() {
  Verdict v;
  auto p = models::load_ucsp("fig5.ucsp");
  // Solutions a..e are encoded as 0..4.
  auto best = most_robust_solution(p);
  v.require(best.solutions == std::vector<Assignment>{{1}}, "most robust is not b");
  v.require(robust_set(p).solutions.empty(), "robust set is not empty");
  auto cover = covering_sets_minimal(p);
  std::set<std::set<double>> covers;
  for (const auto& idx : cover.covers) {
    std::set<double> s;
    for (auto i : idx) s.insert(cover.solutions[i][0]);
    covers.insert(s);
  }
  v.require(covers == std::set<std::set<double>>{{0, 1}, {1, 2}}, "covers are not {a,b} and {b,c}");
  v.require(cover.minimal_guaranteed, "cover search fell back to greedy");
  if (v.pass) v.detail = "most robust b; robust set empty; covers {a,b} {b,c}";
  return v;
}

Verdict transform_vs_oracle() {
  Verdict v;
  const double step = 0.05;
  std::mt19937_64 rng(6);
  auto t0 = std::chrono::steady_clock::now();
  int contained = 0, agreed = 0, nonempty = 0;
  double worst = 0.0;
  const int instances = 50;
  for (int k = 0; k < instances; ++k) {
    auto ils = oracle::random_poli(rng, 6.0);
    auto p = oracle::to_linear_ucsp(ils);
    Box exact = projected_closure(p);
    Box grid = hull_oracle(p, step);
    if (box_within(grid, exact, 1e-7)) ++contained;
    bool agree = exact.empty == grid.empty;
    if (agree && !exact.empty) {
      ++nonempty;
      for (std::size_t j = 0; j < exact.coords.size(); ++j) {
        double d = std::max(std::abs(exact[j].lo - grid[j].lo), std::abs(exact[j].hi - grid[j].hi));
        worst = std::max(worst, d);
        if (d > step + 1e-9) agree = false;
      }
    }
    if (agree) ++agreed;
  }
  double dt = seconds_since(t0);
  v.require(contained == instances, std::to_string(instances - contained) + " oracle boxes not contained");
  v.require(agreed == instances, std::to_string(instances - agreed) + " instances differ by more than one step");
  v.require(dt < 60, "took " + fmt(dt, 1) + " s");
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(nonempty) + " non-empty hulls, worst gap " +
              fmt(worst, 4) + ", " + fmt(dt, 1) + " s";
  return v;
}

// Axioms of the certain equivalence transform on finite instances, then the
// transform-and-hull operator on the same systems over real domains.
Verdict cet_axioms() {
  Verdict v;
  std::mt19937_64 rng(7);
  const std::pair<int, int> dom{0, 4};
  int failures[7] = {};
  int nonempty = 0, strict = 0;
  const char* names[7] = {"certainty", "increasing", "monotone", "idempotent",
                          "contracting", "operator-monotone", "operator-idempotent"};
  auto tau = [](const UncertainCSP& p) { return certain_equivalent(p, CetKind::Full); };

  for (int k = 0; k < 100; ++k) {
    auto ils = oracle::random_poli(rng, 4.0);
    auto smaller = oracle::shrink(ils, rng);
    auto c = oracle::to_linear_ucsp(ils, dom);
    auto c1 = oracle::to_linear_ucsp(smaller, dom);

    Realization lo;
    for (const auto& [id, u] : c.parameters()) lo.values[id] = u.hull().lo;
    auto certain = realize(c, lo);
    if (!equivalent(tau(certain), certain)) ++failures[0];

    auto t = tau(c);
    const auto sols = complete_solutions(c);
    nonempty += sols.empty() ? 0 : 1;
    strict += complete_solutions(c1).size() < sols.size() ? 1 : 0;
    if (!subsumes(c, t)) ++failures[1];
    // The chain c1 <= c holds by construction; the images must keep it.
    if (subsumes(c1, c) && !subsumes(tau(c1), t)) ++failures[2];
    if (!(tau(t) == t) && !equivalent(tau(t), t)) ++failures[3];

    auto real = oracle::to_linear_ucsp(ils);
    Box box = projected_closure(real);
    Box dom_box;
    for (const auto& d : ils.domains) dom_box.coords.push_back(d);
    if (!box_within(box, dom_box, 1e-9)) ++failures[4];
    if (!box_within(projected_closure(oracle::to_linear_ucsp(smaller)), box, 1e-7)) ++failures[5];
    if (!box.empty) {
      auto clamped = ils;
      clamped.domains = box.coords;
      Box again = projected_closure(oracle::to_linear_ucsp(clamped));
      bool same = !again.empty;
      for (std::size_t j = 0; same && j < box.coords.size(); ++j) {
        same = std::abs(again[j].lo - box[j].lo) <= 1e-7 && std::abs(again[j].hi - box[j].hi) <= 1e-7;
      }
      if (!same) ++failures[6];
    }
  }
  for (int i = 0; i < 7; ++i) {
    v.require(failures[i] == 0, std::string(names[i]) + " fails on " + std::to_string(failures[i]) + " instances");
  }
  if (v.pass) {
    v.detail = "100 instances (" + std::to_string(nonempty) + " non-empty, " + std::to_string(strict) +
               " strict chains); 4 axioms and 3 operator properties hold";
  }
  return v;
}

Verdict sigcomm4_reliability() {
  Verdict v;
  auto net = models::load_network("sigcomm4.net");
  auto rep = ntap::flow_bounds(net);
  int enclosed = 0;
  for (const auto& f : rep.flows) enclosed += f.enclosed ? 1 : 0;
  v.require(!rep.inconsistent && rep.flows.size() == 12 && enclosed == 12,
            std::to_string(enclosed) + "/12 true flows enclosed");

  // Final column of the published table, per flow in sorted pair order.
  const std::map<ntap::Flow, Interval> published{
      {{"A", "B"}, {309, 328}}, {{"A", "C"}, {1, 608}},   {{"A", "D"}, {4, 591}},
      {{"B", "A"}, {282, 315}}, {{"B", "C"}, {0, 563}},   {{"B", "D"}, {0, 563}},
      {{"C", "A"}, {285, 325}}, {{"C", "B"}, {271, 316}}, {{"C", "D"}, {305, 340}},
      {{"D", "A"}, {274, 292}}, {{"D", "B"}, {268, 286}}, {{"D", "C"}, {266, 316}}};
  std::string soft;
  for (bool split : {false, true}) {
    auto r = ntap::flow_bounds(net, {split, false});
    int match = 0;
    for (const auto& f : r.flows) {
      auto it = published.find(f.flow);
      if (it == published.end()) continue;
      double lo = std::floor(f.bound.lo + 1e-9), hi = std::ceil(f.bound.hi - 1e-9);
      if (std::abs(lo - it->second.lo) <= 1 && std::abs(hi - it->second.hi) <= 1) ++match;
    }
    soft += std::string(soft.empty() ? "" : ", ") + (split ? "with" : "without") + " splitting " +
            std::to_string(match) + "/12";
  }
  v.detail = (v.pass ? "12/12 enclosed" : v.detail) + "; published bounds within 1 (reported only): " + soft;
  return v;
}

Verdict statistical_protocol() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  ntap::DiagnoseOptions opts;
  opts.sigma2_sweep = {0.1, 1, 10, 100};
  opts.trials = 100;
  opts.seed = 7;
  auto rows = ntap::diagnose(models::load_network("sigcomm4_true.net"), opts);
  double dt = seconds_since(t0);
  std::string table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    v.require(r.closure_pct_valid >= 98.0, "closure valid " + fmt(r.closure_pct_valid, 1) + "% at sigma2 " + fmt(r.sigma2, 1));
    v.require(r.correction_pct_valid < 90.0,
              "correction valid " + fmt(r.correction_pct_valid, 1) + "% at sigma2 " + fmt(r.sigma2, 1));
    if (i > 0) {
      v.require(r.closure_mean_width >= rows[i - 1].closure_mean_width - 1e-9,
                "width shrinks at sigma2 " + fmt(r.sigma2, 1));
    }
    table += (table.empty() ? "" : ", ") + fmt(r.sigma2, 1) + ": closure " + fmt(r.closure_pct_valid, 1) +
             "%/width " + fmt(r.closure_mean_width, 1) + "/correction " + fmt(r.correction_pct_valid, 1) + "%";
  }
  v.require(rows.size() == 4, "sweep returned " + std::to_string(rows.size()) + " rows");
  v.require(dt < 300, "took " + fmt(dt, 1) + " s");
  v.detail += (v.detail.empty() ? "" : "; ") + table + " (" + fmt(dt, 1) + " s)";
  return v;
}

Verdict inconsistency_separation() {
  Verdict v;
  const auto path = models::fixture("inconsistent.net");
  auto net = models::load_network("inconsistent.net");
  auto rep = ntap::flow_bounds(net);
  v.require(rep.inconsistent, "closure hull is not empty");
  std::ostringstream out, err;
  int code = run_cli({"ntap", "bounds", path}, out, err);
  v.require(code == kExitEmpty, "bounds exit code " + std::to_string(code));
  auto corr = ntap::data_correct(net, 10.0);
  auto base = ntap::point_bounds(corr.corrected);
  v.require(!base.inconsistent, "corrected model is unsatisfiable");
  if (v.pass) v.detail = "empty hull, exit 3; corrected model satisfiable (gross " + fmt(corr.gross, 2) + ")";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"enumeration closure golden", golden_enumeration},
      {"interval transform golden", golden_transform},
      {"hull golden", golden_hull},
      {"parameter-monotone golden", golden_monotone},
      {"abstract robustness closures", fig5_closures},
      {"transform against grid oracle", transform_vs_oracle},
      {"transform axioms", cet_axioms},
      {"sigcomm4 reliability", sigcomm4_reliability},
      {"statistical protocol", statistical_protocol},
      {"inconsistency separation", inconsistency_separation},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first
              << " (" << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
