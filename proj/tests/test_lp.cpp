#include <doctest.h>

#include <random>
#include <sstream>

#include "certclose/error.hpp"
#include "certclose/lp.hpp"
#include "support/oracles.hpp"

using namespace certclose;
using lp::LinearProgram;
using lp::RowRelation;
using lp::Sense;
using lp::Status;

namespace {

// Rows of the transformed two-variable example system.
LinearProgram example_system(Sense sense, std::vector<double> objective) {
  LinearProgram p;
  p.sense = sense;
  p.objective = std::move(objective);
  p.rows = {{{-2, 1}, RowRelation::LessEq, 4},
            {{-2, -1}, RowRelation::LessEq, 5},
            {{1, 1}, RowRelation::LessEq, 5},
            {{-6, -3}, RowRelation::LessEq, -4},
            {{6, 1.5}, RowRelation::LessEq, 15}};
  return p;
}

}  // namespace

TEST_CASE("max V1 over the transformed example system is 2.5") {
  auto out = lp::solve(example_system(Sense::Maximize, {1, 0}));
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("max V2 over the transformed example system is 14/3") {
  // Vertex of -2V1 + V2 = 4 and V1 + V2 = 5: V1 = 1/3, V2 = 14/3.
  auto vertex = oracle::solve_square({{-2, 1}, {1, 1}}, {4, 5});
  REQUIRE(vertex);
  CHECK((*vertex)[0] == doctest::Approx(1.0 / 3.0));
  auto out = lp::solve(example_system(Sense::Maximize, {0, 1}));
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == doctest::Approx((*vertex)[1]).epsilon(1e-12));
  CHECK(out.value == doctest::Approx(14.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("pinched region x <= 0, x >= 0") {
  LinearProgram p;
  p.sense = Sense::Maximize;
  p.objective = {1};
  p.rows = {{{1}, RowRelation::LessEq, 0}, {{1}, RowRelation::GreaterEq, 0}};
  auto out = lp::solve(p);
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == 0.0);
}

TEST_CASE("infeasible and unbounded outcomes") {
  LinearProgram p;
  p.sense = Sense::Maximize;
  p.objective = {1, 1};
  p.rows = {{{1, -1}, RowRelation::LessEq, 1}};
  CHECK(lp::solve(p).status == Status::Unbounded);

  p.rows = {{{1, 1}, RowRelation::LessEq, -1}};
  CHECK(lp::solve(p).status == Status::Infeasible);

  p.rows = {{{1, 1}, RowRelation::Eq, 3}, {{1, 0}, RowRelation::GreaterEq, 4}};
  CHECK(lp::solve(p).status == Status::Infeasible);
}

TEST_CASE("equality rows, free variables and finite bounds") {
  LinearProgram p;
  p.sense = Sense::Minimize;
  p.objective = {1, 0};
  p.rows = {{{1, 1}, RowRelation::Eq, 1}};
  p.lower = {-kInf, 0};
  p.upper = {kInf, 4};
  auto out = lp::solve(p);
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == doctest::Approx(-3));
  CHECK(out.point[1] == doctest::Approx(4));

  p.upper = {kInf, kInf};
  CHECK(lp::solve(p).status == Status::Unbounded);

  p.lower = {0.25, 0};
  p.upper = {0.25, kInf};
  out = lp::solve(p);
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.point[0] == doctest::Approx(0.25));
  CHECK(out.point[1] == doctest::Approx(0.75));

  p.lower = {2, 0};
  p.upper = {2, kInf};
  CHECK(lp::solve(p).status == Status::Infeasible);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram p;
  p.objective = {1, 2};
  p.rows = {{{1}, RowRelation::LessEq, 1}};
  CHECK_THROWS_AS(lp::solve(p), ModelError);
  p.rows = {{{1, std::nan("")}, RowRelation::LessEq, 1}};
  CHECK_THROWS_AS(lp::solve(p), ModelError);
  p.rows = {{{1, 1}, RowRelation::LessEq, kInf}};
  CHECK_THROWS_AS(lp::solve(p), ModelError);
}

TEST_CASE("degenerate program terminates under Bland's rule") {
  // Beale's example cycles under the textbook largest-coefficient rule.
  LinearProgram p;
  p.sense = Sense::Minimize;
  p.objective = {-0.75, 150, -0.02, 6};
  p.rows = {{{0.25, -60, -0.04, 9}, RowRelation::LessEq, 0},
            {{0.5, -90, -0.02, 3}, RowRelation::LessEq, 0},
            {{0, 0, 1, 0}, RowRelation::LessEq, 1}};
  auto out = lp::solve(p);
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == doctest::Approx(-0.05));

  // Many redundant constraints through one vertex.
  LinearProgram q;
  q.sense = Sense::Maximize;
  q.objective = {1, 1};
  for (int k = 1; k <= 6; ++k) q.rows.push_back({{double(k), double(k)}, RowRelation::LessEq, 2.0 * k});
  q.rows.push_back({{1, 0}, RowRelation::LessEq, 1});
  out = lp::solve(q);
  REQUIRE(out.status == Status::Optimal);
  CHECK(out.value == doctest::Approx(2));
}

TEST_CASE("verbose solve writes tableaux to the log") {
  std::ostringstream log;
  lp::SolveOptions opts{2, &log};
  lp::solve(example_system(Sense::Maximize, {1, 0}), opts);
  CHECK(log.str().find("phase") != std::string::npos);
}

TEST_CASE("random programs agree with vertex enumeration") {
  std::mt19937_64 rng(20240607);
  std::uniform_int_distribution<int> nd(1, 3), md(1, 6), cd(-5, 5), rd(0, 2), bd(0, 8);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    LinearProgram p;
    const int n = nd(rng), m = md(rng);
    p.sense = rd(rng) == 0 ? Sense::Minimize : Sense::Maximize;
    for (int j = 0; j < n; ++j) {
      p.objective.push_back(cd(rng));
      double lo = cd(rng);
      p.lower.push_back(lo);
      p.upper.push_back(lo + bd(rng));
    }
    for (int i = 0; i < m; ++i) {
      lp::Row row;
      for (int j = 0; j < n; ++j) row.coefs.push_back(cd(rng));
      row.rel = static_cast<RowRelation>(rd(rng));
      row.rhs = cd(rng) * 2;
      p.rows.push_back(row);
    }
    auto oracle = oracle::vertex_optimum(p);
    auto out = lp::solve(p);
    CAPTURE(trial);
    if (oracle.feasible) {
      ++optimal;
      REQUIRE(out.status == Status::Optimal);
      CHECK(out.value == doctest::Approx(oracle.value).epsilon(1e-7).scale(1.0));
      CHECK(lp::max_violation(p, out.point) <= lp::tol::kFeasibility);
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += p.objective[j] * out.point[j];
      CHECK(dot == doctest::Approx(out.value).epsilon(1e-9));

      // Duality sanity: negate the objective and flip the direction.
      auto flipped = p;
      flipped.sense = p.sense == Sense::Minimize ? Sense::Maximize : Sense::Minimize;
      for (auto& c : flipped.objective) c = -c;
      auto back = lp::solve(flipped);
      REQUIRE(back.status == Status::Optimal);
      CHECK(back.value == doctest::Approx(-out.value).epsilon(1e-7).scale(1.0));
    } else {
      ++infeasible;
      CHECK(out.status == Status::Infeasible);
    }
  }
  CHECK(optimal > 50);
  CHECK(infeasible > 20);
}

TEST_CASE("identical inputs give identical outcomes") {
  auto p = example_system(Sense::Maximize, {1, 2});
  auto a = lp::solve(p), b = lp::solve(p);
  CHECK(a.point == b.point);
  CHECK(a.iterations == b.iterations);
}
