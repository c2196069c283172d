#include <doctest.h>

#include <random>

#include "certclose/error.hpp"
#include "certclose/expression.hpp"
#include "certclose/ucsp.hpp"
#include "support/models.hpp"

using namespace certclose;

namespace {

std::set<Assignment> solutions(const UncertainCSP& p) { return complete_solutions(p); }

UncertainCSP over_x(std::vector<double> set) {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(1, 5));
  p.add_parameter("l", UncertaintySet::finite(std::move(set)));
  p.add_constraint(LinearConstraint{{{1.0, "X"}}, Relation::Greater, ParamRef{"l"}});
  return p;
}

UncertainCSP certain_x_greater(double v) {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(1, 5));
  p.add_constraint(LinearConstraint{{{1.0, "X"}}, Relation::Greater, v});
  return p;
}

}  // namespace

TEST_CASE("expression parsing and evaluation") {
  auto e = Expression::parse("abs(X - Y) == l2 && !(X < 0) || min(X, 2) % 2 == 1");
  CHECK(e.identifiers() == std::vector<std::string>{"X", "Y", "l2"});
  CHECK(e.evaluate({3, 1, 2}) == 1.0);
  CHECK(e.evaluate({3, 2, 2}) == 0.0);
  CHECK(Expression::parse("2 * -3 + max(1, 4) / 2").evaluate({}) == doctest::Approx(-4));
  CHECK_THROWS_AS(Expression::parse("X +"), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(X)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(X"), ParseError);
}

TEST_CASE("value sets") {
  auto d = Domain::integers({3, 1, 2, 3});
  CHECK(d.values() == std::vector<double>{1, 2, 3});
  CHECK(d.positive_orthant());
  CHECK(Domain::interval(0, kInf).positive_orthant());
  CHECK_FALSE(Domain::interval(-1, 2).positive_orthant());
  CHECK_FALSE(UncertaintySet::interval(1, 2).cardinality().has_value());
  CHECK(UncertaintySet::interval(2, 2).is_singleton());
  CHECK(*UncertaintySet::finite({2, 3, 4}).cardinality() == 3);
  CHECK_THROWS_AS(UncertaintySet::finite({}), ModelError);
  CHECK_THROWS_AS(Domain::interval(2, 1), ModelError);
  CHECK_THROWS_AS(Domain::integers({1.5}), ModelError);
}

TEST_CASE("declarations are validated") {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(0, 3));
  CHECK_THROWS_AS(p.add_parameter("X", UncertaintySet::point(1)), ModelError);
  CHECK_THROWS_AS(p.add_variable("X", Domain::int_range(0, 3)), ModelError);
  CHECK_THROWS_AS(p.add_constraint(LinearConstraint{{{1.0, "Y"}}, Relation::LessEq, 1.0}),
                  ModelError);
  CHECK_THROWS_AS(p.add_constraint(LinearConstraint{{{ParamRef{"q"}, "X"}}, Relation::LessEq, 1.0}),
                  ModelError);
  CHECK_THROWS_AS(p.add_constraint(RelationalConstraint::from_expression("X < Z")), ModelError);
}

TEST_CASE("realize substitutes every parameter") {
  auto p = models::ex31();
  auto csp = realize(p, Realization{{{"l1", 2}, {"l2", 2}}});
  CHECK(csp.parameters().empty());
  CHECK(csp.variables() == p.variables());
  const auto& lin = std::get<LinearConstraint>(csp.constraints()[0]);
  CHECK(std::get<double>(lin.rhs) == 2.0);

  UncertainCSP expected;
  expected.add_variable("X", Domain::int_range(1, 5));
  expected.add_variable("Y", Domain::int_range(1, 5));
  expected.add_constraint(LinearConstraint{{{1.0, "X"}}, Relation::Greater, 2.0});
  expected.add_constraint(RelationalConstraint::from_expression("abs(X - Y) == 2"));
  expected.add_constraint(RelationalConstraint::from_expression("Y - 2 != 1"));
  CHECK(solutions(csp) == solutions(expected));
  CHECK(solutions(csp) == std::set<Assignment>{{3, 1}, {3, 5}, {4, 2}});

  CHECK_THROWS_AS(realize(p, Realization{{{"l1", 5}, {"l2", 2}}}), ModelError);
  CHECK_THROWS_AS(realize(p, Realization{{{"l1", 2}}}), ModelError);
  CHECK_THROWS_AS(realize(p, Realization{{{"l1", 2}, {"l2", 2}, {"zz", 1}}}), ModelError);
}

TEST_CASE("realize without parameters is the identity") {
  auto p = certain_x_greater(2);
  CHECK(realize(p, Realization{}) == p);
}

TEST_CASE("realize at lower bounds reproduces the lower data of a network model") {
  auto net = models::load_network("sigcomm4.net");
  auto p = ntap::build_ucsp(net);
  Realization r;
  for (const auto& [id, u] : p.parameters()) r.values[id] = u.hull().lo;
  auto csp = realize(p, r);
  CHECK(csp.parameters().empty());
  for (std::size_t i = 0; i < p.constraints().size(); ++i) {
    const auto& src = std::get<LinearConstraint>(p.constraints()[i]);
    const auto& dst = std::get<LinearConstraint>(csp.constraints()[i]);
    double expect = std::holds_alternative<double>(src.rhs)
                        ? std::get<double>(src.rhs)
                        : p.parameters().at(std::get<ParamRef>(src.rhs).id).hull().lo;
    CHECK(std::get<double>(dst.rhs) == expect);
  }
  // Link rows come first, in link order.
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    const auto& dst = std::get<LinearConstraint>(csp.constraints()[k]);
    CHECK(std::get<double>(dst.rhs) == net.links[k].volume->lo);
  }
}

TEST_CASE("satisfies examples") {
  auto p = models::x_greater_set();
  const auto& c = p.constraints()[0];
  CHECK(satisfies(p, c, {{"X", 3}}));
  CHECK_FALSE(satisfies(p, c, {{"X", 2}}));
  CHECK_THROWS_AS(satisfies(p, c, {}), ModelError);

  UncertainCSP q;
  q.add_variable("X", Domain::interval(0, kInf));
  q.add_variable("Y", Domain::interval(0, kInf));
  q.add_parameter("a", UncertaintySet::interval(4, 5));
  q.add_parameter("b", UncertaintySet::interval(-1, 1));
  q.add_parameter("m", UncertaintySet::interval(2, 3));
  q.add_constraint(LinearConstraint{{{ParamRef{"a"}, "X"}, {ParamRef{"b"}, "Y"}},
                                    Relation::LessEq, ParamRef{"m"}});
  CHECK(satisfies(q, q.constraints()[0], {{"X", 1}, {"Y", 2}}));
  CHECK_FALSE(satisfies(q, q.constraints()[0], {{"X", 1.5}, {"Y", 1}}));
}

TEST_CASE("subsumes examples") {
  CHECK(equivalent(over_x({2, 3, 4}), certain_x_greater(2)));
  auto top = universal(over_x({2, 3, 4}));
  CHECK(subsumes(over_x({2, 3, 4}), top));
  CHECK(subsumes(models::ex31(), universal(models::ex31())));
  CHECK(subsumes(over_x({3, 4}), over_x({2, 3, 4})));
  CHECK_FALSE(subsumes(over_x({2, 3, 4}), over_x({3, 4})));

  UncertainCSP real;
  real.add_variable("X", Domain::interval(0, 5));
  CHECK_THROWS_AS(subsumes(real, real), ModelError);
}

TEST_CASE("shared parameters take one value per realisation") {
  // l1 links the first and third constraints.
  CHECK(solutions(models::ex31()) == std::set<Assignment>{{3, 1}, {3, 5}, {4, 2}, {5, 3}});
}

TEST_CASE("satisfaction agrees with realisation enumeration on finite instances") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-3, 3), size(1, 3), rel(0, 4), val(-4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    UncertainCSP p;
    p.add_variable("X", Domain::int_range(-2, 3));
    p.add_variable("Y", Domain::int_range(0, 3));
    auto random_set = [&] {
      std::vector<double> s;
      for (int k = size(rng); k > 0; --k) s.push_back(val(rng));
      return UncertaintySet::finite(s);
    };
    p.add_parameter("a", random_set());
    p.add_parameter("b", random_set());
    LinearConstraint c{{{ParamRef{"a"}, "X"}, {double(coef(rng)), "Y"}},
                       static_cast<Relation>(rel(rng)), ParamRef{"b"}};
    p.add_constraint(c);
    p.add_constraint(RelationalConstraint::from_expression("X * a + b != Y"));
    for (const auto& uc : p.constraints()) {
      for (double x = -2; x <= 3; ++x) {
        for (double y = 0; y <= 3; ++y) {
          std::map<std::string, double> v{{"X", x}, {"Y", y}};
          bool some = false;
          for (double a : p.parameters().at("a").values()) {
            for (double b : p.parameters().at("b").values()) {
              auto all = v;
              all["a"] = a;
              all["b"] = b;
              some = some || holds(p, uc, all);
            }
          }
          CHECK(satisfies(p, uc, v) == some);
        }
      }
    }
  }
}

TEST_CASE("subsumption is a lattice order") {
  std::vector<UncertainCSP> family{over_x({2}),          over_x({3, 4}),   over_x({2, 3, 4}),
                                   over_x({1}),          over_x({4}),      certain_x_greater(3),
                                   universal(over_x({2}))};
  for (const auto& a : family) {
    CHECK(subsumes(a, a));
    for (const auto& b : family) {
      for (const auto& c : family) {
        if (subsumes(a, b) && subsumes(b, c)) CHECK(subsumes(a, c));
      }
      // b re-encoded as a table, so its parameter ids cannot clash with a's.
      UncertainCSP b2;
      b2.add_variable("X", Domain::int_range(1, 5));
      b2.add_constraint(RelationalConstraint::from_table(
          {"X"}, [&] {
            std::set<std::vector<double>> t;
            for (const auto& s : complete_solutions(b)) t.insert(s);
            return t;
          }()));
      auto meet = conjoin(a, b2);
      auto join = disjoin(a, b2);
      CHECK(subsumes(meet, a));
      CHECK(subsumes(meet, b2));
      CHECK(subsumes(a, join));
      CHECK(subsumes(b2, join));
    }
  }
}

TEST_CASE("certain constraints are fixed points") {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(0, 4));
  p.add_variable("Y", Domain::int_range(0, 4));
  p.add_parameter("a", UncertaintySet::point(2));
  p.add_parameter("b", UncertaintySet::interval(3, 3));
  p.add_constraint(
      LinearConstraint{{{ParamRef{"a"}, "X"}, {1.0, "Y"}}, Relation::LessEq, ParamRef{"b"}});
  CHECK(p.is_certain());
  auto r = realize(p, Realization{{{"a", 2}, {"b", 3}}});
  CHECK(equivalent(p, r));
  CHECK_FALSE(models::ex31().is_certain());
}
