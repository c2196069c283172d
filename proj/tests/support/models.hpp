// Small models shared by the unit tests and the acceptance runner.
#pragma once

#include <string>
#include <vector>

#include "certclose/io.hpp"
#include "certclose/transform.hpp"
#include "certclose/ucsp.hpp"

#ifndef CERTCLOSE_FIXTURES
#define CERTCLOSE_FIXTURES "fixtures"
#endif

namespace models {

using namespace certclose;

inline std::string fixture(const std::string& name) {
  return std::string(CERTCLOSE_FIXTURES) + "/" + name;
}

inline UncertainCSP load_ucsp(const std::string& name) {
  return io::parse_ucsp(io::read_file(fixture(name)));
}

inline ntap::NetworkInstance load_network(const std::string& name) {
  return io::parse_network(io::read_file(fixture(name)));
}

/// X > {2,3,4}, |X - Y| == {2}, Y - l1 != 1 over X, Y in 1..5, with l1 shared.
inline UncertainCSP ex31() {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(1, 5));
  p.add_variable("Y", Domain::int_range(1, 5));
  p.add_parameter("l1", UncertaintySet::finite({2, 3, 4}));
  p.add_parameter("l2", UncertaintySet::finite({2}));
  p.add_constraint(LinearConstraint{{{1.0, "X"}}, Relation::Greater, ParamRef{"l1"}});
  p.add_constraint(RelationalConstraint::from_expression("abs(X - Y) == l2"));
  p.add_constraint(RelationalConstraint::from_expression("Y - l1 != 1"));
  return p;
}

/// The three-row interval system [-2,2]V1 + [1,2]V2 <= [3,4],
/// [-2,-1]V1 - V2 = [-5,5], 6V1 + [1.5,3]V2 = [4,15] over V1, V2 >= 0.
inline IntervalLinearSystem ex43_ils() {
  IntervalLinearSystem ils;
  ils.variables = {"V1", "V2"};
  ils.domains = {Interval::nonnegative(), Interval::nonnegative()};
  ils.add_row({{-2, 2}, {1, 2}}, Relation::LessEq, {3, 4}, 0);
  ils.add_row({{-2, -1}, {-1, -1}}, Relation::Eq, {-5, 5}, 1);
  ils.add_row({{6, 6}, {1.5, 3}}, Relation::Eq, {4, 15}, 2);
  return ils;
}

/// Expected transformed rows (A' | b') of the system above.
inline const std::vector<std::vector<double>> kEx43Transformed = {
    {-2, 1, 4}, {-2, -1, 5}, {1, 1, 5}, {-6, -3, -4}, {6, 1.5, 15}};

/// One-variable constraint X > {2,3,4} over X in 1..5.
inline UncertainCSP x_greater_set() {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(1, 5));
  p.add_parameter("l", UncertaintySet::finite({2, 3, 4}));
  p.add_constraint(LinearConstraint{{{1.0, "X"}}, Relation::Greater, ParamRef{"l"}});
  return p;
}

/// {-3,0,3}X <= 2Z + {2,3,5} over X, Z in 0..10.
inline UncertainCSP monotone_pair() {
  UncertainCSP p;
  p.add_variable("X", Domain::int_range(0, 10));
  p.add_variable("Z", Domain::int_range(0, 10));
  p.add_parameter("a", UncertaintySet::finite({-3, 0, 3}));
  p.add_parameter("b", UncertaintySet::finite({2, 3, 5}));
  // a X - 2 Z <= b
  p.add_constraint(
      LinearConstraint{{{ParamRef{"a"}, "X"}, {-2.0, "Z"}}, Relation::LessEq, ParamRef{"b"}});
  return p;
}

}  // namespace models
