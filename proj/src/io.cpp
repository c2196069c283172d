#include "certclose/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "certclose/error.hpp"

namespace certclose::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string number(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

double as_number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(where, "expected a number, \"inf\" or \"-inf\"");
}

ordered_json num_json(double v) {
  if (!std::isfinite(v)) return number(v);
  if (v == std::floor(v) && std::abs(v) < 1e15) return static_cast<long long>(v);
  return v;
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(as_number(e, where));
  return out;
}

Interval interval_of(const json& j, const std::string& where) {
  auto v = number_list(j, where);
  if (v.size() != 2) fail(where, "interval needs exactly two ends");
  if (!(v[0] <= v[1])) fail(where, "interval requires lo <= hi");
  return {v[0], v[1]};
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) fail(where, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

Domain parse_domain(const json& j, const std::string& where) {
  if (j.contains("int_set")) return Domain::integers(number_list(j["int_set"], where));
  if (j.contains("int_range")) {
    auto v = number_list(j["int_range"], where);
    if (v.size() != 2) fail(where, "int_range needs two ends");
    return Domain::int_range(static_cast<long long>(v[0]), static_cast<long long>(v[1]));
  }
  if (j.contains("interval")) {
    auto iv = interval_of(j["interval"], where);
    return Domain::interval(iv.lo, iv.hi);
  }
  fail(where, "unknown domain form");
}

UncertaintySet parse_set(const json& j, const std::string& where) {
  if (j.is_number()) return UncertaintySet::point(j.get<double>());
  if (j.contains("set")) return UncertaintySet::finite(number_list(j["set"], where));
  if (j.contains("int_set")) return UncertaintySet::finite(number_list(j["int_set"], where));
  if (j.contains("interval")) {
    auto iv = interval_of(j["interval"], where);
    return UncertaintySet::interval(iv.lo, iv.hi);
  }
  fail(where, "unknown uncertainty set form");
}

struct UcspReader {
  UncertainCSP p;
  int anonymous = 0;

  std::string fresh_name() {
    for (;;) {
      std::string id = "_u" + std::to_string(++anonymous);
      if (!p.is_parameter(id) && !p.is_variable(id)) return id;
    }
  }

  Coefficient coefficient(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_object() && j.contains("param")) {
      if (!j["param"].is_string()) fail(where, "\"param\" must be a string");
      return ParamRef{j["param"].get<std::string>()};
    }
    if (j.is_object() && j.contains("interval")) {
      auto iv = interval_of(j["interval"], where);
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) fail(where, "coefficient must be bounded");
      std::string id = fresh_name();
      p.add_parameter(id, UncertaintySet::interval(iv.lo, iv.hi));
      return ParamRef{id};
    }
    fail(where, "unknown coefficient form");
  }

  UncertainConstraint constraint(const json& j, const std::string& where) {
    if (j.contains("linear")) {
      LinearConstraint c;
      const auto& terms = j["linear"];
      if (!terms.is_array()) fail(where, "\"linear\" must be an array of [coef, var] pairs");
      for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2 || !t[1].is_string()) {
          fail(where, "term must be [coef, \"var\"]");
        }
        c.lhs.push_back({coefficient(t[0], where), t[1].get<std::string>()});
      }
      c.rel = parse_relation(string_field(j, "rel", where));
      c.rhs = coefficient(field(j, "rhs", where), where);
      return c;
    }
    if (j.contains("expr")) {
      if (!j["expr"].is_string()) fail(where, "\"expr\" must be a string");
      return RelationalConstraint::from_expression(j["expr"].get<std::string>());
    }
    if (j.contains("table")) {
      const auto& t = j["table"];
      std::vector<std::string> scope;
      for (const auto& s : field(t, "scope", where)) {
        if (!s.is_string()) fail(where, "scope entries must be strings");
        scope.push_back(s.get<std::string>());
      }
      std::set<std::vector<double>> tuples;
      for (const auto& row : field(t, "tuples", where)) tuples.insert(number_list(row, where));
      return RelationalConstraint::from_table(std::move(scope), std::move(tuples));
    }
    fail(where, "unknown constraint form");
  }
};

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

ordered_json interval_json(const Interval& iv) {
  return {{"interval", {num_json(iv.lo), num_json(iv.hi)}}};
}

ordered_json numbers_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num_json(x));
  return a;
}

ordered_json coefficient_json(const Coefficient& c) {
  if (const auto* k = std::get_if<double>(&c)) return num_json(*k);
  return {{"param", std::get<ParamRef>(c).id}};
}

}  // namespace

UncertainCSP parse_ucsp(std::string_view text) {
  json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("UCSP document must be an object");
  UcspReader r;
  try {
    for (const auto& v : doc.value("variables", json::array())) {
      auto id = string_field(v, "id", "variable");
      r.p.add_variable(id, parse_domain(field(v, "domain", id), "variable " + id));
    }
    for (const auto& v : doc.value("parameters", json::array())) {
      auto id = string_field(v, "id", "parameter");
      r.p.add_parameter(id, parse_set(field(v, "set", id), "parameter " + id));
    }
    std::size_t k = 0;
    for (const auto& c : doc.value("constraints", json::array())) {
      r.p.add_constraint(r.constraint(c, "constraint " + std::to_string(k++)));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed UCSP: ") + e.what());
  }
  return r.p;
}

std::string print_ucsp(const UncertainCSP& p) {
  ordered_json doc;
  doc["variables"] = ordered_json::array();
  for (const auto& [id, d] : p.variables()) {
    ordered_json dom;
    if (d.is_finite()) {
      dom["int_set"] = numbers_json(d.values());
    } else {
      dom = interval_json(d.hull());
    }
    doc["variables"].push_back({{"id", id}, {"domain", dom}});
  }
  doc["parameters"] = ordered_json::array();
  for (const auto& [id, u] : p.parameters()) {
    ordered_json s;
    if (u.is_finite()) {
      s["set"] = numbers_json(u.values());
    } else {
      s = interval_json(u.hull());
    }
    doc["parameters"].push_back({{"id", id}, {"set", s}});
  }
  doc["constraints"] = ordered_json::array();
  for (const auto& c : p.constraints()) {
    ordered_json cj;
    if (const auto* lin = std::get_if<LinearConstraint>(&c)) {
      cj["linear"] = ordered_json::array();
      for (const auto& t : lin->lhs) cj["linear"].push_back({coefficient_json(t.coef), t.var});
      cj["rel"] = std::string(to_string(lin->rel));
      cj["rhs"] = coefficient_json(lin->rhs);
    } else {
      const auto& rel = std::get<RelationalConstraint>(c);
      if (!rel.bindings().empty()) throw ModelError("cannot print a partially bound constraint");
      if (rel.expression()) {
        cj["expr"] = rel.expression()->source();
      } else if (rel.table()) {
        ordered_json tuples = ordered_json::array();
        for (const auto& t : *rel.table()) tuples.push_back(numbers_json(t));
        cj["table"] = {{"scope", rel.original_scope()}, {"tuples", tuples}};
      } else {
        throw ModelError("cannot print callback constraint '" + rel.label() + "'");
      }
    }
    doc["constraints"].push_back(cj);
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Networks

namespace {

ntap::Flow flow_of(const json& j, const std::string& where) {
  if (j.contains("flow")) {
    const auto& f = j["flow"];
    if (!f.is_array() || f.size() != 2 || !f[0].is_string() || !f[1].is_string()) {
      fail(where, "\"flow\" must be [\"from\", \"to\"]");
    }
    return {f[0].get<std::string>(), f[1].get<std::string>()};
  }
  return {string_field(j, "from", where), string_field(j, "to", where)};
}

std::optional<Interval> volume_of(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const auto& v = j[key];
  if (v.is_number()) return Interval::point(v.get<double>());
  if (v.is_object() && v.contains("interval")) return interval_of(v["interval"], where);
  fail(where, std::string("bad \"") + key + "\"");
}

std::optional<double> optional_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return as_number(j[key], where);
}

Interval fraction_of(const json& v, const std::string& where) {
  if (v.is_number()) return Interval::point(v.get<double>());
  if (v.is_object() && v.contains("interval")) return interval_of(v["interval"], where);
  if (v.is_object() && v.contains("paths")) {
    if (!v["paths"].is_number_integer()) fail(where, "\"paths\" must be an integer");
    try {
      return ntap::splitting_interval(v["paths"].get<int>());
    } catch (const ModelError& e) {
      fail(where, e.what());
    }
  }
  fail(where, "bad fraction");
}

ordered_json optional_volume_json(const std::optional<Interval>& v) {
  if (!v) return nullptr;
  if (v->degenerate()) return num_json(v->lo);
  return interval_json(*v);
}

ordered_json flow_json(const ntap::Flow& f) { return ordered_json::array({f.first, f.second}); }

}  // namespace

ntap::NetworkInstance parse_network(std::string_view text) {
  json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("network document must be an object");
  ntap::NetworkInstance net;
  try {
    net.name = doc.value("name", "");
    for (const auto& n : field(doc, "nodes", "network")) {
      net.nodes.push_back({string_field(n, "id", "node"), n.value("endpoint", true)});
    }
    for (const auto& l : field(doc, "links", "network")) {
      ntap::Link link;
      link.from = string_field(l, "from", "link");
      link.to = string_field(l, "to", "link");
      link.id = l.contains("id") ? string_field(l, "id", "link") : link.from + "->" + link.to;
      link.volume = volume_of(l, "volume", "link " + link.id);
      link.capacity = optional_number(l, "capacity", "link " + link.id);
      link.truth = optional_number(l, "true", "link " + link.id);
      link.measured = optional_number(l, "measured", "link " + link.id);
      net.links.push_back(std::move(link));
    }
    for (const auto& r : doc.value("routing", json::array())) {
      ntap::RoutingEntry e;
      e.flow = flow_of(r, "routing");
      e.link = string_field(r, "link", "routing");
      std::string where = "routing " + e.flow.first + "->" + e.flow.second + " on " + e.link;
      if (r.contains("fraction")) e.fraction = fraction_of(r["fraction"], where);
      if (r.contains("split_fraction")) e.split_fraction = fraction_of(r["split_fraction"], where);
      net.routing.push_back(std::move(e));
    }
    for (const auto& x : doc.value("external", json::array())) {
      ntap::External e;
      e.node = string_field(x, "node", "external");
      std::string where = "external " + e.node;
      e.t_in = volume_of(x, "t_in", where);
      e.t_out = volume_of(x, "t_out", where);
      e.true_in = optional_number(x, "true_in", where);
      e.true_out = optional_number(x, "true_out", where);
      e.measured_in = optional_number(x, "measured_in", where);
      e.measured_out = optional_number(x, "measured_out", where);
      net.external.push_back(std::move(e));
    }
    for (const auto& t : doc.value("true_flows", json::array())) {
      net.true_flows[flow_of(t, "true_flows")] = as_number(field(t, "value", "true_flows"), "true_flows");
    }
    for (const auto& c : doc.value("lsp", json::array())) {
      auto v = volume_of(c, "value", "lsp");
      if (!v) fail("lsp", "missing value");
      net.lsp.push_back({flow_of(c, "lsp"), *v});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed network: ") + e.what());
  }
  try {
    net.validate();
  } catch (const ModelError& e) {
    throw ParseError(e.what());
  }
  return net;
}

std::string print_network(const ntap::NetworkInstance& net) {
  ordered_json doc;
  if (!net.name.empty()) doc["name"] = net.name;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : net.nodes) doc["nodes"].push_back({{"id", n.id}, {"endpoint", n.endpoint}});
  doc["links"] = ordered_json::array();
  for (const auto& l : net.links) {
    ordered_json j{{"id", l.id}, {"from", l.from}, {"to", l.to}, {"volume", optional_volume_json(l.volume)}};
    if (l.capacity) j["capacity"] = num_json(*l.capacity);
    if (l.truth) j["true"] = num_json(*l.truth);
    if (l.measured) j["measured"] = num_json(*l.measured);
    doc["links"].push_back(j);
  }
  doc["routing"] = ordered_json::array();
  for (const auto& r : net.routing) {
    ordered_json j{{"flow", flow_json(r.flow)}, {"link", r.link}};
    j["fraction"] = optional_volume_json(r.fraction);
    if (r.split_fraction) j["split_fraction"] = optional_volume_json(r.split_fraction);
    doc["routing"].push_back(j);
  }
  doc["external"] = ordered_json::array();
  for (const auto& e : net.external) {
    ordered_json j{{"node", e.node}};
    j["t_in"] = optional_volume_json(e.t_in);
    j["t_out"] = optional_volume_json(e.t_out);
    if (e.true_in) j["true_in"] = num_json(*e.true_in);
    if (e.true_out) j["true_out"] = num_json(*e.true_out);
    if (e.measured_in) j["measured_in"] = num_json(*e.measured_in);
    if (e.measured_out) j["measured_out"] = num_json(*e.measured_out);
    doc["external"].push_back(j);
  }
  if (!net.true_flows.empty()) {
    doc["true_flows"] = ordered_json::array();
    for (const auto& [f, v] : net.true_flows) {
      doc["true_flows"].push_back({{"flow", flow_json(f)}, {"value", num_json(v)}});
    }
  }
  if (!net.lsp.empty()) {
    doc["lsp"] = ordered_json::array();
    for (const auto& c : net.lsp) {
      doc["lsp"].push_back({{"flow", flow_json(c.flow)}, {"value", optional_volume_json(c.value)}});
    }
  }
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

Format parse_format(std::string_view s) {
  if (s == "tsv") return Format::Tsv;
  if (s == "structured" || s == "json") return Format::Json;
  throw ParseError("unknown format '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::string format_closure(const Closure& c, Format f) {
  if (f == Format::Json) {
    ordered_json doc;
    doc["kind"] = std::string(to_string(c.kind));
    doc["empty"] = c.empty();
    doc["variables"] = c.variables;
    if (c.kind == ClosureKind::ProjectedBox) {
      doc["box"] = ordered_json::array();
      if (!c.box.empty) {
        for (std::size_t j = 0; j < c.variables.size(); ++j) {
          doc["box"].push_back({{"variable", c.variables[j]},
                                {"lo", num_json(c.box[j].lo)},
                                {"hi", num_json(c.box[j].hi)}});
        }
      }
    }
    if (c.kind != ClosureKind::ProjectedBox || !c.solutions.empty()) {
      doc["solutions"] = ordered_json::array();
      for (const auto& s : c.solutions) {
        ordered_json a;
        for (std::size_t j = 0; j < c.variables.size(); ++j) a[c.variables[j]] = num_json(s[j]);
        doc["solutions"].push_back(a);
      }
    }
    if (!c.support.empty()) doc["support"] = c.support;
    if (!c.realisations.empty() && !c.support.empty()) {
      doc["realisations"] = ordered_json::array();
      for (const auto& r : c.realisations) {
        ordered_json a = ordered_json::object();
        for (const auto& [id, v] : r.values) a[id] = num_json(v);
        doc["realisations"].push_back(a);
      }
    }
    if (c.kind == ClosureKind::MostRobust) doc["coverage"] = c.coverage;
    if (c.kind == ClosureKind::CoveringSet) {
      doc["covers"] = c.covers;
      doc["minimal_guaranteed"] = c.minimal_guaranteed;
    }
    return doc.dump(2) + "\n";
  }

  std::ostringstream out;
  if (c.kind == ClosureKind::ProjectedBox) {
    out << "variable\tlo\thi\n";
    if (!c.box.empty) {
      for (std::size_t j = 0; j < c.variables.size(); ++j) {
        out << c.variables[j] << '\t' << number(c.box[j].lo) << '\t' << number(c.box[j].hi) << '\n';
      }
    }
    return out.str();
  }
  for (std::size_t j = 0; j < c.variables.size(); ++j) out << (j ? "\t" : "") << c.variables[j];
  if (!c.support.empty()) out << "\tsupport";
  out << '\n';
  for (std::size_t s = 0; s < c.solutions.size(); ++s) {
    for (std::size_t j = 0; j < c.variables.size(); ++j) {
      out << (j ? "\t" : "") << number(c.solutions[s][j]);
    }
    if (!c.support.empty()) out << '\t' << join_indices(c.support[s]);
    out << '\n';
  }
  if (c.kind == ClosureKind::MostRobust) out << "# coverage\t" << c.coverage << '\n';
  if (c.kind == ClosureKind::CoveringSet) {
    for (const auto& cv : c.covers) out << "# cover\t" << join_indices(cv) << '\n';
    if (!c.minimal_guaranteed) out << "# greedy cover, minimality not guaranteed\n";
  }
  return out.str();
}

std::string format_flow_report(const ntap::FlowBoundsReport& r, Format f) {
  if (f == Format::Json) {
    ordered_json doc;
    doc["inconsistent"] = r.inconsistent;
    doc["flows"] = ordered_json::array();
    for (const auto& fb : r.flows) {
      ordered_json j{{"flow", flow_json(fb.flow)}};
      if (!r.inconsistent) {
        j["lower"] = num_json(fb.bound.lo);
        j["upper"] = num_json(fb.bound.hi);
      }
      if (fb.truth) {
        j["true"] = num_json(*fb.truth);
        j["enclosed"] = fb.enclosed;
      }
      doc["flows"].push_back(j);
    }
    doc["pct_valid"] = r.pct_valid;
    doc["mean_lower_pct"] = r.mean_lower_pct;
    doc["mean_upper_pct"] = r.mean_upper_pct;
    doc["cpu_seconds"] = r.cpu_seconds;
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  if (r.inconsistent) out << "# inconsistent model: empty hull\n";
  out << "flow\tlower\tupper\ttrue\tenclosed\n";
  for (const auto& fb : r.flows) {
    out << fb.flow.first << "->" << fb.flow.second << '\t';
    if (r.inconsistent) {
      out << "-\t-";
    } else {
      out << number(fb.bound.lo) << '\t' << number(fb.bound.hi);
    }
    out << '\t' << (fb.truth ? number(*fb.truth) : "-") << '\t'
        << (fb.truth ? (fb.enclosed ? "yes" : "no") : "-") << '\n';
  }
  return out.str();
}

std::string format_correction(const ntap::Correction& c, const ntap::FlowBoundsReport& baseline,
                              Format f) {
  if (f == Format::Json) {
    ordered_json doc;
    doc["gross"] = c.gross;
    doc["minor"] = c.minor;
    doc["data"] = ordered_json::array();
    for (const auto& [id, v] : c.values) {
      doc["data"].push_back({{"datum", id}, {"measured", c.measured.at(id)}, {"corrected", v}});
    }
    doc["bounds"] = json::parse(format_flow_report(baseline, Format::Json));
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "datum\tmeasured\tcorrected\n";
  for (const auto& [id, v] : c.values) {
    out << id << '\t' << number(c.measured.at(id)) << '\t' << number(v) << '\n';
  }
  out << "# gross\t" << number(c.gross) << "\n# minor\t" << number(c.minor) << "\n\n";
  out << format_flow_report(baseline, Format::Tsv);
  return out.str();
}

std::string format_diagnosis(const std::vector<ntap::DiagnoseRow>& rows, Format f) {
  if (f == Format::Json) {
    ordered_json doc = ordered_json::array();
    for (const auto& r : rows) {
      doc.push_back({{"sigma2", r.sigma2},
                     {"error_pct", r.error_pct},
                     {"correction_pct_valid", r.correction_pct_valid},
                     {"closure_lower_pct", r.closure_lower_pct},
                     {"closure_upper_pct", r.closure_upper_pct},
                     {"closure_pct_valid", r.closure_pct_valid},
                     {"closure_mean_width", r.closure_mean_width},
                     {"trials", r.trials},
                     {"trials_data_enclosed", r.trials_data_enclosed},
                     {"trials_inconsistent", r.trials_inconsistent}});
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "sigma2\terror_pct\tcorrection_pct_valid\tclosure_lower_pct\tclosure_upper_pct"
         "\tclosure_pct_valid\tclosure_mean_width\n";
  out.setf(std::ios::fixed);
  out.precision(2);
  for (const auto& r : rows) {
    out << number(r.sigma2) << '\t' << r.error_pct << '\t' << r.correction_pct_valid << '\t'
        << r.closure_lower_pct << '\t' << r.closure_upper_pct << '\t' << r.closure_pct_valid
        << '\t' << r.closure_mean_width << '\n';
  }
  return out.str();
}

}  // namespace certclose::io
