#include "certclose/ntap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <boost/math/distributions/normal.hpp>

#include "certclose/error.hpp"
#include "certclose/lp.hpp"
#include "certclose/transform.hpp"

namespace certclose::ntap {

std::vector<std::string> NetworkInstance::endpoints() const {
  std::vector<std::string> out;
  for (const auto& n : nodes) {
    if (n.endpoint) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Flow> NetworkInstance::flows() const {
  std::vector<Flow> out;
  const auto eps = endpoints();
  for (const auto& i : eps) {
    for (const auto& j : eps) {
      if (i != j) out.emplace_back(i, j);
    }
  }
  return out;
}

const Link& NetworkInstance::link(const std::string& id) const {
  for (const auto& l : links) {
    if (l.id == id) return l;
  }
  throw ModelError("unknown link '" + id + "'");
}

void NetworkInstance::validate() const {
  std::set<std::string> node_ids, endpoint_ids, link_ids;
  for (const auto& n : nodes) {
    if (!node_ids.insert(n.id).second) throw ModelError("duplicate node '" + n.id + "'");
    if (n.endpoint) endpoint_ids.insert(n.id);
  }
  for (const auto& l : links) {
    if (!node_ids.count(l.from) || !node_ids.count(l.to)) {
      throw ModelError("link '" + l.id + "' references an unknown node");
    }
    if (!link_ids.insert(l.id).second) throw ModelError("duplicate link '" + l.id + "'");
    if (l.volume && (!l.volume->valid() || l.volume->lo < 0)) {
      throw ModelError("link '" + l.id + "' has an invalid volume");
    }
  }
  auto in_unit = [](const Interval& f) { return f.valid() && f.lo >= 0.0 && f.hi <= 1.0; };
  std::set<std::pair<Flow, std::string>> seen;
  for (const auto& r : routing) {
    if (!endpoint_ids.count(r.flow.first) || !endpoint_ids.count(r.flow.second) ||
        r.flow.first == r.flow.second) {
      throw ModelError("routing entry for a flow that is not an end-point pair: " +
                       r.flow.first + "->" + r.flow.second);
    }
    if (!link_ids.count(r.link)) throw ModelError("routing references unknown link '" + r.link + "'");
    if (!in_unit(r.fraction) || (r.split_fraction && !in_unit(*r.split_fraction))) {
      throw ModelError("routing fraction outside [0, 1] on link '" + r.link + "'");
    }
    if (!seen.insert({r.flow, r.link}).second) {
      throw ModelError("duplicate routing entry for " + flow_var(r.flow) + " on '" + r.link + "'");
    }
  }
  for (const auto& e : external) {
    if (!endpoint_ids.count(e.node)) {
      throw ModelError("external traffic at '" + e.node + "', which is not an end-point");
    }
  }
  for (const auto& c : lsp) {
    if (!endpoint_ids.count(c.flow.first) || !endpoint_ids.count(c.flow.second) ||
        c.flow.first == c.flow.second) {
      throw ModelError("LSP counter for unknown flow " + flow_var(c.flow));
    }
  }
}

std::string flow_var(const Flow& f) { return "F[" + f.first + "->" + f.second + "]"; }
std::string link_var(const std::string& link) { return "v[" + link + "]"; }
std::string tin_var(const std::string& node) { return "Tin[" + node + "]"; }
std::string tout_var(const std::string& node) { return "Tout[" + node + "]"; }

namespace {

Interval fraction_of(const RoutingEntry& r, const ModelOptions& opts) {
  return opts.with_splitting && r.split_fraction ? *r.split_fraction : r.fraction;
}

/// Constant for a point interval, otherwise a fresh parameter.
Coefficient coefficient(UncertainCSP& p, const std::string& id, Interval iv) {
  if (iv.degenerate()) return iv.lo;
  p.add_parameter(id, UncertaintySet::interval(iv.lo, iv.hi));
  return ParamRef{id};
}

std::optional<Interval> link_volume(const Link& l) {
  if (l.volume) return l.volume;
  if (l.capacity) return Interval{0.0, *l.capacity};
  return std::nullopt;
}

}  // namespace

UncertainCSP build_ucsp(const NetworkInstance& net, const ModelOptions& opts) {
  net.validate();
  UncertainCSP p;
  for (const auto& f : net.flows()) p.add_variable(flow_var(f), Domain::interval(0.0, kInf));

  // Link traffic: sum of routed fractions of flows equals the link volume.
  for (const auto& l : net.links) {
    auto vol = link_volume(l);
    if (!vol) continue;
    LinearConstraint c;
    c.rel = Relation::Eq;
    for (const auto& r : net.routing) {
      if (r.link != l.id) continue;
      Interval frac = fraction_of(r, opts);
      if (frac == Interval::point(0.0)) continue;
      c.lhs.push_back({coefficient(p, "a[" + flow_var(r.flow) + "@" + l.id + "]", frac),
                       flow_var(r.flow)});
    }
    c.rhs = coefficient(p, link_var(l.id), *vol);
    p.add_constraint(std::move(c));
  }

  // Traffic conservation at end-points.
  const auto flows = net.flows();
  for (const auto& e : net.external) {
    if (e.t_in) {
      LinearConstraint c;
      c.rel = Relation::Eq;
      for (const auto& f : flows) {
        if (f.first == e.node) c.lhs.push_back({1.0, flow_var(f)});
      }
      c.rhs = coefficient(p, tin_var(e.node), *e.t_in);
      p.add_constraint(std::move(c));
    }
    if (e.t_out) {
      LinearConstraint c;
      c.rel = Relation::Eq;
      for (const auto& f : flows) {
        if (f.second == e.node) c.lhs.push_back({1.0, flow_var(f)});
      }
      c.rhs = coefficient(p, tout_var(e.node), *e.t_out);
      p.add_constraint(std::move(c));
    }
  }

  for (const auto& lsp : net.lsp) {
    LinearConstraint c;
    c.rel = Relation::Eq;
    c.lhs.push_back({1.0, flow_var(lsp.flow)});
    c.rhs = coefficient(p, "lsp[" + flow_var(lsp.flow) + "]", lsp.value);
    p.add_constraint(std::move(c));
  }

  // Node conservation over flows: inbound minus outbound link traffic equals
  // traffic leaving minus traffic entering at the node.
  if (opts.with_flow_conservation) {
    for (const auto& n : net.nodes) {
      Interval t_in = Interval::point(0.0), t_out = Interval::point(0.0);
      bool known = true;
      if (n.endpoint) {
        auto it = std::find_if(net.external.begin(), net.external.end(),
                               [&](const External& e) { return e.node == n.id; });
        if (it == net.external.end() || !it->t_in || !it->t_out) {
          known = false;
        } else {
          t_in = *it->t_in;
          t_out = *it->t_out;
        }
      }
      if (!known) continue;
      LinearConstraint c;
      c.rel = Relation::Eq;
      for (const auto& r : net.routing) {
        const Link& l = net.link(r.link);
        int sign = (l.to == n.id ? 1 : 0) - (l.from == n.id ? 1 : 0);
        Interval frac = fraction_of(r, opts);
        if (sign == 0 || frac == Interval::point(0.0)) continue;
        Interval coef = sign > 0 ? frac : -frac;
        c.lhs.push_back(
            {coefficient(p, "c[" + n.id + ":" + flow_var(r.flow) + "@" + l.id + "]", coef),
             flow_var(r.flow)});
      }
      c.rhs = coefficient(p, "d[" + n.id + "]", t_out + (-t_in));
      p.add_constraint(std::move(c));
    }
  }
  return p;
}

double two_sided_z(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ModelError("confidence must lie in (0, 1)");
  boost::math::normal_distribution<double> n;
  return boost::math::quantile(n, 1.0 - (1.0 - confidence) / 2.0);
}

Interval enclose_measurements(const MeasurementPair& m, double confidence) {
  if (m.sigma2 < 0) throw ModelError("negative variance");
  const double lo = std::min(m.x, m.y), hi = std::max(m.x, m.y);
  const double margin = m.sigma2 == 0.0 ? 0.0 : two_sided_z(confidence) * std::sqrt(m.sigma2);
  return {std::max(0.0, lo - margin), hi + margin};
}

Interval splitting_interval(int paths) {
  if (paths < 1) throw ModelError("path count must be at least 1");
  if (paths == 1) return Interval::point(1.0);
  return {0.6 / paths, 1.4 / paths};
}

NetworkInstance generate(const NetworkInstance& net, const std::map<Flow, double>& demands) {
  net.validate();
  NetworkInstance out = net;
  out.true_flows.clear();
  for (const auto& f : net.flows()) {
    auto it = demands.find(f);
    double d = it == demands.end() ? 0.0 : it->second;
    if (d < 0) throw ModelError("negative demand for " + flow_var(f));
    out.true_flows[f] = d;
  }
  for (auto& l : out.links) {
    double v = 0.0;
    for (const auto& r : net.routing) {
      if (r.link == l.id) v += r.fraction.mid() * out.true_flows[r.flow];
    }
    l.truth = v;
    l.measured = v;
    l.volume = Interval::point(v);
  }
  for (const auto& ep : net.endpoints()) {
    auto it = std::find_if(out.external.begin(), out.external.end(),
                           [&](const External& e) { return e.node == ep; });
    if (it == out.external.end()) {
      out.external.push_back({ep, {}, {}, {}, {}, {}, {}});
      it = std::prev(out.external.end());
    }
    double in = 0.0, outv = 0.0;
    for (const auto& [f, d] : out.true_flows) {
      if (f.first == ep) in += d;
      if (f.second == ep) outv += d;
    }
    it->true_in = in;
    it->true_out = outv;
    it->measured_in = in;
    it->measured_out = outv;
    it->t_in = Interval::point(in);
    it->t_out = Interval::point(outv);
  }
  return out;
}

std::size_t deviates_needed(const NetworkInstance& truth) {
  std::size_t n = 0;
  for (const auto& l : truth.links) n += l.truth ? 2 : 0;
  for (const auto& e : truth.external) n += (e.true_in ? 2 : 0) + (e.true_out ? 2 : 0);
  return n;
}

NetworkInstance simulate_with(const NetworkInstance& truth, const SimulateOptions& opts,
                              const std::vector<double>& z, const std::vector<double>& u) {
  if (opts.sigma2 < 0) throw ModelError("negative variance");
  if (z.size() < deviates_needed(truth)) throw ModelError("too few deviates");
  const double sigma = std::sqrt(opts.sigma2);
  NetworkInstance out = truth;
  std::size_t k = 0;
  auto draw = [&](double t, std::optional<Interval>& volume, std::optional<double>& measured) {
    const bool drop = !u.empty() && u[k / 2] < opts.discard;
    MeasurementPair m{std::max(0.0, t + sigma * z[k]), std::max(0.0, t + sigma * z[k + 1]),
                      opts.sigma2};
    k += 2;
    if (drop) {
      volume.reset();
      measured.reset();
      return;
    }
    measured = m.x;
    volume = enclose_measurements(m, opts.confidence);
  };
  for (auto& l : out.links) {
    if (l.truth) draw(*l.truth, l.volume, l.measured);
  }
  for (auto& e : out.external) {
    if (e.true_in) draw(*e.true_in, e.t_in, e.measured_in);
    if (e.true_out) draw(*e.true_out, e.t_out, e.measured_out);
  }
  return out;
}

NetworkInstance simulate(const NetworkInstance& truth, const SimulateOptions& opts,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = deviates_needed(truth);
  std::vector<double> z(n), u;
  for (auto& v : z) v = normal(rng);
  if (opts.discard > 0) {
    u.resize(n / 2);
    for (auto& v : u) v = unif(rng);
  }
  return simulate_with(truth, opts, z, u);
}

// ---------------------------------------------------------------------------
// Data correction

namespace {

struct Datum {
  std::string id;
  double measured;
  /// Flow coefficients at fraction midpoints.
  std::map<Flow, double> coefs;
};

std::vector<Datum> data_rows(const NetworkInstance& net) {
  std::vector<Datum> out;
  for (const auto& l : net.links) {
    std::optional<double> m = l.measured;
    if (!m && l.volume) m = l.volume->mid();
    if (!m) continue;
    Datum d{link_var(l.id), *m, {}};
    for (const auto& r : net.routing) {
      if (r.link == l.id && r.fraction.mid() != 0.0) d.coefs[r.flow] += r.fraction.mid();
    }
    out.push_back(std::move(d));
  }
  const auto flows = net.flows();
  for (const auto& e : net.external) {
    std::optional<double> in = e.measured_in, outv = e.measured_out;
    if (!in && e.t_in) in = e.t_in->mid();
    if (!outv && e.t_out) outv = e.t_out->mid();
    if (in) {
      Datum d{tin_var(e.node), *in, {}};
      for (const auto& f : flows) {
        if (f.first == e.node) d.coefs[f] = 1.0;
      }
      out.push_back(std::move(d));
    }
    if (outv) {
      Datum d{tout_var(e.node), *outv, {}};
      for (const auto& f : flows) {
        if (f.second == e.node) d.coefs[f] = 1.0;
      }
      out.push_back(std::move(d));
    }
  }
  for (const auto& c : net.lsp) {
    out.push_back({"lsp[" + flow_var(c.flow) + "]", c.value.mid(), {{c.flow, 1.0}}});
  }
  return out;
}

}  // namespace

Correction data_correct(const NetworkInstance& net, double sigma2) {
  if (sigma2 < 0) throw ModelError("negative variance");
  net.validate();
  const auto flows = net.flows();
  const auto data = data_rows(net);
  const std::size_t nf = flows.size(), nd = data.size();
  std::map<Flow, std::size_t> col;
  for (std::size_t j = 0; j < nf; ++j) col[flows[j]] = j;
  // Columns: flows, then per datum (minor+, minor-, gross+, gross-).
  const std::size_t n = nf + 4 * nd;
  auto minor_p = [&](std::size_t i) { return nf + 4 * i; };
  auto minor_m = [&](std::size_t i) { return nf + 4 * i + 1; };
  auto gross_p = [&](std::size_t i) { return nf + 4 * i + 2; };
  auto gross_m = [&](std::size_t i) { return nf + 4 * i + 3; };
  const double threshold = 3.0 * std::sqrt(sigma2);

  lp::LinearProgram prog;
  prog.objective.assign(n, 0.0);
  prog.lower.assign(n, 0.0);
  prog.upper.assign(n, kInf);
  for (std::size_t i = 0; i < nd; ++i) {
    prog.upper[minor_p(i)] = threshold;
    prog.upper[minor_m(i)] = threshold;
    std::vector<double> row(n, 0.0);
    for (const auto& [f, a] : data[i].coefs) row[col.at(f)] = a;
    row[minor_p(i)] = -1.0;
    row[minor_m(i)] = 1.0;
    row[gross_p(i)] = -1.0;
    row[gross_m(i)] = 1.0;
    prog.rows.push_back({std::move(row), lp::RowRelation::Eq, data[i].measured});
  }

  for (std::size_t i = 0; i < nd; ++i) prog.objective[gross_p(i)] = prog.objective[gross_m(i)] = 1.0;
  auto stage1 = lp::solve(prog);
  if (stage1.status != lp::Status::Optimal) throw Error("data correction stage 1 failed");

  for (std::size_t i = 0; i < nd; ++i) {
    for (auto c : {gross_p(i), gross_m(i)}) {
      prog.lower[c] = prog.upper[c] = stage1.point[c];
      prog.objective[c] = 0.0;
    }
    prog.objective[minor_p(i)] = prog.objective[minor_m(i)] = 1.0;
  }
  auto stage2 = lp::solve(prog);
  if (stage2.status != lp::Status::Optimal) throw Error("data correction stage 2 failed");

  Correction out;
  out.corrected = net;
  const auto& x = stage2.point;
  for (std::size_t i = 0; i < nd; ++i) {
    double value = 0.0;
    for (const auto& [f, a] : data[i].coefs) value += a * x[col.at(f)];
    out.values[data[i].id] = value;
    out.measured[data[i].id] = data[i].measured;
    out.gross += x[gross_p(i)] + x[gross_m(i)];
    out.minor += x[minor_p(i)] + x[minor_m(i)];
  }
  for (auto& l : out.corrected.links) {
    auto it = out.values.find(link_var(l.id));
    if (it != out.values.end()) l.volume = Interval::point(it->second);
  }
  for (auto& e : out.corrected.external) {
    auto in = out.values.find(tin_var(e.node));
    if (in != out.values.end()) e.t_in = Interval::point(in->second);
    auto ov = out.values.find(tout_var(e.node));
    if (ov != out.values.end()) e.t_out = Interval::point(ov->second);
  }
  for (auto& c : out.corrected.lsp) {
    c.value = Interval::point(out.values.at("lsp[" + flow_var(c.flow) + "]"));
  }
  for (auto& r : out.corrected.routing) {
    r.fraction = Interval::point(r.fraction.mid());
    r.split_fraction.reset();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flow bounds

namespace {

FlowBoundsReport bounds_report(const NetworkInstance& net, const UncertainCSP& p) {
  auto t0 = std::chrono::steady_clock::now();
  auto ils = rewrite_equalities(ucsp_to_ils(p));
  Box box = interval_hull(cet_poli(ils), ils.domains);
  FlowBoundsReport rep;
  rep.inconsistent = box.empty;
  std::map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < ils.variables.size(); ++j) col[ils.variables[j]] = j;

  std::size_t with_truth = 0, valid = 0, positive = 0;
  double lower = 0.0, upper = 0.0, width = 0.0;
  for (const auto& f : net.flows()) {
    FlowBound fb;
    fb.flow = f;
    fb.bound = box.empty ? Interval{kInf, -kInf} : box[col.at(flow_var(f))];
    auto it = net.true_flows.find(f);
    if (it != net.true_flows.end()) {
      fb.truth = it->second;
      const double tol = 1e-6 * std::max(1.0, std::abs(it->second));
      fb.enclosed = !box.empty && fb.bound.lo - tol <= it->second && it->second <= fb.bound.hi + tol;
      ++with_truth;
      valid += fb.enclosed;
      if (it->second > 0 && !box.empty) {
        ++positive;
        lower += 100.0 * fb.bound.lo / it->second;
        upper += 100.0 * fb.bound.hi / it->second;
      }
    }
    if (!box.empty) width += fb.bound.width();
    rep.flows.push_back(fb);
  }
  if (with_truth) rep.pct_valid = 100.0 * static_cast<double>(valid) / static_cast<double>(with_truth);
  if (positive) {
    rep.mean_lower_pct = lower / static_cast<double>(positive);
    rep.mean_upper_pct = upper / static_cast<double>(positive);
  }
  if (!rep.flows.empty()) rep.mean_width = width / static_cast<double>(rep.flows.size());
  rep.cpu_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

FlowBoundsReport flow_bounds(const NetworkInstance& net, const ModelOptions& opts) {
  return bounds_report(net, build_ucsp(net, opts));
}

FlowBoundsReport point_bounds(const NetworkInstance& net, const ModelOptions& opts) {
  NetworkInstance pt = net;
  for (auto& l : pt.links) {
    if (l.volume) l.volume = Interval::point(l.volume->mid());
  }
  for (auto& e : pt.external) {
    if (e.t_in) e.t_in = Interval::point(e.t_in->mid());
    if (e.t_out) e.t_out = Interval::point(e.t_out->mid());
  }
  for (auto& r : pt.routing) {
    Interval f = opts.with_splitting && r.split_fraction ? *r.split_fraction : r.fraction;
    r.fraction = Interval::point(f.mid());
    r.split_fraction.reset();
  }
  for (auto& c : pt.lsp) c.value = Interval::point(c.value.mid());
  ModelOptions plain = opts;
  plain.with_splitting = false;
  return bounds_report(pt, build_ucsp(pt, plain));
}

std::vector<DiagnoseRow> diagnose(const NetworkInstance& truth, const DiagnoseOptions& opts) {
  if (opts.trials < 1) throw ModelError("trials must be positive");
  double mean_flow = 0.0;
  for (const auto& [f, v] : truth.true_flows) mean_flow += v;
  if (!truth.true_flows.empty()) mean_flow /= static_cast<double>(truth.true_flows.size());

  std::vector<DiagnoseRow> rows;
  for (double s2 : opts.sigma2_sweep) {
    DiagnoseRow r;
    r.sigma2 = s2;
    r.error_pct = mean_flow > 0 ? 100.0 * s2 / mean_flow : 0.0;
    rows.push_back(r);
  }
  std::vector<std::size_t> closure_valid(rows.size(), 0), closure_count(rows.size(), 0),
      correction_valid(rows.size(), 0), correction_count(rows.size(), 0), consistent(rows.size(), 0);

  const std::size_t n = deviates_needed(truth);
  for (int t = 0; t < opts.trials; ++t) {
    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(t));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n);
    for (auto& v : z) v = normal(rng);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      auto& row = rows[s];
      SimulateOptions so{row.sigma2, opts.confidence, 0.0};
      auto net = simulate_with(truth, so, z, {});
      ++row.trials;

      bool enclosed = true;
      for (const auto& l : net.links) {
        if (l.truth && l.volume && !l.volume->contains(*l.truth)) enclosed = false;
      }
      for (const auto& e : net.external) {
        if (e.true_in && e.t_in && !e.t_in->contains(*e.true_in)) enclosed = false;
        if (e.true_out && e.t_out && !e.t_out->contains(*e.true_out)) enclosed = false;
      }
      row.trials_data_enclosed += enclosed;

      auto rep = flow_bounds(net, opts.model);
      if (rep.inconsistent) {
        ++row.trials_inconsistent;
      } else {
        ++consistent[s];
        row.closure_lower_pct += rep.mean_lower_pct;
        row.closure_upper_pct += rep.mean_upper_pct;
        row.closure_mean_width += rep.mean_width;
      }
      for (const auto& fb : rep.flows) {
        if (!fb.truth) continue;
        ++closure_count[s];
        closure_valid[s] += fb.enclosed;
      }
      if (opts.run_correction) {
        auto corr = data_correct(net, row.sigma2);
        auto base = point_bounds(corr.corrected, opts.model);
        for (const auto& fb : base.flows) {
          if (!fb.truth) continue;
          ++correction_count[s];
          correction_valid[s] += fb.enclosed;
        }
      }
    }
  }
  for (std::size_t s = 0; s < rows.size(); ++s) {
    auto& r = rows[s];
    if (consistent[s]) {
      const double k = static_cast<double>(consistent[s]);
      r.closure_lower_pct /= k;
      r.closure_upper_pct /= k;
      r.closure_mean_width /= k;
    }
    if (closure_count[s]) {
      r.closure_pct_valid = 100.0 * static_cast<double>(closure_valid[s]) /
                            static_cast<double>(closure_count[s]);
    }
    if (correction_count[s]) {
      r.correction_pct_valid = 100.0 * static_cast<double>(correction_valid[s]) /
                               static_cast<double>(correction_count[s]);
    }
  }
  return rows;
}

NetworkInstance lsp_augment(const NetworkInstance& net, const std::vector<LspCounter>& counters) {
  NetworkInstance out = net;
  const auto flows = net.flows();
  for (const auto& c : counters) {
    if (std::find(flows.begin(), flows.end(), c.flow) == flows.end()) {
      throw ModelError("LSP counter for unknown flow " + flow_var(c.flow));
    }
    if (!c.value.valid()) throw ModelError("LSP counter with an inverted interval");
    out.lsp.push_back(c);
  }
  return out;
}

}  // namespace certclose::ntap
