#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "certclose/interval.hpp"
#include "certclose/ucsp.hpp"

namespace certclose::ntap {

struct Node {
  std::string id;
  bool endpoint = true;
};

struct Link {
  std::string id;  ///< defaults to "from->to"
  std::string from;
  std::string to;
  /// Volume the model uses: a point or an enclosing interval; nullopt when
  /// the measurement is missing.
  std::optional<Interval> volume;
  std::optional<double> capacity;
  /// Simulation truth, when known.
  std::optional<double> truth;
  /// Single measured reading fed to data correction.
  std::optional<double> measured;
};

using Flow = std::pair<std::string, std::string>;

/// Proportion of flow `flow` carried by link `link`.
struct RoutingEntry {
  Flow flow;
  std::string link;
  Interval fraction{1.0, 1.0};
  /// Replaces `fraction` when the splitting variant is selected.
  std::optional<Interval> split_fraction;
};

/// External traffic at an end-point: entering (in) and leaving (out).
struct External {
  std::string node;
  std::optional<Interval> t_in;
  std::optional<Interval> t_out;
  std::optional<double> true_in;
  std::optional<double> true_out;
  std::optional<double> measured_in;
  std::optional<double> measured_out;
};

/// Per-flow counter pinning a flow to an interval.
struct LspCounter {
  Flow flow;
  Interval value;
};

struct NetworkInstance {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<RoutingEntry> routing;
  std::vector<External> external;
  std::map<Flow, double> true_flows;
  std::vector<LspCounter> lsp;

  std::vector<std::string> endpoints() const;
  /// Ordered end-point pairs (i, j), i != j, sorted.
  std::vector<Flow> flows() const;
  const Link& link(const std::string& id) const;
  /// Throws ModelError on dangling ids, fractions outside [0, 1] or
  /// duplicate routing entries.
  void validate() const;
};

std::string flow_var(const Flow& f);
std::string link_var(const std::string& link);
std::string tin_var(const std::string& node);
std::string tout_var(const std::string& node);

struct ModelOptions {
  /// Use split fractions where declared (the interval-splitting variant).
  bool with_splitting = false;
  /// Add per-node flow conservation rows, written over flows.
  bool with_flow_conservation = false;
};

/// Flow UCSP: variables F[i->j] >= 0; a link row per link with a volume (or a
/// capacity); an origin row and a destination row per end-point with
/// external data; LSP rows; optional node conservation rows. Every
/// non-degenerate interval becomes its own parameter.
UncertainCSP build_ucsp(const NetworkInstance& net, const ModelOptions& opts = {});

/// Two-sided standard normal quantile for `confidence` (0.995 -> 2.807).
double two_sided_z(double confidence);

struct MeasurementPair {
  double x = 0.0;
  double y = 0.0;
  double sigma2 = 0.0;
};

/// [max(0, min(x,y) - z sigma), max(x,y) + z sigma].
Interval enclose_measurements(const MeasurementPair& m, double confidence = 0.995);

/// [0.6/r, 1.4/r]; r = 1 gives [1, 1].
Interval splitting_interval(int paths);

/// Routes the true flows: truth and a point volume for every link, and true
/// external volumes for every end-point.
NetworkInstance generate(const NetworkInstance& net, const std::map<Flow, double>& demands);

struct SimulateOptions {
  double sigma2 = 10.0;
  double confidence = 0.995;
  /// Probability that a reading is dropped (incompleteness).
  double discard = 0.0;
};

/// Two independent readings per datum, truth + N(0, sigma2) clamped at 0.
/// `measured` takes the first reading; the model volume encloses both.
NetworkInstance simulate(const NetworkInstance& truth, const SimulateOptions& opts,
                         std::uint64_t seed);

/// Same, drawing the standard normal deviates from `z` (two per datum in
/// link order, then in/out per external entry). Used for common random
/// numbers across variance sweeps.
NetworkInstance simulate_with(const NetworkInstance& truth, const SimulateOptions& opts,
                              const std::vector<double>& z, const std::vector<double>& u);
/// Number of standard normal deviates simulate_with() consumes.
std::size_t deviates_needed(const NetworkInstance& truth);

struct Correction {
  /// Corrected value per datum, keyed by the datum's parameter-style id
  /// (v[...], Tin[...], Tout[...]).
  std::map<std::string, double> values;
  std::map<std::string, double> measured;
  double gross = 0.0;
  double minor = 0.0;
  /// The network with every volume replaced by its corrected point value.
  NetworkInstance corrected;
};

/// Two-stage L1 correction: first minimise deviations beyond 3 sigma per
/// datum, then, with those fixed, the deviations within 3 sigma. Routing
/// fractions are taken at their midpoint.
Correction data_correct(const NetworkInstance& net, double sigma2);

struct FlowBound {
  Flow flow;
  Interval bound;
  std::optional<double> truth;
  bool enclosed = false;
};

struct FlowBoundsReport {
  std::vector<FlowBound> flows;
  /// Empty hull: the model admits no realisation.
  bool inconsistent = false;
  double cpu_seconds = 0.0;
  /// Aggregates over flows with known, positive truth.
  double pct_valid = 0.0;
  double mean_lower_pct = 0.0;
  double mean_upper_pct = 0.0;
  double mean_width = 0.0;
};

/// Transform pipeline on the flow UCSP.
FlowBoundsReport flow_bounds(const NetworkInstance& net, const ModelOptions& opts = {});

/// LP bounds of the deterministic model built from point volumes (the data
/// correction baseline once `net` holds corrected values).
FlowBoundsReport point_bounds(const NetworkInstance& net, const ModelOptions& opts = {});

struct DiagnoseOptions {
  std::vector<double> sigma2_sweep{0.1, 1, 10, 100};
  int trials = 100;
  std::uint64_t seed = 7;
  double confidence = 0.995;
  ModelOptions model;
  bool run_correction = true;
};

struct DiagnoseRow {
  double sigma2 = 0.0;
  /// sigma2 / mean true flow, in percent.
  double error_pct = 0.0;
  double correction_pct_valid = 0.0;
  double closure_pct_valid = 0.0;
  double closure_lower_pct = 0.0;
  double closure_upper_pct = 0.0;
  double closure_mean_width = 0.0;
  /// Trials in which every datum interval enclosed its truth.
  int trials_data_enclosed = 0;
  int trials_inconsistent = 0;
  int trials = 0;
};

/// Trial t draws its deviates from seed + t; the same deviates are reused
/// for every variance in the sweep.
std::vector<DiagnoseRow> diagnose(const NetworkInstance& truth, const DiagnoseOptions& opts);

/// Adds LSP counters; throws ModelError for flows that are not end-point pairs.
NetworkInstance lsp_augment(const NetworkInstance& net, const std::vector<LspCounter>& counters);

}  // namespace certclose::ntap
