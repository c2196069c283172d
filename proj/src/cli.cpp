#include "certclose/cli.hpp"

#include <sstream>

#include <CLI11.hpp>

#include "certclose/enumerate.hpp"
#include "certclose/error.hpp"
#include "certclose/io.hpp"
#include "certclose/ntap.hpp"
#include "certclose/transform.hpp"

namespace certclose {

namespace {

struct RunConfig {
  std::string input;
  std::string closure = "full";
  std::string form = "auto";
  std::string format = "tsv";
  std::string out;
  std::uint64_t seed = 7;
  double sigma2 = 10.0;
  double confidence = 0.995;
  int trials = 100;
  std::string sigma2_sweep = "0.1,1,10,100";
  double discard = 0.0;
  std::size_t max_realisations = 1'000'000;
  std::size_t max_cover = 20;
  bool with_splitting = false;
  bool with_flow_conservation = false;
};

bool finite_parameters(const UncertainCSP& p) {
  for (const auto& [id, u] : p.parameters()) {
    if (!u.is_finite() && !u.is_singleton()) return false;
  }
  return true;
}

bool transform_eligible(const UncertainCSP& p) {
  for (const auto& c : p.constraints()) {
    if (!std::holds_alternative<LinearConstraint>(c)) return false;
  }
  for (const auto& [id, u] : p.parameters()) {
    if (u.is_finite() && u.values().size() > 1) return false;
    if (!std::isfinite(u.hull().lo) || !std::isfinite(u.hull().hi)) return false;
  }
  for (const auto& [id, d] : p.variables()) {
    if (!d.positive_orthant()) return false;
  }
  return true;
}

std::vector<double> parse_sweep(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("bad --sigma2-sweep entry '" + item + "'");
    }
  }
  if (out.empty()) throw ParseError("empty --sigma2-sweep");
  return out;
}

ntap::NetworkInstance with_truth(ntap::NetworkInstance net) {
  bool routed = std::all_of(net.links.begin(), net.links.end(),
                            [](const ntap::Link& l) { return l.truth.has_value(); });
  if (!routed) {
    if (net.true_flows.empty()) throw ModelError("network carries no truth to simulate from");
    net = ntap::generate(net, net.true_flows);
  }
  return net;
}

}  // namespace

Closure compute_closure(const UncertainCSP& p, ClosureKind kind, const std::string& form,
                        const EnumerateOptions& opts) {
  std::string chosen = form;
  if (chosen == "auto") {
    // The transform form lists solutions only over finite domains and has no
    // support information for the robustness-oriented closures.
    bool fits = kind == ClosureKind::ProjectedBox ||
                ((kind == ClosureKind::Full || kind == ClosureKind::RobustSet) &&
                 p.all_domains_finite());
    chosen = fits && transform_eligible(p) ? "transform" : "enumerate";
  }
  if (chosen == "enumerate") {
    if (!finite_parameters(p)) {
      throw ModelError("enumeration needs finite uncertainty sets; use --form transform");
    }
    auto table = support_table(p, opts);
    switch (kind) {
      case ClosureKind::Full: return full_closure(table);
      case ClosureKind::RobustSet: return robust_set(table);
      case ClosureKind::MostRobust: return most_robust_solution(table);
      case ClosureKind::CoveringSet: return covering_sets_minimal(table, opts.max_cover);
      case ClosureKind::ProjectedBox: {
        Closure c = full_closure(table);
        c.box = bounding_box(c);
        c.kind = ClosureKind::ProjectedBox;
        return c;
      }
    }
  }
  if (chosen != "transform") throw ParseError("unknown form '" + chosen + "'");
  if (!transform_eligible(p)) {
    throw ModelError(
        "transform form needs linear constraints, interval uncertainty and non-negative domains");
  }
  Closure c;
  c.kind = kind;
  c.variables = p.variable_ids();
  switch (kind) {
    case ClosureKind::ProjectedBox:
      c.box = projected_closure(p, CetKind::Full);
      return c;
    case ClosureKind::Full:
    case ClosureKind::RobustSet: {
      if (!p.all_domains_finite()) {
        throw ModelError("listing solutions needs finite domains; use --closure hull");
      }
      auto q = certain_equivalent(p, kind == ClosureKind::Full ? CetKind::Full : CetKind::Robust);
      auto sols = complete_solutions(q);
      c.solutions.assign(sols.begin(), sols.end());
      return c;
    }
    default:
      throw ModelError("closure '" + std::string(to_string(kind)) + "' needs the enumeration form");
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Certainty closures of uncertain constraint problems", "certclose"};
  app.require_subcommand(1);

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "tsv | structured")
        ->check(CLI::IsMember({"tsv", "structured", "json"}));
    sub->add_option("--out", cfg.out, "Write the report to this file");
  };

  auto* solve = app.add_subcommand("solve", "Compute a closure of a UCSP model");
  solve->add_option("model", cfg.input, "UCSP model file")->required();
  solve->add_option("--closure", cfg.closure, "full | robust-set | most-robust | covering-set | hull")
      ->check(CLI::IsMember({"full", "robust-set", "most-robust", "covering-set", "hull"}));
  solve->add_option("--form", cfg.form, "auto | transform | enumerate")
      ->check(CLI::IsMember({"auto", "transform", "enumerate"}));
  solve->add_option("--max-realisations", cfg.max_realisations);
  solve->add_option("--max-cover", cfg.max_cover);
  add_output(solve);

  auto* ntap_cmd = app.add_subcommand("ntap", "Network traffic analysis");
  ntap_cmd->require_subcommand(1);
  auto add_network = [&](CLI::App* sub) {
    sub->add_option("network", cfg.input, "Network file")->required();
    sub->add_flag("--with-splitting", cfg.with_splitting, "Use interval splitting fractions");
    sub->add_flag("--with-flow-conservation", cfg.with_flow_conservation,
                  "Add node conservation rows");
    add_output(sub);
  };
  auto* gen = ntap_cmd->add_subcommand("gen", "Route the true flows into link volumes");
  add_network(gen);
  auto* perturb = ntap_cmd->add_subcommand("perturb", "Simulate noisy measurements");
  add_network(perturb);
  auto* correct = ntap_cmd->add_subcommand("correct", "Data-correction baseline");
  add_network(correct);
  auto* bounds = ntap_cmd->add_subcommand("bounds", "Reliable flow bounds");
  add_network(bounds);
  auto* diag = ntap_cmd->add_subcommand("diagnose", "Variance sweep of both methods");
  add_network(diag);
  for (auto* sub : {perturb, correct, diag}) {
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--confidence", cfg.confidence)->check(CLI::Range(0.0, 1.0));
  }
  for (auto* sub : {perturb, correct}) sub->add_option("--sigma2", cfg.sigma2)->check(CLI::NonNegativeNumber);
  perturb->add_option("--discard", cfg.discard, "Probability of dropping a reading")
      ->check(CLI::Range(0.0, 1.0));
  diag->add_option("--trials", cfg.trials)->check(CLI::PositiveNumber);
  diag->add_option("--sigma2-sweep", cfg.sigma2_sweep, "Comma-separated variances");

  std::vector<const char*> argv{"certclose"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "certclose: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    const auto fmt = io::parse_format(cfg.format);
    const ntap::ModelOptions mo{cfg.with_splitting, cfg.with_flow_conservation};
    std::string text;
    int code = kExitOk;

    if (*solve) {
      auto p = io::parse_ucsp(io::read_file(cfg.input));
      Closure c = compute_closure(p, parse_closure_kind(cfg.closure), cfg.form,
                                  {cfg.max_realisations, cfg.max_cover});
      text = io::format_closure(c, fmt);
      code = c.empty() ? kExitEmpty : kExitOk;
    } else {
      auto net = io::parse_network(io::read_file(cfg.input));
      if (*gen) {
        if (net.true_flows.empty()) throw ModelError("gen needs \"true_flows\" demands");
        text = io::print_network(ntap::generate(net, net.true_flows));
      } else if (*perturb) {
        ntap::SimulateOptions so{cfg.sigma2, cfg.confidence, cfg.discard};
        text = io::print_network(ntap::simulate(with_truth(net), so, cfg.seed));
      } else if (*correct) {
        auto corr = ntap::data_correct(net, cfg.sigma2);
        auto base = ntap::point_bounds(corr.corrected, mo);
        text = io::format_correction(corr, base, fmt);
      } else if (*bounds) {
        auto rep = ntap::flow_bounds(net, mo);
        text = io::format_flow_report(rep, fmt);
        code = rep.inconsistent ? kExitEmpty : kExitOk;
      } else if (*diag) {
        ntap::DiagnoseOptions dopt;
        dopt.sigma2_sweep = parse_sweep(cfg.sigma2_sweep);
        dopt.trials = cfg.trials;
        dopt.seed = cfg.seed;
        dopt.confidence = cfg.confidence;
        dopt.model = mo;
        text = io::format_diagnosis(ntap::diagnose(with_truth(net), dopt), fmt);
      }
    }
    if (cfg.out.empty()) {
      out << text;
    } else {
      io::write_file(cfg.out, text);
    }
    return code;
  } catch (const Error& e) {
    err << "certclose: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace certclose
