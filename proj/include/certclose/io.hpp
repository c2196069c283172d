#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "certclose/enumerate.hpp"
#include "certclose/ntap.hpp"
#include "certclose/ucsp.hpp"

namespace certclose::io {

/// UCSP document:
///   {"variables":   [{"id": "X", "domain": D}],
///    "parameters":  [{"id": "l", "set": S}],
///    "constraints": [C]}
/// D: {"int_set":[..]} | {"int_range":[lo,hi]} | {"interval":[lo,hi]}
/// S: {"set":[..]} | {"int_set":[..]} | {"interval":[lo,hi]} | number
/// C: {"linear":[[coef,"X"],..], "rel":"<=", "rhs":coef}
///    | {"expr":"abs(X - Y) == l"}
///    | {"table":{"scope":[..], "tuples":[[..],..]}}
/// coef: number | {"param":"l"} | {"interval":[lo,hi]}
/// Interval ends may be "inf" / "-inf". An {"interval":..} coefficient
/// declares a fresh parameter named _u<k>.
UncertainCSP parse_ucsp(std::string_view text);
std::string print_ucsp(const UncertainCSP& p);

/// Network document: "nodes", "links", "routing", "external", "true_flows",
/// "lsp" (see README for the field list).
ntap::NetworkInstance parse_network(std::string_view text);
std::string print_network(const ntap::NetworkInstance& net);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view text);

enum class Format { Tsv, Json };
Format parse_format(std::string_view s);

std::string format_closure(const Closure& c, Format f);
std::string format_flow_report(const ntap::FlowBoundsReport& r, Format f);
std::string format_correction(const ntap::Correction& c, const ntap::FlowBoundsReport& baseline,
                              Format f);
std::string format_diagnosis(const std::vector<ntap::DiagnoseRow>& rows, Format f);

/// Shortest decimal that round-trips; "inf" / "-inf" for infinities.
std::string number(double v);

}  // namespace certclose::io
