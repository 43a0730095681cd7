#pragma once

#include "cid/functional.hpp"
#include "cid/model.hpp"

#include <string>
#include <string_view>

namespace cid {

/// JSON model document. Top-level keys: variables, relevance_arcs,
/// information_arcs, cpts, deterministic, utility, decision_order,
/// annotations, mechanisms. Table rows are keyed by parent states joined
/// with '|' in parent order ("" when there are no parents).
///
/// Throws ValidationError for syntax errors (with line and column), unknown
/// keys, bad row keys, missing rows, duplicate variables, and anything
/// validate_diagram rejects.
Diagram parse_model(std::string_view text);

/// As parse_model, also reading the optional "mechanisms" section.
HcfDiagram parse_hcf(std::string_view text);

/// Canonical document: object keys sorted, probabilities at 12 significant digits.
std::string serialize_model(const Diagram& d, bool pretty = false);
std::string serialize_model(const HcfDiagram& h, bool pretty = false);

/// x rounded to 12 significant digits.
double round_significant(double x);

/// Throws UsageError when the file cannot be read.
std::string read_text_file(const std::string& path);

}  // namespace cid
