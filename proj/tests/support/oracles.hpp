#pragma once

// Brute-force reference implementations. They read only the diagram's
// tables and arcs, never the library's inference or graph algorithms.

#include "cid/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace cidtest {

using States = std::map<std::string, std::size_t>;

/// Nodes not reachable from any decision along relevance or information arcs,
/// restricted to chance and deterministic nodes.
cid::NameSet exogenous_nodes(const cid::Diagram& d);

struct World {
    States states;  // exogenous nodes only
    double weight;
};

/// Every joint state of the exogenous nodes with positive probability.
std::vector<World> enumerate_worlds(const cid::Diagram& d);

/// Values of all chance, deterministic and decision nodes in a world under a
/// decision instance. Non-exogenous chance nodes must have one-hot rows.
States propagate(const cid::Diagram& d, const World& w, const cid::Assignment& decisions);

/// P(query in the counterfactual copy | factual decisions, evidence) over the
/// twin construction, enumerated world by world. Keys are state-index vectors
/// aligned with `query`.
std::map<std::vector<std::size_t>, double> twin_oracle(const cid::Diagram& hcf,
                                                       const cid::Assignment& factual,
                                                       const cid::Assignment& evidence,
                                                       const cid::Assignment& counterfactual,
                                                       const std::vector<std::string>& query);

/// d-separation by enumerating every simple undirected path over relevance arcs.
bool d_separated_by_paths(const cid::Diagram& d, const cid::NameSet& x, const cid::NameSet& y,
                          const cid::NameSet& z);

/// Every directed path (relevance and information arcs) from a source to the
/// target meets z; sources in z count as met.
bool blocked_by_paths(const cid::Diagram& d, const cid::NameSet& sources, const cid::NameSet& z,
                      const std::string& target);

/// P(x = k | decisions) summed straight from the product of CPT rows.
double marginal_by_products(const cid::Diagram& d, const cid::Assignment& decisions,
                            const std::string& x, std::size_t k);

}  // namespace cidtest
