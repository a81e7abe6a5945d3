#pragma once

#include <map>
#include <utility>
#include <vector>

#include "gridreconf/case_model.hpp"
#include "gridreconf/powerflow.hpp"

namespace gridreconf {

struct ForestBuildResult {
    Configuration config;
    std::vector<int> open_list;                        // ascending branch id
    std::vector<std::pair<int, double>> insertion_order;  // (branch id, weight) as accepted
};

/// Greedy multi-root Prim: every feeder starts its own tree and the heaviest
/// frontier branch (ties: lower id) is closed until all buses are covered.
/// Branches that would join two trees or close a cycle stay open.
/// Non-switchable branches enter first once they touch a tree.
/// Throws Unreachable, or NotRadial when a pinned-closed branch forces a loop.
ForestBuildResult build_spanning_forest(const NetworkCase& net, const std::map<int, double>& weights);

/// Sending-end apparent power (MVA) of every branch in a converged solution of
/// the fully closed network. Throws NotConverged.
std::map<int, double> weights_from_flow(const NetworkCase& net, const PowerFlowSolution& all_closed);

struct FundamentalLoop {
    int open_branch = 0;
    // Closed branches walked from the open branch's from-bus to its to-bus.
    std::vector<int> path;
    // Endpoints sit in different islands; the path runs through both roots.
    bool inter_feeder = false;
};

/// Throws NotRadial, and std::invalid_argument when `open_branch` is closed.
FundamentalLoop fundamental_loop(const NetworkCase& net, const Configuration& config, int open_branch);

/// Switchable closed branches of the loop created by closing `reference`,
/// nearest hop first (ties: lower id).
std::vector<int> adjacent_switches(const NetworkCase& net, const Configuration& config, int reference);

}  // namespace gridreconf
