#ifndef PW_INFERENCE_HPP
#define PW_INFERENCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pw/pairwise.hpp"
#include "pw/proposals.hpp"

namespace pw {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fully-connected pairwise instance over joint proposals: selecting a node
// costs its unary, putting two selected nodes in the same cluster costs
// their pair entry.
struct AssemblyProblem {
    std::vector<JointProposal> nodes;
    std::vector<double> unary;      // per node
    std::vector<double> pair_cost;  // n*n symmetric, diagonal unused

    int size() const { return static_cast<int>(nodes.size()); }
    double pair(int i, int j) const { return pair_cost[static_cast<size_t>(i) * nodes.size() + j]; }
    double& pair_ref(int i, int j) { return pair_cost[static_cast<size_t>(i) * nodes.size() + j]; }
};

// cluster[i] = -1 when node i is unselected, otherwise its cluster id.
// Feasible labelings have at most one node per joint type in a cluster.
struct Labeling {
    std::vector<int> cluster;

    bool selected(int i) const { return cluster[i] >= 0; }
    // relabel clusters in order of their first member
    void normalize();
    bool operator==(const Labeling& o) const { return cluster == o.cluster; }
};

bool is_feasible(const AssemblyProblem& p, const Labeling& l);

double objective(const AssemblyProblem& p, const Labeling& l);

enum class SolverMode { kExact, kHeuristic, kOracle };

struct SolverConfig {
    SolverMode mode = SolverMode::kExact;
    int exact_node_limit = 12;
    int restarts = 3;
    int move_cap = 10000;
    uint64_t seed = 0;
};

SolverMode solver_mode_from_name(const std::string& name);

Labeling solve(const AssemblyProblem& p, const SolverConfig& cfg);
Labeling solve_oracle(const AssemblyProblem& p);                      // n <= 8
Labeling solve_exact(const AssemblyProblem& p, int node_limit = 12);  // branch and bound
Labeling solve_heuristic(const AssemblyProblem& p, int restarts, int move_cap,
                         uint64_t seed);

// Unary = log-odds of the proposal score, pair cost = log-odds of the
// logistic same-person probability; probabilities clamped to
// [1e-6, 1 - 1e-6] before the logs. `use_segment_features = false` zeroes
// the segment-consistency half of every pair feature.
AssemblyProblem build_problem(const ZoomedRegion& region,
                              const std::vector<JointProposal>& proposals,
                              const LogisticModel& model,
                              const JointPartAssociation& assoc,
                              const PartLabelMap& label_map,
                              bool use_segment_features = true);

std::string problem_to_json(const AssemblyProblem& p);

}  // namespace pw

#endif
