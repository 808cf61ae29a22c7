#include "pw/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <json.hpp>

namespace pw {

void Labeling::normalize() {
    int max_c = -1;
    for (int c : cluster) max_c = std::max(max_c, c);
    if (max_c < 0) return;
    std::vector<int> remap(static_cast<size_t>(max_c) + 1, -1);
    int next = 0;
    for (int& c : cluster) {
        if (c < 0) continue;
        if (remap[c] < 0) remap[c] = next++;
        c = remap[c];
    }
}

bool is_feasible(const AssemblyProblem& p, const Labeling& l) {
    if (l.cluster.size() != p.nodes.size()) return false;
    std::map<int, std::vector<bool>> seen;  // cluster -> type occupancy
    for (size_t i = 0; i < l.cluster.size(); ++i) {
        const int c = l.cluster[i];
        if (c < 0) continue;
        auto& types = seen.try_emplace(c, std::vector<bool>(kNumJoints, false)).first->second;
        const int t = p.nodes[i].joint_type;
        if (types[t]) return false;
        types[t] = true;
    }
    return true;
}

double objective(const AssemblyProblem& p, const Labeling& l) {
    if (!is_feasible(p, l))
        throw std::invalid_argument("objective: labeling violates invariants");
    double total = 0.0;
    const int n = p.size();
    for (int i = 0; i < n; ++i) {
        if (!l.selected(i)) continue;
        total += p.unary[i];
        for (int j = i + 1; j < n; ++j)
            if (l.cluster[j] == l.cluster[i]) total += p.pair(i, j);
    }
    return total;
}

namespace {

// Shared depth-first enumeration over (unselected | existing cluster | new
// cluster) per node, in node order. Used by both oracle and exact solver;
// the exact solver prunes with an admissible bound.
struct SearchState {
    const AssemblyProblem& p;
    std::vector<int> assignment;            // -1 unselected
    std::vector<std::vector<int>> clusters;  // member indices
    std::vector<double> neg_suffix;          // admissible remainder bound from node i
    double cost = 0.0;
    double best_cost = 0.0;
    std::vector<int> best_assignment;
    bool prune;

    explicit SearchState(const AssemblyProblem& prob, bool use_pruning)
        : p(prob), assignment(prob.size(), -1), prune(use_pruning) {
        const int n = p.size();
        best_assignment.assign(n, -1);
        neg_suffix.assign(n + 1, 0.0);
        for (int i = n - 1; i >= 0; --i) {
            double s = neg_suffix[i + 1] + std::min(0.0, p.unary[i]);
            for (int j = 0; j < i; ++j) s += std::min(0.0, p.pair(j, i));
            neg_suffix[i] = s;
        }
    }

    bool cluster_has_type(const std::vector<int>& members, int type) const {
        for (int m : members)
            if (p.nodes[m].joint_type == type) return true;
        return false;
    }

    void run(int i) {
        const int n = p.size();
        if (i == n) {
            if (cost < best_cost - 1e-15) {
                best_cost = cost;
                best_assignment = assignment;
            }
            return;
        }
        if (prune && cost + neg_suffix[i] >= best_cost - 1e-15) return;

        // unselected
        run(i + 1);

        // join an existing cluster (index, not reference: the recursion can
        // grow `clusters` and reallocate)
        const size_t n_clusters = clusters.size();
        for (size_t c = 0; c < n_clusters; ++c) {
            if (cluster_has_type(clusters[c], p.nodes[i].joint_type)) continue;
            double delta = p.unary[i];
            for (int m : clusters[c]) delta += p.pair(m, i);
            cost += delta;
            assignment[i] = static_cast<int>(c);
            clusters[c].push_back(i);
            run(i + 1);
            clusters[c].pop_back();
            assignment[i] = -1;
            cost -= delta;
        }

        // open a new cluster
        cost += p.unary[i];
        assignment[i] = static_cast<int>(clusters.size());
        clusters.push_back({i});
        run(i + 1);
        clusters.pop_back();
        assignment[i] = -1;
        cost -= p.unary[i];
    }
};

Labeling run_search(const AssemblyProblem& p, bool prune) {
    SearchState state(p, prune);
    state.run(0);
    Labeling l{std::move(state.best_assignment)};
    l.normalize();
    return l;
}

}  // namespace

Labeling solve_oracle(const AssemblyProblem& p) {
    if (p.size() > 8)
        throw CapacityError("solve_oracle: limited to 8 nodes, got " +
                            std::to_string(p.size()));
    return run_search(p, false);
}

Labeling solve_exact(const AssemblyProblem& p, int node_limit) {
    if (p.size() > node_limit)
        throw CapacityError("solve_exact: node limit " + std::to_string(node_limit) +
                            " exceeded by instance of size " + std::to_string(p.size()));
    return run_search(p, true);
}

namespace {

class LocalSearch {
public:
    LocalSearch(const AssemblyProblem& p, int move_cap) : p_(p), move_cap_(move_cap) {}

    // greedy seed: every negative-unary node selected in its own cluster
    Labeling seed() const {
        Labeling l{std::vector<int>(p_.size(), -1)};
        int next = 0;
        for (int i = 0; i < p_.size(); ++i)
            if (p_.unary[i] < 0.0) l.cluster[i] = next++;
        return l;
    }

    // best-improvement descent over {unselect, move/assign, merge};
    // returns the objective of the final labeling given the starting one
    double descend(Labeling& l, double cost) {
        load(l);
        for (int moves = 0; moves < move_cap_; ++moves) {
            const double delta = apply_best_move();
            if (delta >= 0.0) break;
            cost += delta;
        }
        store(l);
        l.normalize();
        return cost;
    }

private:
    struct Move {
        enum Kind { kNone, kUnselect, kAssign, kMerge } kind = kNone;
        int node = -1;
        int cluster = -1;  // assign target (-1 = fresh cluster); merge: dst
        int cluster2 = -1;  // merge: src
        double delta = 0.0;
    };

    // Flat incremental state over a fixed set of n + 1 cluster slots (enough
    // for any partition plus one fresh target). attach_[v * S + c] caches
    // the pair-cost sum between node v and the members of slot c, and
    // merge_[a * S + b] the pair-cost sum between slots a and b, so every
    // candidate move is scored in O(1) during the scan. The diagonal of
    // pair_cost is zero, so a node's own membership never pollutes the sums.
    void load(const Labeling& l) {
        const int n = p_.size();
        S_ = n + 1;
        cl_.assign(l.cluster.begin(), l.cluster.end());
        size_.assign(S_, 0);
        type_mask_.assign(S_, 0u);
        attach_.assign(static_cast<size_t>(n) * S_, 0.0);
        merge_.assign(static_cast<size_t>(S_) * S_, 0.0);
        active_.clear();
        for (int i = 0; i < n; ++i)
            if (cl_[i] >= 0) {
                if (size_[cl_[i]] == 0) active_.push_back(cl_[i]);
                ++size_[cl_[i]];
                type_mask_[cl_[i]] |= 1u << p_.nodes[i].joint_type;
            }
        for (int i = 0; i < n; ++i) {
            if (cl_[i] < 0) continue;
            for (int v = 0; v < n; ++v)
                attach_[static_cast<size_t>(v) * S_ + cl_[i]] += p_.pair(i, v);
        }
        for (int j = 0; j < n; ++j) {
            if (cl_[j] < 0) continue;
            for (int c = 0; c < S_; ++c) {
                if (c == cl_[j] || size_[c] == 0) continue;
                merge_[static_cast<size_t>(c) * S_ + cl_[j]] +=
                    attach_[static_cast<size_t>(j) * S_ + c];
            }
        }
    }

    void store(Labeling& l) const { l.cluster.assign(cl_.begin(), cl_.end()); }

    double attach(int v, int c) const { return attach_[static_cast<size_t>(v) * S_ + c]; }

    // returns the applied move's (negative) delta, or 0.0 at a local optimum
    double apply_best_move() {
        Move best;
        const int n = p_.size();
        const int na = static_cast<int>(active_.size());
        for (int v = 0; v < n; ++v) {
            const int cur = cl_[v];
            const uint32_t bit = 1u << p_.nodes[v].joint_type;
            double detach = 0.0;  // cost currently paid by v where it is
            if (cur >= 0) {
                detach = p_.unary[v] + attach(v, cur);
                consider(best, {Move::kUnselect, v, -1, -1, -detach});
            }
            for (int c : active_) {
                if (c == cur || (type_mask_[c] & bit)) continue;
                consider(best, {Move::kAssign, v, c, -1, p_.unary[v] + attach(v, c) - detach});
            }
            if (cur >= 0 && size_[cur] > 1) {
                // split out into a singleton cluster
                consider(best, {Move::kAssign, v, -1, -1, p_.unary[v] - detach});
            } else if (cur < 0) {
                consider(best, {Move::kAssign, v, -1, -1, p_.unary[v]});
            }
        }
        for (int ai = 0; ai < na; ++ai) {
            const int a = active_[ai];
            for (int bi = ai + 1; bi < na; ++bi) {
                const int b = active_[bi];
                if (type_mask_[a] & type_mask_[b]) continue;
                consider(best, {Move::kMerge, -1, a, b, merge_[static_cast<size_t>(a) * S_ + b]});
            }
        }

        if (best.kind == Move::kNone || best.delta >= -1e-9) return 0.0;
        switch (best.kind) {
            case Move::kUnselect:
                remove_node(best.node);
                break;
            case Move::kAssign: {
                if (cl_[best.node] >= 0) remove_node(best.node);
                int target = best.cluster;
                if (target < 0) target = fresh_cluster();
                add_node(best.node, target);
                break;
            }
            case Move::kMerge:
                merge_clusters(best.cluster, best.cluster2);
                break;
            default:
                return 0.0;
        }
        return best.delta;
    }

    void remove_node(int v) {
        const int c = cl_[v];
        const int n = p_.size();
        for (int d : active_) {
            if (d == c) continue;
            merge_[static_cast<size_t>(c) * S_ + d] -= attach(v, d);
            merge_[static_cast<size_t>(d) * S_ + c] -= attach(v, d);
        }
        for (int u = 0; u < n; ++u)
            attach_[static_cast<size_t>(u) * S_ + c] -= p_.pair(v, u);
        --size_[c];
        if (size_[c] == 0) deactivate(c);
        type_mask_[c] &= ~(1u << p_.nodes[v].joint_type);
        cl_[v] = -1;
    }

    void add_node(int v, int c) {
        const int n = p_.size();
        for (int d : active_) {
            if (d == c) continue;
            merge_[static_cast<size_t>(c) * S_ + d] += attach(v, d);
            merge_[static_cast<size_t>(d) * S_ + c] += attach(v, d);
        }
        for (int u = 0; u < n; ++u)
            attach_[static_cast<size_t>(u) * S_ + c] += p_.pair(v, u);
        if (size_[c] == 0) active_.push_back(c);
        ++size_[c];
        type_mask_[c] |= 1u << p_.nodes[v].joint_type;
        cl_[v] = c;
    }

    void merge_clusters(int a, int b) {
        const int n = p_.size();
        for (int v = 0; v < n; ++v) {
            if (cl_[v] == b) cl_[v] = a;
            attach_[static_cast<size_t>(v) * S_ + a] +=
                attach_[static_cast<size_t>(v) * S_ + b];
            attach_[static_cast<size_t>(v) * S_ + b] = 0.0;
        }
        for (int d : active_) {
            if (d == a || d == b) continue;
            merge_[static_cast<size_t>(a) * S_ + d] += merge_[static_cast<size_t>(b) * S_ + d];
            merge_[static_cast<size_t>(d) * S_ + a] += merge_[static_cast<size_t>(d) * S_ + b];
            merge_[static_cast<size_t>(b) * S_ + d] = 0.0;
            merge_[static_cast<size_t>(d) * S_ + b] = 0.0;
        }
        merge_[static_cast<size_t>(a) * S_ + b] = 0.0;
        merge_[static_cast<size_t>(b) * S_ + a] = 0.0;
        size_[a] += size_[b];
        size_[b] = 0;
        deactivate(b);
        type_mask_[a] |= type_mask_[b];
        type_mask_[b] = 0u;
    }

    void deactivate(int c) {
        const auto it = std::find(active_.begin(), active_.end(), c);
        *it = active_.back();
        active_.pop_back();
    }

    int fresh_cluster() const {
        for (int c = 0; c < S_; ++c)
            if (size_[c] == 0) return c;
        return S_ - 1;  // unreachable: n nodes can occupy at most n slots
    }

    static void consider(Move& best, Move candidate) {
        if (best.kind == Move::kNone || candidate.delta < best.delta) best = candidate;
    }

    const AssemblyProblem& p_;
    int move_cap_;
    int S_ = 0;
    std::vector<int> cl_;
    std::vector<int> size_;
    std::vector<uint32_t> type_mask_;
    std::vector<double> attach_;
    std::vector<double> merge_;
    std::vector<int> active_;  // nonempty cluster slots, unordered
};

// objective over a labeling already known to be feasible
double objective_unchecked(const AssemblyProblem& p, const Labeling& l) {
    double total = 0.0;
    const int n = p.size();
    for (int i = 0; i < n; ++i) {
        if (!l.selected(i)) continue;
        total += p.unary[i];
        for (int j = i + 1; j < n; ++j)
            if (l.cluster[j] == l.cluster[i]) total += p.pair(i, j);
    }
    return total;
}

}  // namespace

Labeling solve_heuristic(const AssemblyProblem& p, int restarts, int move_cap,
                         uint64_t seed) {
    LocalSearch search(p, move_cap);
    Labeling best = search.seed();
    const int n = p.size();
    double seed_cost = 0.0;
    for (int i = 0; i < n; ++i) seed_cost += std::min(0.0, p.unary[i]);
    double best_cost = search.descend(best, seed_cost);

    if (restarts > 0) {
        std::mt19937_64 rng(seed);
        for (int r = 0; r < restarts; ++r) {
            Labeling l = best;
            // perturb: reassign a random third of the nodes, tracked through
            // per-cluster type masks so feasibility stays O(1) per step
            std::vector<uint32_t> masks(static_cast<size_t>(n) + 1, 0u);
            for (int i = 0; i < n; ++i)
                if (l.cluster[i] >= 0) masks[l.cluster[i]] |= 1u << p.nodes[i].joint_type;
            std::uniform_int_distribution<int> pick(0, std::max(0, n - 1));
            std::uniform_int_distribution<int> target(-1, n - 1);
            for (int k = 0; k < std::max(1, n / 3); ++k) {
                if (n == 0) break;
                const int v = pick(rng);
                const uint32_t bit = 1u << p.nodes[v].joint_type;
                if (l.cluster[v] >= 0) masks[l.cluster[v]] &= ~bit;
                l.cluster[v] = -1;
                const int c = target(rng);
                if (c >= 0 && !(masks[c] & bit)) {
                    l.cluster[v] = c;
                    masks[c] |= bit;
                }
            }
            const double cost = search.descend(l, objective_unchecked(p, l));
            if (cost < best_cost - 1e-15) {
                best_cost = cost;
                best = l;
            }
        }
    }
    best.normalize();
    return best;
}

SolverMode solver_mode_from_name(const std::string& name) {
    if (name == "exact") return SolverMode::kExact;
    if (name == "heuristic") return SolverMode::kHeuristic;
    if (name == "oracle") return SolverMode::kOracle;
    throw InputError("unknown solver mode: " + name);
}

Labeling solve(const AssemblyProblem& p, const SolverConfig& cfg) {
    switch (cfg.mode) {
        case SolverMode::kExact:
            return solve_exact(p, cfg.exact_node_limit);
        case SolverMode::kOracle:
            return solve_oracle(p);
        case SolverMode::kHeuristic:
        default:
            return solve_heuristic(p, cfg.restarts, cfg.move_cap, cfg.seed);
    }
}

namespace {

double log_odds(double prob) {
    const double p = std::clamp(prob, 1e-6, 1.0 - 1e-6);
    return std::log((1.0 - p) / p);
}

}  // namespace

AssemblyProblem build_problem(const ZoomedRegion& region,
                              const std::vector<JointProposal>& proposals,
                              const LogisticModel& model,
                              const JointPartAssociation& assoc,
                              const PartLabelMap& label_map,
                              bool use_segment_features) {
    AssemblyProblem p;
    p.nodes = proposals;
    const int n = p.size();
    p.unary.resize(n);
    p.pair_cost.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) p.unary[i] = log_odds(proposals[i].score);

    const PartRegionStats stats = PartRegionStats::from(label_map);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            PairFeature f = make_pair_feature(region, label_map, stats, assoc,
                                              proposals[i], proposals[j]);
            if (!use_segment_features && proposals[i].joint_type != proposals[j].joint_type)
                std::fill(f.begin() + 4, f.end(), 0.0);
            const double prob = pair_probability(model, f, proposals[i].joint_type,
                                                 proposals[j].joint_type);
            const double cost = log_odds(prob);
            p.pair_ref(i, j) = cost;
            p.pair_ref(j, i) = cost;
        }
    }
    return p;
}

std::string problem_to_json(const AssemblyProblem& p) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (int i = 0; i < p.size(); ++i)
        j["nodes"].push_back({{"x", p.nodes[i].location.x},
                              {"y", p.nodes[i].location.y},
                              {"type", p.nodes[i].joint_type},
                              {"score", p.nodes[i].score}});
    j["unary"] = p.unary;
    j["pair_cost"] = nlohmann::json::array();
    for (int i = 0; i < p.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < p.size(); ++k) row.push_back(p.pair(i, k));
        j["pair_cost"].push_back(std::move(row));
    }
    return j.dump(2);
}

}  // namespace pw
