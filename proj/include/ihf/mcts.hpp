#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ihf/envs.hpp"
#include "ihf/rng.hpp"

namespace ihf::mcts {

/// Per-state statistics. Invariant: total == sum(visits).
struct TreeNode {
    std::vector<double> q;
    std::vector<long> visits;
    long total = 0;

    explicit TreeNode(int num_actions = 0)
        : q(static_cast<std::size_t>(num_actions), 0.0), visits(static_cast<std::size_t>(num_actions), 0) {}
};

struct MctsConfig {
    double c = 0.5;
    double gamma = 0.9;
    int k = 20;
    int max_steps = 0;  // 0: the game's own step limit
    std::uint64_t seed = 0;
};

/// argmax_a Q(s,a) + c*sqrt(log N(s) / N(s,a)). Unvisited actions score +inf.
/// Ties are broken uniformly at random.
envs::ActionId select_action(const TreeNode& node, double c, Rng& rng);

/// Full-tree node store keyed by the canonical serialized state.
class NodeStore {
public:
    TreeNode& node(const std::string& key, int num_actions);
    const TreeNode* find(const std::string& key) const;
    std::size_t size() const { return nodes_.size(); }
    const std::unordered_map<std::string, TreeNode>& nodes() const { return nodes_; }

private:
    std::unordered_map<std::string, TreeNode> nodes_;
};

/// Walks the trajectory backwards computing G_t = r_t + gamma * G_{t+1}
/// (zero past the end) and folds each G_t into Q(s_t, a_t) as a running mean.
void backup(const envs::Trajectory& traj, const envs::Game& game, NodeStore& store, double gamma);

/// Runs config.k select/step/backup episodes on a single growing tree and
/// returns the trajectories in generation order. Selection also counts the
/// visits already made in the current episode; Q changes only in backup.
std::vector<envs::Trajectory> generate_trajectories(const envs::Game& game, const MctsConfig& config);

/// Same, but also exposes the final tree.
std::vector<envs::Trajectory> generate_trajectories(const envs::Game& game, const MctsConfig& config,
                                                    NodeStore& store);

}  // namespace ihf::mcts
