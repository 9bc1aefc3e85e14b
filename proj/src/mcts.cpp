#include "ihf/mcts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ihf::mcts {

using envs::ActionId;
using envs::Trajectory;

ActionId select_action(const TreeNode& node, double c, Rng& rng) {
    if (node.q.empty()) throw std::invalid_argument("select_action: node has no actions");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double log_total = node.total > 0 ? std::log(static_cast<double>(node.total)) : 0.0;

    double best = -kInf;
    std::vector<int> ties;
    for (std::size_t a = 0; a < node.q.size(); ++a) {
        const double score = node.visits[a] == 0
                                 ? kInf
                                 : node.q[a] + c * std::sqrt(log_total / static_cast<double>(node.visits[a]));
        if (score > best) {
            best = score;
            ties.assign(1, static_cast<int>(a));
        } else if (score == best) {
            ties.push_back(static_cast<int>(a));
        }
    }
    if (ties.size() == 1) return ActionId{ties.front()};
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ActionId{ties[pick(rng)]};
}

TreeNode& NodeStore::node(const std::string& key, int num_actions) {
    auto it = nodes_.find(key);
    if (it == nodes_.end()) it = nodes_.emplace(key, TreeNode(num_actions)).first;
    return it->second;
}

const TreeNode* NodeStore::find(const std::string& key) const {
    auto it = nodes_.find(key);
    return it == nodes_.end() ? nullptr : &it->second;
}

void backup(const Trajectory& traj, const envs::Game& game, NodeStore& store, double gamma) {
    double ret = 0.0;
    for (auto it = traj.transitions.rbegin(); it != traj.transitions.rend(); ++it) {
        ret = it->reward + gamma * ret;
        TreeNode& node = store.node(game.serialize(it->state), game.num_actions());
        const auto a = static_cast<std::size_t>(it->action.index);
        node.visits[a] += 1;
        node.total += 1;
        node.q[a] += (ret - node.q[a]) / static_cast<double>(node.visits[a]);
    }
}

std::vector<Trajectory> generate_trajectories(const envs::Game& game, const MctsConfig& config) {
    NodeStore store;
    return generate_trajectories(game, config, store);
}

std::vector<Trajectory> generate_trajectories(const envs::Game& game, const MctsConfig& config, NodeStore& store) {
    if (config.k < 1) throw std::invalid_argument("mcts: K must be at least 1");
    if (config.c < 0.0) throw std::invalid_argument("mcts: exploration coefficient must be non-negative");
    if (config.gamma < 0.0 || config.gamma > 1.0) throw std::invalid_argument("mcts: gamma must be in [0,1]");

    const int max_steps = config.max_steps > 0 ? config.max_steps : game.max_steps();
    Rng rng = make_rng(config.seed, "mcts");

    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(config.k));
    for (int episode = 0; episode < config.k; ++episode) {
        Trajectory traj;
        // Selection sees the visits of the episode in progress; backup later
        // commits exactly those counts, so the stored tree is unaffected.
        std::unordered_map<std::string, TreeNode> live;
        envs::GameState state = game.reset(rng);
        for (int t = 0; t < max_steps; ++t) {
            const std::string key = game.serialize(state);
            auto it = live.find(key);
            if (it == live.end()) it = live.emplace(key, store.node(key, game.num_actions())).first;
            TreeNode& node = it->second;
            const ActionId action = select_action(node, config.c, rng);
            node.visits[static_cast<std::size_t>(action.index)] += 1;
            node.total += 1;
            traj.transitions.push_back(game.step(state, action));
            state = traj.transitions.back().next_state;
            if (traj.transitions.back().terminal) break;
        }
        const auto& last = traj.transitions.back();
        traj.outcome = !last.terminal ? envs::Outcome::Timeout : last.reward > 0.0 ? envs::Outcome::Win
                                                                                   : envs::Outcome::Lose;
        backup(traj, game, store, config.gamma);
        out.push_back(std::move(traj));
    }
    return out;
}

}  // namespace ihf::mcts
