#include <doctest.h>

#include <cmath>
#include <set>

#include "ihf/mcts.hpp"

using namespace ihf;
using namespace ihf::envs;

namespace {

mcts::TreeNode node_of(std::vector<double> q, std::vector<long> n) {
    mcts::TreeNode node(static_cast<int>(q.size()));
    node.q = std::move(q);
    node.visits = std::move(n);
    for (long v : node.visits) node.total += v;
    return node;
}

Trajectory walk(const Game& game, GameState s, const std::vector<ActionId>& actions) {
    Trajectory t;
    for (ActionId a : actions) {
        t.transitions.push_back(game.step(s, a));
        s = t.transitions.back().next_state;
    }
    t.outcome = game.is_terminal(s) ? Outcome::Win : Outcome::Timeout;
    return t;
}

}  // namespace

TEST_CASE("select_action: UCB scores") {
    Rng rng = make_rng(0);
    // 0.5 + 0.5*sqrt(ln 4 / 1) = 1.0887 against 0.5 + 0.5*sqrt(ln 4 / 3) = 0.8399
    CHECK(0.5 + 0.5 * std::sqrt(std::log(4.0)) == doctest::Approx(1.0887).epsilon(1e-4));
    CHECK(0.5 + 0.5 * std::sqrt(std::log(4.0) / 3) == doctest::Approx(0.8399).epsilon(1e-4));
    CHECK(mcts::select_action(node_of({0.5, 0.5}, {1, 3}), 0.5, rng).index == 0);
    CHECK(mcts::select_action(node_of({0.9, 0.1, 0.9}, {4, 0, 2}), 0.5, rng).index == 1);
    CHECK(mcts::select_action(node_of({0.2, 0.7}, {3, 5}), 0.0, rng).index == 1);
}

TEST_CASE("select_action: ties are broken at random") {
    Rng rng = make_rng(1);
    std::set<int> picked;
    const auto fresh = node_of({0, 0, 0, 0}, {0, 0, 0, 0});
    for (int i = 0; i < 200; ++i) picked.insert(mcts::select_action(fresh, 0.5, rng).index);
    CHECK(picked.size() == 4);
}

TEST_CASE("backup: hand-unrolled returns") {
    const auto game = Game::maze(load_maze("S..T\n"));
    const auto win = walk(game, MazeState{{0, 0}}, {maze_action::Right, maze_action::Right, maze_action::Right});
    mcts::NodeStore store;
    mcts::backup(win, game, store, 0.9);
    const int right = maze_action::Right.index;
    CHECK(store.find("0,0")->q[right] == doctest::Approx(0.81).epsilon(1e-15));
    CHECK(store.find("1,0")->q[right] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(store.find("2,0")->q[right] == doctest::Approx(1.0).epsilon(1e-15));

    mcts::backup(win, game, store, 0.9);
    CHECK(store.find("0,0")->q[right] == doctest::Approx(0.81).epsilon(1e-15));
    CHECK(store.find("0,0")->visits[right] == 2);
    CHECK(store.find("0,0")->total == 2);

    mcts::NodeStore lose_store;
    const auto lose = walk(game, MazeState{{0, 0}}, {maze_action::Left, maze_action::Up});
    mcts::backup(lose, game, lose_store, 0.9);
    CHECK(lose_store.find("0,0")->q == std::vector<double>(4, 0.0));
    CHECK(lose_store.find("0,0")->total == 2);
}

TEST_CASE("generate_trajectories: count, completeness, determinism, tree invariants") {
    const auto wobble = Game::wobble();
    mcts::MctsConfig one{0.5, 0.9, 1, 0, 4};
    const auto w = mcts::generate_trajectories(wobble, one);
    REQUIRE(w.size() == 1);
    CHECK((w[0].outcome == Outcome::Win || w[0].outcome == Outcome::Timeout));

    const auto game = Game::maze(default_maze());
    mcts::MctsConfig cfg{0.5, 0.9, 20, 0, 7};
    mcts::NodeStore store;
    const auto a = mcts::generate_trajectories(game, cfg, store);
    CHECK(a == mcts::generate_trajectories(game, cfg));
    REQUIRE(a.size() == 20);
    for (const auto& t : a) {
        CHECK(is_contiguous(t));
        CHECK(static_cast<int>(t.transitions.size()) <= game.max_steps());
        CHECK((total_reward(t) == 0.0 || total_reward(t) == 1.0));
    }
    for (const auto& [key, node] : store.nodes()) {
        long sum = 0;
        for (long v : node.visits) sum += v;
        CHECK(node.total == sum);
        for (double q : node.q) CHECK((q >= 0.0 && q <= 1.0));
    }
}

TEST_CASE("generate_trajectories: later demonstrations get shorter on the default maze") {
    const auto game = Game::maze(default_maze());
    double first = 0.0, later = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto trajs = mcts::generate_trajectories(game, mcts::MctsConfig{0.5, 0.9, 20, 0, seed});
        for (std::size_t i = 0; i < trajs.size(); ++i)
            (i < 5 ? first : later) += static_cast<double>(trajs[i].transitions.size()) / (i < 5 ? 5.0 : 15.0);
    }
    CHECK(later <= first);
}

TEST_CASE("generate_trajectories: larger c visits more distinct states") {
    const auto game = Game::maze(default_maze());
    std::size_t wide = 0, greedy = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        mcts::NodeStore s10, s0;
        mcts::generate_trajectories(game, mcts::MctsConfig{10.0, 0.9, 10, 0, seed}, s10);
        mcts::generate_trajectories(game, mcts::MctsConfig{0.0, 0.9, 10, 0, seed}, s0);
        wide += s10.size();
        greedy += s0.size();
    }
    CHECK(wide > greedy);
}
