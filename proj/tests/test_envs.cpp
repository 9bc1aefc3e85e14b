#include <doctest.h>

#include <deque>
#include <set>

#include "ihf/envs.hpp"

using namespace ihf;
using namespace ihf::envs;

namespace {

std::string empty_maze_text(int w, int h, GridPos s, GridPos t) {
    std::string out;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out += (GridPos{x, y} == s) ? 'S' : (GridPos{x, y} == t) ? 'T' : '.';
        out += '\n';
    }
    return out;
}

// Plain BFS from the target over free cells; -1 marks walls and unreachable cells.
std::vector<int> bfs_from(const MazeMap& m, GridPos from) {
    std::vector<int> d(static_cast<std::size_t>(m.width * m.height), -1);
    std::deque<GridPos> q{from};
    d[static_cast<std::size_t>(from.y * m.width + from.x)] = 0;
    while (!q.empty()) {
        const GridPos p = q.front();
        q.pop_front();
        for (auto [dx, dy] : {std::pair{0, -1}, {0, 1}, {-1, 0}, {1, 0}}) {
            const GridPos n{p.x + dx, p.y + dy};
            if (!m.in_bounds(n) || m.is_wall(n)) continue;
            auto& dn = d[static_cast<std::size_t>(n.y * m.width + n.x)];
            if (dn >= 0) continue;
            dn = d[static_cast<std::size_t>(p.y * m.width + p.x)] + 1;
            q.push_back(n);
        }
    }
    return d;
}

std::string random_maze_text(Rng& rng, int n) {
    while (true) {
        std::string text;
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                if (x == 0 && y == 0) text += 'S';
                else if (x == n - 1 && y == n - 1) text += 'T';
                else text += bernoulli(rng, 0.3) ? '#' : '.';
            }
            text += '\n';
        }
        try {
            load_maze(text);
            return text;
        } catch (const std::invalid_argument&) {
        }
    }
}

const GridPos kDelta[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};

}  // namespace

TEST_CASE("reset") {
    CHECK(Game::wobble_reset(2) == WobbleState{10, 12});
    CHECK_THROWS(Game::wobble_reset(0));
    Rng rng = make_rng(1);
    const auto c = Game::catch_game();
    for (int i = 0; i < 20; ++i) {
        const auto s = std::get<CatchState>(c.reset(rng));
        CHECK(s.egg.y == 0);
        CHECK(s.cart_col == kCatchCartStart);
    }
    const auto m = Game::maze(default_maze());
    CHECK(std::get<MazeState>(m.reset(rng)).agent == default_maze().start);
}

TEST_CASE("step: wobble, maze win, wall bump, terminal error") {
    const auto w = Game::wobble();
    const auto t = w.step(WobbleState{10, 12}, wobble_action::Right);
    CHECK(std::get<WobbleState>(t.next_state) == WobbleState{11, 12});
    CHECK_FALSE(t.terminal);
    CHECK(t.reward == 0.0);
    CHECK(std::get<WobbleState>(w.step(WobbleState{0, 5}, wobble_action::Left).next_state).cursor == 0);

    const auto m = Game::maze(load_maze("S.T\n"));
    const auto win = m.step(MazeState{{1, 0}}, maze_action::Right);
    CHECK(win.terminal);
    CHECK(win.reward == 1.0);
    const auto bump = m.step(MazeState{{0, 0}}, maze_action::Up);
    CHECK(bump.next_state == GameState{MazeState{{0, 0}}});
    CHECK(bump.reward == 0.0);
    CHECK_FALSE(bump.terminal);
    CHECK_THROWS_AS(m.step(MazeState{{2, 0}}, maze_action::Left), std::logic_error);
    CHECK_THROWS_AS(m.step(MazeState{{0, 0}}, ActionId{7}), std::out_of_range);
}

TEST_CASE("catch dynamics and reward timing") {
    const auto c = Game::catch_game();
    CatchState s{{4, 8}, 3};
    const auto t = c.step(s, catch_action::Right);
    CHECK(t.terminal);
    CHECK(t.reward == 1.0);
    const auto miss = c.step(CatchState{{4, 8}, 3}, catch_action::Noop);
    CHECK(miss.terminal);
    CHECK(miss.reward == 0.0);
    const auto clamp = c.step(CatchState{{2, 0}, 9}, catch_action::Right);
    CHECK(std::get<CatchState>(clamp.next_state).cart_col == 9);
    CHECK(std::get<CatchState>(clamp.next_state).egg.y == 1);
}

TEST_CASE("optimal_actions") {
    CHECK(Game::wobble().optimal_actions(WobbleState{10, 12}) == std::vector{wobble_action::Right});
    CHECK(Game::catch_game().optimal_actions(CatchState{{4, 3}, 4}) == std::vector{catch_action::Noop});
    CHECK(Game::catch_game().optimal_actions(CatchState{{1, 3}, 4}) == std::vector{catch_action::Left});
    const auto m = Game::maze(load_maze(empty_maze_text(10, 10, {0, 0}, {9, 9})));
    CHECK(m.optimal_actions(MazeState{{0, 0}}) == std::vector{maze_action::Down, maze_action::Right});
    CHECK(m.preferred_action(MazeState{{0, 0}}) == maze_action::Down);
}

TEST_CASE("load_maze") {
    const auto m = load_maze(empty_maze_text(3, 3, {0, 0}, {2, 2}));
    CHECK(m.walls().empty());
    CHECK(m.width == 3);
    CHECK(m.target == GridPos{2, 2});
    CHECK_THROWS_AS(load_maze("S..\n.#.\n#T#\n"), std::invalid_argument);   // target boxed in
    CHECK_THROWS_AS(load_maze("S..\n..\n..T\n"), std::invalid_argument);    // ragged
    CHECK_THROWS_AS(load_maze("S.S\n..T\n"), std::invalid_argument);        // duplicate start
    CHECK_THROWS_AS(load_maze("...\n..T\n"), std::invalid_argument);        // missing start
    CHECK_THROWS_AS(load_maze("S.x\n..T\n"), std::invalid_argument);        // unknown char
    CHECK(load_maze(m.to_text()).wall == m.wall);
}

TEST_CASE("default maze fixture") {
    const auto map = default_maze();
    CHECK(load_maze_file(IHF_DATA_DIR "/maze_default.txt").to_text() == map.to_text());
    CHECK(map.width == 10);
    CHECK(map.height == 10);
    const auto game = Game::maze(map);
    CHECK(game.maze_distance(map.start) == 14);
    const auto d = bfs_from(map, map.target);
    CHECK(d[static_cast<std::size_t>(map.start.y * map.width + map.start.x)] == 14);
    CHECK(std::count_if(d.begin(), d.end(), [](int v) { return v >= 0; }) == 41);
}

TEST_CASE("optimal_actions agrees with BFS on random 6x6 mazes") {
    Rng rng = make_rng(11, "mazes");
    for (int trial = 0; trial < 5; ++trial) {
        const auto map = load_maze(random_maze_text(rng, 6));
        const auto game = Game::maze(map);
        const auto dist = bfs_from(map, map.target);
        for (int y = 0; y < 6; ++y) {
            for (int x = 0; x < 6; ++x) {
                const GridPos p{x, y};
                const int dp = dist[static_cast<std::size_t>(y * 6 + x)];
                if (map.is_wall(p) || p == map.target || dp < 0) continue;
                CHECK(game.maze_distance(p) == dp);
                std::vector<ActionId> expect;
                for (int a = 0; a < 4; ++a) {
                    const GridPos n{p.x + kDelta[a].x, p.y + kDelta[a].y};
                    if (map.in_bounds(n) && !map.is_wall(n) && dist[static_cast<std::size_t>(n.y * 6 + n.x)] == dp - 1)
                        expect.push_back(ActionId{a});
                }
                CHECK(game.optimal_actions(MazeState{p}) == expect);

                // Following the oracle reaches the target in exactly dp steps.
                GameState s = MazeState{p};
                int steps = 0;
                while (!game.is_terminal(s) && steps <= dp) {
                    s = game.step(s, game.preferred_action(s)).next_state;
                    ++steps;
                }
                CHECK(steps == dp);
                CHECK(game.is_terminal(s));
            }
        }
    }
}

TEST_CASE("determinism, sparse reward, state indexing and encoding") {
    const auto game = Game::maze(default_maze());
    Rng rng = make_rng(3);
    std::uniform_int_distribution<int> act(0, 3);
    GameState s = game.reset(rng);
    double total = 0.0;
    for (int t = 0; t < game.max_steps() && !game.is_terminal(s); ++t) {
        const ActionId a{act(rng)};
        const auto t1 = game.step(s, a);
        CHECK(t1 == game.step(s, a));
        total += t1.reward;
        s = t1.next_state;
    }
    CHECK((total == 0.0 || total == 1.0));

    for (const auto& g : {Game::wobble(), Game::catch_game(), game}) {
        std::set<std::string> seen;
        for (int i = 0; i < g.state_count(); ++i) {
            const auto st = g.state_at(i);
            CHECK(g.state_index(st) == i);
            seen.insert(g.serialize(st));
            if (!g.is_valid(st)) {  // maze walls are indexed but never parsed
                CHECK_THROWS(g.parse_state(g.serialize(st)));
                continue;
            }
            CHECK(g.parse_state(g.serialize(st)) == st);
            const auto e = g.encode(st);
            CHECK(e.size() == g.encoding_size());
            CHECK(e.sum() == doctest::Approx(g.id() == GameId::Maze ? 1.0 : 2.0));
        }
        CHECK(static_cast<int>(seen.size()) == g.state_count());
    }
    CHECK(game.serialize(MazeState{{3, 5}}) == "3,5");
}
