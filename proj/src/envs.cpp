#include "ihf/envs.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ihf::envs {

namespace {

constexpr std::string_view kDefaultMaze =
    "##########\n"
    "#S...#...#\n"
    "#.##.#.#.#\n"
    "#.#..#.#.#\n"
    "#.#.##.#.#\n"
    "#...#..#.#\n"
    "###.#.##.#\n"
    "#.....#..#\n"
    "#.###...T#\n"
    "##########\n";

constexpr std::array<GridPos, 4> kMazeMoves = {GridPos{0, -1}, GridPos{0, 1}, GridPos{-1, 0}, GridPos{1, 0}};

std::vector<int> bfs_from(const MazeMap& map, GridPos source) {
    std::vector<int> dist(static_cast<std::size_t>(map.width * map.height), -1);
    auto idx = [&](GridPos p) { return static_cast<std::size_t>(p.y * map.width + p.x); };
    std::deque<GridPos> queue{source};
    dist[idx(source)] = 0;
    while (!queue.empty()) {
        const GridPos p = queue.front();
        queue.pop_front();
        for (const GridPos d : kMazeMoves) {
            const GridPos n{p.x + d.x, p.y + d.y};
            if (!map.in_bounds(n) || map.is_wall(n) || dist[idx(n)] >= 0) continue;
            dist[idx(n)] = dist[idx(p)] + 1;
            queue.push_back(n);
        }
    }
    return dist;
}

std::vector<int> parse_ints(std::string_view text, std::size_t expected) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        int v = 0;
        const auto* first = text.data() + pos;
        const auto* last = text.data() + comma;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) throw std::invalid_argument("malformed state '" + std::string(text) + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    if (out.size() != expected) throw std::invalid_argument("malformed state '" + std::string(text) + "'");
    return out;
}

}  // namespace

GameId parse_game(std::string_view name) {
    if (name == "wobble") return GameId::Wobble;
    if (name == "catch") return GameId::Catch;
    if (name == "maze") return GameId::Maze;
    throw std::invalid_argument("unknown game '" + std::string(name) + "'");
}

std::string_view game_name(GameId id) {
    switch (id) {
        case GameId::Wobble: return "wobble";
        case GameId::Catch: return "catch";
        case GameId::Maze: return "maze";
    }
    return "?";
}

std::string_view outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Win: return "win";
        case Outcome::Lose: return "lose";
        case Outcome::Timeout: return "timeout";
    }
    return "?";
}

std::vector<GridPos> MazeMap::walls() const {
    std::vector<GridPos> out;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (is_wall({x, y})) out.push_back({x, y});
    return out;
}

std::string MazeMap::to_text() const {
    std::string out;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const GridPos p{x, y};
            out += p == start ? 'S' : p == target ? 'T' : is_wall(p) ? '#' : '.';
        }
        out += '\n';
    }
    return out;
}

MazeMap load_maze(std::string_view text) {
    std::vector<std::string> rows;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("maze: empty map");

    MazeMap map;
    map.height = static_cast<int>(rows.size());
    map.width = static_cast<int>(rows.front().size());
    map.wall.assign(static_cast<std::size_t>(map.width * map.height), false);
    int starts = 0, targets = 0;
    for (int y = 0; y < map.height; ++y) {
        if (static_cast<int>(rows[static_cast<std::size_t>(y)].size()) != map.width)
            throw std::invalid_argument("maze: row " + std::to_string(y) + " has a different width");
        for (int x = 0; x < map.width; ++x) {
            switch (rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]) {
                case '#': map.wall[static_cast<std::size_t>(y * map.width + x)] = true; break;
                case '.': break;
                case 'S': map.start = {x, y}; ++starts; break;
                case 'T': map.target = {x, y}; ++targets; break;
                default:
                    throw std::invalid_argument("maze: unexpected character at row " + std::to_string(y) +
                                                ", column " + std::to_string(x));
            }
        }
    }
    if (starts != 1) throw std::invalid_argument("maze: expected exactly one start marker 'S'");
    if (targets != 1) throw std::invalid_argument("maze: expected exactly one target marker 'T'");

    const auto dist = bfs_from(map, map.target);
    if (dist[static_cast<std::size_t>(map.start.y * map.width + map.start.x)] < 0)
        throw std::invalid_argument("maze: target is unreachable from start");
    return map;
}

MazeMap load_maze_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("maze: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load_maze(ss.str());
}

MazeMap default_maze() { return load_maze(kDefaultMaze); }

Game Game::wobble(int max_steps) {
    Game g;
    g.id_ = GameId::Wobble;
    g.max_steps_ = max_steps;
    return g;
}

Game Game::catch_game(int max_steps) {
    Game g;
    g.id_ = GameId::Catch;
    g.max_steps_ = max_steps;
    return g;
}

Game Game::maze(MazeMap map, int max_steps) {
    Game g;
    g.id_ = GameId::Maze;
    g.max_steps_ = max_steps;
    g.distance_ = bfs_from(map, map.target);
    g.map_ = std::move(map);
    return g;
}

Game Game::make(GameId id, std::optional<MazeMap> map) {
    switch (id) {
        case GameId::Wobble: return wobble();
        case GameId::Catch: return catch_game();
        case GameId::Maze:
            if (!map) throw std::invalid_argument("maze game requires a loaded map");
            return maze(std::move(*map));
    }
    throw std::invalid_argument("unknown game id");
}

int Game::num_actions() const {
    switch (id_) {
        case GameId::Wobble: return 2;
        case GameId::Catch: return 3;
        case GameId::Maze: return 4;
    }
    return 0;
}

const MazeMap& Game::maze_map() const {
    if (!map_) throw std::logic_error("game has no maze map");
    return *map_;
}

WobbleState Game::wobble_reset(int offset) {
    if (offset == 0 || offset < -3 || offset > 3) throw std::invalid_argument("wobble: target offset must be in +-1..3");
    return WobbleState{kWobbleBlocks / 2, kWobbleBlocks / 2 + offset};
}

GameState Game::reset(Rng& rng) const {
    switch (id_) {
        case GameId::Wobble: {
            static constexpr std::array<int, 6> kOffsets = {-3, -2, -1, 1, 2, 3};
            std::uniform_int_distribution<int> pick(0, 5);
            return wobble_reset(kOffsets[static_cast<std::size_t>(pick(rng))]);
        }
        case GameId::Catch: {
            std::uniform_int_distribution<int> col(0, kCatchSize - 1);
            return CatchState{GridPos{col(rng), 0}, kCatchCartStart};
        }
        case GameId::Maze:
            return MazeState{maze_map().start};
    }
    throw std::logic_error("unreachable");
}

bool Game::is_terminal(const GameState& state) const {
    if (const auto* w = std::get_if<WobbleState>(&state)) return w->cursor == w->target;
    if (const auto* c = std::get_if<CatchState>(&state)) return c->egg.y >= kCatchSize - 1;
    return std::get<MazeState>(state).agent == maze_map().target;
}

Transition Game::step(const GameState& state, ActionId action) const {
    if (action.index < 0 || action.index >= num_actions())
        throw std::out_of_range("step: action " + std::to_string(action.index) + " out of range");
    if (is_terminal(state)) throw std::logic_error("step: state is terminal");

    Transition t{state, action, 0.0, state, false};
    switch (id_) {
        case GameId::Wobble: {
            auto s = std::get<WobbleState>(state);
            s.cursor = std::clamp(s.cursor + (action == wobble_action::Right ? 1 : -1), 0, kWobbleBlocks - 1);
            t.next_state = s;
            t.terminal = s.cursor == s.target;
            t.reward = t.terminal ? 1.0 : 0.0;
            break;
        }
        case GameId::Catch: {
            auto s = std::get<CatchState>(state);
            const int dx = action == catch_action::Right ? 1 : action == catch_action::Left ? -1 : 0;
            s.cart_col = std::clamp(s.cart_col + dx, 0, kCatchSize - 1);
            s.egg.y += 1;
            t.next_state = s;
            t.terminal = s.egg.y >= kCatchSize - 1;
            t.reward = t.terminal && s.cart_col == s.egg.x ? 1.0 : 0.0;
            break;
        }
        case GameId::Maze: {
            auto s = std::get<MazeState>(state);
            const GridPos d = kMazeMoves[static_cast<std::size_t>(action.index)];
            const GridPos n{s.agent.x + d.x, s.agent.y + d.y};
            const MazeMap& map = maze_map();
            if (map.in_bounds(n) && !map.is_wall(n)) s.agent = n;
            t.next_state = s;
            t.terminal = s.agent == map.target;
            t.reward = t.terminal ? 1.0 : 0.0;
            break;
        }
    }
    return t;
}

std::vector<ActionId> Game::optimal_actions(const GameState& state) const {
    if (is_terminal(state)) throw std::logic_error("optimal_actions: state is terminal");
    switch (id_) {
        case GameId::Wobble: {
            const auto& s = std::get<WobbleState>(state);
            return {s.target > s.cursor ? wobble_action::Right : wobble_action::Left};
        }
        case GameId::Catch: {
            const auto& s = std::get<CatchState>(state);
            if (s.egg.x > s.cart_col) return {catch_action::Right};
            if (s.egg.x < s.cart_col) return {catch_action::Left};
            return {catch_action::Noop};
        }
        case GameId::Maze: {
            const auto& s = std::get<MazeState>(state);
            const int here = maze_distance(s.agent);
            std::vector<ActionId> out;
            for (int a = 0; a < 4; ++a) {
                const GridPos d = kMazeMoves[static_cast<std::size_t>(a)];
                const GridPos n{s.agent.x + d.x, s.agent.y + d.y};
                if (!maze_map().in_bounds(n)) continue;
                if (maze_distance(n) == here - 1) out.push_back(ActionId{a});
            }
            return out;
        }
    }
    return {};
}

bool Game::is_optimal(const GameState& state, ActionId action) const {
    const auto opt = optimal_actions(state);
    return std::find(opt.begin(), opt.end(), action) != opt.end();
}

ActionId Game::preferred_action(const GameState& state) const {
    const auto opt = optimal_actions(state);
    if (opt.empty()) throw std::logic_error("preferred_action: no progress move exists");
    return opt.front();
}

int Game::maze_distance(GridPos p) const {
    const MazeMap& map = maze_map();
    if (!map.in_bounds(p)) return -1;
    return distance_[static_cast<std::size_t>(p.y * map.width + p.x)];
}

int Game::state_count() const {
    switch (id_) {
        case GameId::Wobble: return kWobbleBlocks * kWobbleBlocks;
        case GameId::Catch: return kCatchSize * kCatchSize * kCatchSize;
        case GameId::Maze: return maze_map().width * maze_map().height;
    }
    return 0;
}

int Game::state_index(const GameState& state) const {
    if (const auto* w = std::get_if<WobbleState>(&state)) return w->cursor * kWobbleBlocks + w->target;
    if (const auto* c = std::get_if<CatchState>(&state))
        return (c->egg.y * kCatchSize + c->egg.x) * kCatchSize + c->cart_col;
    const auto& m = std::get<MazeState>(state);
    return m.agent.y * maze_map().width + m.agent.x;
}

GameState Game::state_at(int index) const {
    if (index < 0 || index >= state_count()) throw std::out_of_range("state_at: index out of range");
    switch (id_) {
        case GameId::Wobble: return WobbleState{index / kWobbleBlocks, index % kWobbleBlocks};
        case GameId::Catch: {
            const int cart = index % kCatchSize;
            const int cell = index / kCatchSize;
            return CatchState{GridPos{cell % kCatchSize, cell / kCatchSize}, cart};
        }
        case GameId::Maze: {
            const int w = maze_map().width;
            return MazeState{GridPos{index % w, index / w}};
        }
    }
    throw std::logic_error("unreachable");
}

bool Game::is_valid(const GameState& state) const {
    switch (id_) {
        case GameId::Wobble: {
            const auto* s = std::get_if<WobbleState>(&state);
            return s && s->cursor >= 0 && s->cursor < kWobbleBlocks && s->target >= 0 && s->target < kWobbleBlocks;
        }
        case GameId::Catch: {
            const auto* s = std::get_if<CatchState>(&state);
            return s && s->egg.x >= 0 && s->egg.x < kCatchSize && s->egg.y >= 0 && s->egg.y < kCatchSize &&
                   s->cart_col >= 0 && s->cart_col < kCatchSize;
        }
        case GameId::Maze: {
            const auto* s = std::get_if<MazeState>(&state);
            return s && maze_map().in_bounds(s->agent) && !maze_map().is_wall(s->agent);
        }
    }
    return false;
}

int Game::encoding_size() const {
    switch (id_) {
        case GameId::Wobble: return 2 * kWobbleBlocks;
        case GameId::Catch: return kCatchSize * kCatchSize + kCatchSize;
        case GameId::Maze: return maze_map().width * maze_map().height;
    }
    return 0;
}

void Game::encode_into(const GameState& state, double* out) const {
    std::fill(out, out + encoding_size(), 0.0);
    if (const auto* w = std::get_if<WobbleState>(&state)) {
        out[w->cursor] = 1.0;
        out[kWobbleBlocks + w->target] = 1.0;
    } else if (const auto* c = std::get_if<CatchState>(&state)) {
        out[c->egg.y * kCatchSize + c->egg.x] = 1.0;
        out[kCatchSize * kCatchSize + c->cart_col] = 1.0;
    } else {
        const auto& m = std::get<MazeState>(state);
        out[m.agent.y * maze_map().width + m.agent.x] = 1.0;
    }
}

num::Vector Game::encode(const GameState& state) const {
    num::Vector v(encoding_size());
    encode_into(state, v.data());
    return v;
}

std::string Game::serialize(const GameState& state) const {
    if (const auto* w = std::get_if<WobbleState>(&state))
        return std::to_string(w->cursor) + "," + std::to_string(w->target);
    if (const auto* c = std::get_if<CatchState>(&state))
        return std::to_string(c->egg.x) + "," + std::to_string(c->egg.y) + "," + std::to_string(c->cart_col);
    const auto& m = std::get<MazeState>(state);
    return std::to_string(m.agent.x) + "," + std::to_string(m.agent.y);
}

GameState Game::parse_state(std::string_view text) const {
    GameState s;
    switch (id_) {
        case GameId::Wobble: {
            const auto v = parse_ints(text, 2);
            s = WobbleState{v[0], v[1]};
            break;
        }
        case GameId::Catch: {
            const auto v = parse_ints(text, 3);
            s = CatchState{GridPos{v[0], v[1]}, v[2]};
            break;
        }
        case GameId::Maze: {
            const auto v = parse_ints(text, 2);
            s = MazeState{GridPos{v[0], v[1]}};
            break;
        }
    }
    if (!is_valid(s)) throw std::invalid_argument("state '" + std::string(text) + "' is not valid for this game");
    return s;
}

bool is_contiguous(const Trajectory& traj) {
    for (std::size_t i = 0; i + 1 < traj.transitions.size(); ++i)
        if (traj.transitions[i].next_state != traj.transitions[i + 1].state) return false;
    return true;
}

double total_reward(const Trajectory& traj) {
    double r = 0.0;
    for (const auto& t : traj.transitions) r += t.reward;
    return r;
}

}  // namespace ihf::envs
