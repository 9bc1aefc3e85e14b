#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ihf/numerics/linalg.hpp"
#include "ihf/rng.hpp"

namespace ihf::envs {

enum class GameId { Wobble, Catch, Maze };

GameId parse_game(std::string_view name);
std::string_view game_name(GameId id);

struct GridPos {
    int x = 0;  // column
    int y = 0;  // row
    auto operator<=>(const GridPos&) const = default;
};

struct ActionId {
    int index = 0;
    auto operator<=>(const ActionId&) const = default;
};

namespace wobble_action {
inline constexpr ActionId Left{0}, Right{1};
}
namespace catch_action {
inline constexpr ActionId Noop{0}, Left{1}, Right{2};
}
namespace maze_action {
inline constexpr ActionId Up{0}, Down{1}, Left{2}, Right{3};
}

struct WobbleState {
    int cursor = 10;
    int target = 10;
    auto operator<=>(const WobbleState&) const = default;
};

struct CatchState {
    GridPos egg;
    int cart_col = 4;
    auto operator<=>(const CatchState&) const = default;
};

struct MazeState {
    GridPos agent;
    auto operator<=>(const MazeState&) const = default;
};

using GameState = std::variant<WobbleState, CatchState, MazeState>;

struct Transition {
    GameState state;
    ActionId action;
    double reward = 0.0;
    GameState next_state;
    bool terminal = false;
    bool operator==(const Transition&) const = default;
};

enum class Outcome { Win, Lose, Timeout };
std::string_view outcome_name(Outcome o);

struct Trajectory {
    std::vector<Transition> transitions;
    Outcome outcome = Outcome::Timeout;
    bool operator==(const Trajectory&) const = default;
};

/// Static maze layout. Walls are stored as a row-major occupancy mask.
struct MazeMap {
    int width = 0;
    int height = 0;
    std::vector<bool> wall;
    GridPos start;
    GridPos target;

    bool in_bounds(GridPos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
    bool is_wall(GridPos p) const { return wall[static_cast<std::size_t>(p.y * width + p.x)]; }
    std::vector<GridPos> walls() const;
    std::string to_text() const;
};

/// Parses the '#', '.', 'S', 'T' text format. Throws std::invalid_argument on
/// ragged rows, unknown characters, missing or duplicate markers, or a target
/// unreachable from the start.
MazeMap load_maze(std::string_view text);
MazeMap load_maze_file(const std::filesystem::path& path);
/// Layout shipped as data/maze_default.txt, compiled in for convenience.
MazeMap default_maze();

inline constexpr int kWobbleBlocks = 20;
inline constexpr int kCatchSize = 10;
inline constexpr int kCatchCartStart = 4;

struct StepLimits {
    int wobble = 50;
    int catch_game = 10;
    int maze = 200;
};

/// One of the three games plus its static configuration. Dynamics are pure:
/// step() depends only on (state, action). The step limit is enforced by
/// whoever runs episodes.
class Game {
public:
    static Game wobble(int max_steps = StepLimits{}.wobble);
    static Game catch_game(int max_steps = StepLimits{}.catch_game);
    static Game maze(MazeMap map, int max_steps = StepLimits{}.maze);
    /// Maze requires a map; throws std::invalid_argument otherwise.
    static Game make(GameId id, std::optional<MazeMap> map = std::nullopt);

    GameId id() const { return id_; }
    int num_actions() const;
    int max_steps() const { return max_steps_; }
    const MazeMap& maze_map() const;

    GameState reset(Rng& rng) const;
    /// Wobble reset with a forced target offset in {-3..-1, 1..3}.
    static WobbleState wobble_reset(int offset);

    /// Throws std::logic_error on a terminal state, std::out_of_range on an
    /// invalid action.
    Transition step(const GameState& state, ActionId action) const;
    bool is_terminal(const GameState& state) const;
    /// Every action that makes optimal progress. Sorted ascending.
    std::vector<ActionId> optimal_actions(const GameState& state) const;
    bool is_optimal(const GameState& state, ActionId action) const;
    /// Lowest-index member of optimal_actions.
    ActionId preferred_action(const GameState& state) const;

    /// Shortest-path distance to the target (Maze only); -1 for walls.
    int maze_distance(GridPos p) const;

    /// Dense indexing of every representable state.
    int state_count() const;
    int state_index(const GameState& state) const;
    GameState state_at(int index) const;
    /// True if the state is representable and legal (Maze: not a wall).
    bool is_valid(const GameState& state) const;

    /// Concatenated one-hot features: Maze cell; Catch egg cell + cart column;
    /// Wobble cursor + target.
    int encoding_size() const;
    num::Vector encode(const GameState& state) const;
    void encode_into(const GameState& state, double* out) const;

    std::string serialize(const GameState& state) const;
    GameState parse_state(std::string_view text) const;

private:
    Game() = default;
    GameId id_ = GameId::Wobble;
    int max_steps_ = 0;
    std::optional<MazeMap> map_;
    std::vector<int> distance_;  // BFS distance to target per maze cell
};

/// Episode runner helper: true if `t` is contiguous with its successor.
bool is_contiguous(const Trajectory& traj);
/// Sum of environmental rewards along a trajectory.
double total_reward(const Trajectory& traj);

}  // namespace ihf::envs
