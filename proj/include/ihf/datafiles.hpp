#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ihf/envs.hpp"
#include "ihf/feedback.hpp"

namespace ihf::datafiles {

/// Line-delimited text files shared by the CLI stages. Line 1 is
/// "# <kind> <json header>"; every other line is one tab-separated record.
/// Reals are printed with 17 significant digits so they round-trip.
///
///   trajectories: traj  state  action  reward  next_state  terminal  outcome
///   labels:       traj  state  action  errp
///   transitions:  state  action  reward  next_state  terminal
///
/// States use Game::serialize. The trajectory header must carry "game" and,
/// for mazes, the "map" text, so a file can be read without other context.
struct Header {
    std::string kind;
    nlohmann::json fields;
};

void write_trajectories(const std::filesystem::path& path, const envs::Game& game,
                        const std::vector<envs::Trajectory>& trajs, const nlohmann::json& header);
std::vector<envs::Trajectory> read_trajectories(const std::filesystem::path& path, const envs::Game& game,
                                                Header* header = nullptr);

void write_labels(const std::filesystem::path& path, const envs::Game& game, const feedback::LabeledDataset& data,
                  const nlohmann::json& header);
feedback::LabeledDataset read_labels(const std::filesystem::path& path, const envs::Game& game,
                                     Header* header = nullptr);

void write_transitions(const std::filesystem::path& path, const envs::Game& game,
                       const std::vector<envs::Transition>& transitions, const nlohmann::json& header);
std::vector<envs::Transition> read_transitions(const std::filesystem::path& path, const envs::Game& game,
                                               Header* header = nullptr);

/// Header of any of the three file kinds.
Header read_header(const std::filesystem::path& path);

/// Rebuilds the game described by a header's "game" / "map" fields.
envs::Game game_from_header(const nlohmann::json& fields);
/// Header fields describing `game` (map text included for mazes).
nlohmann::json game_fields(const envs::Game& game);

}  // namespace ihf::datafiles
