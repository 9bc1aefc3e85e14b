#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ihf {

inline constexpr int kSuccessWindow = 32;

/// Outcome of one agent training run.
struct RunRecord {
    std::string game;
    std::string mode;
    std::string subject;
    int k = 0;  // demonstration count behind the reward model (0 if none)
    std::uint64_t seed = 0;
    int episode_cap = 0;
    std::vector<int> wins;           // 1 per won episode
    std::vector<int> episode_steps;  // environment steps per episode
    std::vector<double> success_curve;
    int complete_episode = 0;  // 1-based; equals episode_cap when censored
    bool converged = false;
    long env_steps = 0;
    long queries = 0;

    bool operator==(const RunRecord&) const = default;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);

/// Fraction of wins over the trailing window ending at each episode. The
/// denominator is always the full window, so values lie in {0, 1/32, ..., 1}.
std::vector<double> success_curve(const std::vector<int>& wins, int window = kSuccessWindow);

}  // namespace ihf
