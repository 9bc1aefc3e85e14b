#include "ihf/records.hpp"

namespace ihf {

void to_json(nlohmann::json& j, const RunRecord& r) {
    j = nlohmann::json{{"game", r.game},
                       {"mode", r.mode},
                       {"subject", r.subject},
                       {"k", r.k},
                       {"seed", r.seed},
                       {"episode_cap", r.episode_cap},
                       {"complete_episode", r.complete_episode},
                       {"converged", r.converged},
                       {"env_steps", r.env_steps},
                       {"queries", r.queries},
                       {"wins", r.wins},
                       {"episode_steps", r.episode_steps},
                       {"success_curve", r.success_curve}};
}

void from_json(const nlohmann::json& j, RunRecord& r) {
    j.at("game").get_to(r.game);
    j.at("mode").get_to(r.mode);
    j.at("subject").get_to(r.subject);
    j.at("k").get_to(r.k);
    j.at("seed").get_to(r.seed);
    j.at("episode_cap").get_to(r.episode_cap);
    j.at("complete_episode").get_to(r.complete_episode);
    j.at("converged").get_to(r.converged);
    j.at("env_steps").get_to(r.env_steps);
    j.at("queries").get_to(r.queries);
    j.at("wins").get_to(r.wins);
    j.at("episode_steps").get_to(r.episode_steps);
    j.at("success_curve").get_to(r.success_curve);
}

std::vector<double> success_curve(const std::vector<int>& wins, int window) {
    std::vector<double> curve;
    curve.reserve(wins.size());
    int in_window = 0;
    for (std::size_t e = 0; e < wins.size(); ++e) {
        in_window += wins[e];
        if (e >= static_cast<std::size_t>(window)) in_window -= wins[e - static_cast<std::size_t>(window)];
        curve.push_back(static_cast<double>(in_window) / window);
    }
    return curve;
}

}  // namespace ihf
