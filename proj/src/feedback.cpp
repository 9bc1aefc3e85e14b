#include "ihf/feedback.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ihf::feedback {

using envs::ActionId;
using envs::Game;
using envs::GameState;

SubjectProfile SubjectProfile::from_accuracy(std::string id, double accuracy) {
    SubjectProfile p{std::move(id), accuracy, accuracy};
    p.validate();
    return p;
}

void SubjectProfile::validate() const {
    if (!(sens >= 0.0 && sens <= 1.0) || !(spec >= 0.0 && spec <= 1.0))
        throw std::invalid_argument("subject profile '" + id + "': sens and spec must lie in [0,1]");
}

std::vector<SubjectProfile> builtin_profiles() {
    return {
        {"01", 0.80, 0.80}, {"02", 0.71, 0.71}, {"03", 0.74, 0.74},  {"04", 0.76, 0.76},
        {"05", 0.78, 0.78}, {"07", 0.78, 0.78}, {"S01", 0.80, 0.77}, {"S02", 0.73, 0.77},
        {"S03", 0.65, 0.61}, {"S04", 0.78, 0.63}, {"S05", 0.75, 0.72}, {"S06", 0.73, 0.64},
        {"S07", 0.80, 0.85}, {"S08", 0.60, 0.56}, {"S09", 0.71, 0.66}, {"S12", 0.79, 0.75},
        {"S15", 0.67, 0.65}, {"S16", 0.73, 0.78},
    };
}

std::vector<SubjectProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open subject profiles " + path.string());
    const auto doc = nlohmann::json::parse(in);
    std::vector<SubjectProfile> out;
    for (const auto& s : doc.at("subjects")) {
        SubjectProfile p{s.at("id").get<std::string>(), s.at("sens").get<double>(), s.at("spec").get<double>()};
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

SubjectProfile find_profile(const std::vector<SubjectProfile>& profiles, const std::string& id) {
    if (id.rfind("acc:", 0) == 0) return SubjectProfile::from_accuracy(id, std::stod(id.substr(4)));
    for (const auto& p : profiles)
        if (p.id == id) return p;
    throw std::invalid_argument("unknown subject '" + id + "'");
}

bool is_true_error(const Game& game, const GameState& state, ActionId action) {
    return !game.is_optimal(state, action);
}

bool emit_label(bool truth, const SubjectProfile& profile, Rng& rng) {
    // Always draw exactly one uniform so the stream position is class independent.
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return truth ? u < profile.sens : u >= profile.spec;
}

FeedbackChannel::FeedbackChannel(const Game& game, SubjectProfile profile, Rng rng)
    : game_(&game), profile_(std::move(profile)), rng_(std::move(rng)) {
    profile_.validate();
}

bool FeedbackChannel::query(const GameState& state, ActionId action) {
    ++calls_;
    return emit_label(is_true_error(*game_, state, action), profile_, rng_);
}

LabeledDataset label_trajectories(const Game& game, const std::vector<envs::Trajectory>& trajs,
                                  const SubjectProfile& profile, Rng& rng) {
    profile.validate();
    LabeledDataset data;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        data.source.push_back(static_cast<int>(i));
        for (const auto& t : trajs[i].transitions) {
            const bool truth = is_true_error(game, t.state, t.action);
            data.labels.push_back({t.state, t.action, emit_label(truth, profile, rng), static_cast<int>(i)});
        }
    }
    return data;
}

RandomTransitionSet sample_random_transitions(const Game& game, std::size_t n, Rng& rng) {
    RandomTransitionSet out;
    if (n == 0) return out;

    std::vector<int> starts;
    for (int i = 0; i < game.state_count(); ++i) {
        const GameState s = game.state_at(i);
        if (game.is_valid(s) && !game.is_terminal(s)) starts.push_back(i);
    }
    std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
    std::uniform_int_distribution<int> pick_action(0, game.num_actions() - 1);

    out.transitions.reserve(n);
    while (out.transitions.size() < n) {
        GameState s = game.state_at(starts[pick_start(rng)]);
        for (int t = 0; t < game.max_steps() && out.transitions.size() < n; ++t) {
            out.transitions.push_back(game.step(s, ActionId{pick_action(rng)}));
            if (out.transitions.back().terminal) break;
            s = out.transitions.back().next_state;
        }
    }
    return out;
}

std::vector<envs::Transition> label_transitions(const Game& game, const LabeledDataset& data) {
    std::vector<envs::Transition> out;
    out.reserve(data.size());
    for (const auto& l : data.labels) out.push_back(game.step(l.state, l.action));
    return out;
}

long count_queries(QueryMode mode, const RunRecord& record) {
    return mode == QueryMode::FullAccess ? record.env_steps : record.queries;
}

long count_queries(const LabeledDataset& data) { return static_cast<long>(data.size()); }

}  // namespace ihf::feedback
