#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ihf/envs.hpp"
#include "ihf/records.hpp"
#include "ihf/rng.hpp"

namespace ihf::feedback {

/// Noisy binary channel standing in for a decoded ErrP stream.
/// sens: P(label ErrP | action truly erroneous); spec: P(label non-ErrP | action correct).
struct SubjectProfile {
    std::string id;
    double sens = 1.0;
    double spec = 1.0;

    static SubjectProfile from_accuracy(std::string id, double accuracy);
    void validate() const;
    bool operator==(const SubjectProfile&) const = default;
};

/// Presets for the five experiment subjects plus S01..S16 from the per-SAP
/// accuracy table. See data/subjects.json for the shipped values.
std::vector<SubjectProfile> builtin_profiles();
std::vector<SubjectProfile> load_profiles(const std::filesystem::path& path);
/// Looks up `id` in `profiles`; "acc:<p>" builds a scalar-accuracy profile.
SubjectProfile find_profile(const std::vector<SubjectProfile>& profiles, const std::string& id);

struct FeedbackLabel {
    envs::GameState state;
    envs::ActionId action;
    bool errp = false;
    int trajectory = 0;
    bool operator==(const FeedbackLabel&) const = default;
};

struct LabeledDataset {
    std::vector<FeedbackLabel> labels;
    std::vector<int> source;  // ids of the labeled trajectories
    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
};

struct RandomTransitionSet {
    std::vector<envs::Transition> transitions;
};

/// Ground truth: an action is erroneous iff it is not an optimal action.
bool is_true_error(const envs::Game& game, const envs::GameState& state, envs::ActionId action);
/// One pass of a truth bit through the channel.
bool emit_label(bool truth, const SubjectProfile& profile, Rng& rng);

/// Stateful per-step channel for the full-access baseline; counts every query.
class FeedbackChannel {
public:
    FeedbackChannel(const envs::Game& game, SubjectProfile profile, Rng rng);
    bool query(const envs::GameState& state, envs::ActionId action);
    long calls() const { return calls_; }
    const SubjectProfile& profile() const { return profile_; }

private:
    const envs::Game* game_;
    SubjectProfile profile_;
    Rng rng_;
    long calls_ = 0;
};

/// One label per state-action occurrence, each corrupted independently.
LabeledDataset label_trajectories(const envs::Game& game, const std::vector<envs::Trajectory>& trajs,
                                  const SubjectProfile& profile, Rng& rng);

/// Uniform-random action walks, each started from a uniformly drawn valid
/// non-terminal state and cut at the game's step limit, until n transitions
/// have been gathered.
RandomTransitionSet sample_random_transitions(const envs::Game& game, std::size_t n, Rng& rng);

/// Transitions (s, a, step(s,a)) behind each label, in label order.
std::vector<envs::Transition> label_transitions(const envs::Game& game, const LabeledDataset& data);

enum class QueryMode { FullAccess, Shaped };

/// FullAccess: environment steps taken in training. Shaped: the record's
/// stored query count (labels gathered before training).
long count_queries(QueryMode mode, const RunRecord& record);
long count_queries(const LabeledDataset& data);

}  // namespace ihf::feedback
