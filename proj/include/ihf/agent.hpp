#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ihf/envs.hpp"
#include "ihf/feedback.hpp"
#include "ihf/numerics/adam.hpp"
#include "ihf/numerics/blr.hpp"
#include "ihf/numerics/mlp.hpp"
#include "ihf/records.hpp"
#include "ihf/shaping.hpp"

namespace ihf::agent {

struct AgentConfig {
    int feature_dim = 64;
    std::vector<int> hidden = {64};  // hidden layers before the feature layer
    double gamma = 0.9;
    num::AdamConfig adam{};
    int batch_size = 32;
    int replay_capacity = 10000;
    int learning_starts = 32;
    int train_every = 4;
    int target_sync_interval = 500;
    int posterior_update_interval = 200;
    int thompson_interval = 1;       // episodes between weight resamples
    int thompson_step_interval = 1;  // steps between in-episode resamples, 0 disables
    double prior_var = 0.1;
    double noise_var = 0.05;
    int episode_cap = 3000;
};

struct NoFeedback {};
struct FullAccess {
    double penalty = -1.0;
    feedback::SubjectProfile profile;
};
struct Shaped {
    std::shared_ptr<const shaping::RewardTable> aux;
    shaping::BetaSchedule schedule;
    long label_queries = 0;
};
struct SimpleShaped {
    std::shared_ptr<const shaping::RewardTable> penalty;  // built with RewardTable::simple
    shaping::BetaSchedule schedule;
    long label_queries = 0;
};
using RewardMode = std::variant<NoFeedback, FullAccess, Shaped, SimpleShaped>;

std::string mode_name(const RewardMode& mode);

/// r_e plus the mode's shaping term. FullAccess queries `channel` once per
/// call (channel must be non-null for that mode); the other modes never touch it.
double shape_reward(const RewardMode& mode, const envs::Transition& tr, int episode,
                    feedback::FeedbackChannel* channel);

struct StoredTransition {
    envs::GameState state;
    envs::ActionId action;
    double reward = 0.0;  // shaped
    envs::GameState next_state;
    bool terminal = false;
};

/// Fixed-capacity FIFO with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(StoredTransition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// i-th oldest item still stored.
    const StoredTransition& at(std::size_t i) const;
    std::size_t sample_index(Rng& rng) const;
    std::vector<const StoredTransition*> sample(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // index of the oldest item once full
    std::vector<StoredTransition> items_;
};

/// Bayesian DQN: a feature network phi(s) with a Bayesian linear head per
/// action, Q(s,a) = <w_a, phi(s)>. Acting uses Thompson-sampled heads; the
/// regression targets use the target network and target posterior means.
class BdqnAgent {
public:
    BdqnAgent(const envs::Game& game, AgentConfig config, std::uint64_t seed);

    const AgentConfig& config() const { return config_; }
    const num::Mlp& features() const { return features_; }
    num::Mlp& features() { return features_; }
    const std::vector<num::BayesLinReg>& posteriors() const { return posteriors_; }
    std::vector<num::BayesLinReg>& posteriors() { return posteriors_; }
    const num::Matrix& sampled_weights() const { return sampled_; }
    const ReplayBuffer& replay() const { return replay_; }

    num::Vector phi(const envs::GameState& s) const;
    /// Q under the currently sampled heads.
    num::Vector q_values(const envs::GameState& s) const;
    /// Q under the posterior means.
    num::Vector q_mean_values(const envs::GameState& s) const;

    envs::ActionId act(const envs::GameState& s) const;
    void resample_weights();
    /// Sets the sampled heads to the posterior means (variance-free acting).
    void use_posterior_means();

    /// Stores a transition and runs whatever training the step counter calls for.
    void observe(const envs::Transition& tr, double shaped_reward);

    /// y = r + gamma * max_a' <mu_target_a', phi_target(s')>, no bootstrap at terminal.
    num::Vector targets(const std::vector<const StoredTransition*>& batch) const;
    /// One Adam step on the squared Bellman residual with heads held at the posterior means.
    void train_step(const std::vector<const StoredTransition*>& batch);
    /// Recomputes every per-action posterior from the prior on the replay contents.
    void refresh_posteriors();
    void sync_target();

    long steps() const { return steps_; }

private:
    num::Matrix encode_batch(const std::vector<const StoredTransition*>& batch, bool next) const;

    const envs::Game* game_;
    AgentConfig config_;
    Rng rng_;
    num::Mlp features_;
    num::Mlp target_features_;
    num::AdamState adam_;
    std::vector<num::BayesLinReg> posteriors_;
    std::vector<num::Matrix> factors_;  // Cholesky factors of the posterior covariances
    num::Matrix mean_weights_;    // actions x d
    num::Matrix target_weights_;  // actions x d
    num::Matrix sampled_;         // actions x d
    ReplayBuffer replay_;
    long steps_ = 0;
};

struct TrainingSetup {
    AgentConfig config;
    RewardMode mode;
    std::uint64_t seed = 0;
    std::string subject;  // for the record only
    int k = 0;
};

/// Episode loop with Thompson-sampled acting until the trailing 32-episode
/// success rate reaches 1 or the episode cap is hit.
RunRecord run_training(const envs::Game& game, const TrainingSetup& setup);

}  // namespace ihf::agent
