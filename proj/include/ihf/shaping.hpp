#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ihf/envs.hpp"
#include "ihf/feedback.hpp"
#include "ihf/numerics/adam.hpp"
#include "ihf/numerics/checkpoint.hpp"
#include "ihf/numerics/mlp.hpp"

namespace ihf::shaping {

struct SoftQParams {
    double alpha = 1.0;  // temperature
    double gamma = 0.9;  // discount inside the auxiliary reward and J2
};

struct SoftPolicy {
    num::Vector pi;
    double value = 0.0;
};

/// V = alpha * logsumexp(q / alpha), pi_a = exp((q_a - V) / alpha), with the
/// maximum subtracted before exponentiation.
SoftPolicy soft_policy(const num::Vector& q, double alpha);

/// Full-batch Adam budget shared by every reward-learning fit.
struct TrainConfig {
    int epochs = 2000;
    num::AdamConfig adam{};
    std::vector<int> hidden = {64, 64};
    std::uint64_t seed = 0;
};

/// Per-epoch objective trace of a fit.
struct FitReport {
    std::vector<double> history;
    double final_objective = 0.0;
};

/// Q_h(s, .) over the game's actions.
struct HumanQModel {
    num::Mlp net;
    double alpha = 1.0;

    num::Vector q_values(const envs::Game& game, const envs::GameState& s) const;
};

/// Scalar state baseline t(s).
struct BaselineModel {
    num::Mlp net;

    double value(const envs::Game& game, const envs::GameState& s) const;
};

/// J1 / |D| for a model: mean of pi(a|s) on non-ErrP labels and 1 - pi(a|s)
/// on ErrP labels.
double j1_per_sample(const envs::Game& game, const HumanQModel& model, const feedback::LabeledDataset& data);

/// Maximises J1 by full-batch Adam for config.epochs epochs.
/// Throws std::invalid_argument on an empty dataset.
HumanQModel fit_human_q(const envs::Game& game, const feedback::LabeledDataset& data, const SoftQParams& params,
                        const TrainConfig& config, FitReport* report = nullptr);

/// Bellman-style residual Q(s,a) + t(s) - gamma * max_a' [Q(s',a') + t(s')];
/// the successor term is zero when s' is terminal. `baseline` may be null (t = 0).
double residual(const envs::Game& game, const HumanQModel& q, const BaselineModel* baseline,
                const envs::Transition& tr, double gamma);

/// J2 / |transitions| with the absolute-value loss.
double j2_per_sample(const envs::Game& game, const HumanQModel& q, const BaselineModel* baseline,
                     const std::vector<envs::Transition>& transitions, double gamma);

/// Minimises J2 over the baseline with Q_h frozen. Only (s, a, s', terminal)
/// of each transition is read; the stored environment reward is ignored.
BaselineModel fit_baseline(const envs::Game& game, const HumanQModel& q,
                           const std::vector<envs::Transition>& transitions, const SoftQParams& params,
                           const TrainConfig& config, FitReport* report = nullptr);

/// r_a(s,a) = Q(s,a) + t(s) - gamma * max_a' [Q(s',a') + t(s')], zero successor
/// term at terminal s'. `baseline` may be null.
double aux_reward(const envs::Game& game, const HumanQModel& q, const BaselineModel* baseline,
                  const envs::GameState& s, envs::ActionId a, const envs::GameState& s_next, bool terminal,
                  double gamma);

/// beta(e) = a * exp(-e / b). b = +inf gives the constant a.
struct BetaSchedule {
    double a = 3.0;
    double b = 80.0;

    static BetaSchedule constant(double value) { return {value, std::numeric_limits<double>::infinity()}; }
    void validate() const;
};

double beta(const BetaSchedule& schedule, int episode);

/// Bootstrap ensemble used by the `simple` robustness baseline. Each head maps
/// a state to per-action ErrP logits.
struct BootstrapEnsemble {
    static constexpr int kHeads = 5;
    std::vector<num::Mlp> heads;

    /// Mean head probability that (s, a) is labeled ErrP.
    double errp_probability(const envs::Game& game, const envs::GameState& s, envs::ActionId a) const;
    bool predicts_errp(const envs::Game& game, const envs::GameState& s, envs::ActionId a) const {
        return errp_probability(game, s, a) >= 0.5;
    }
};

BootstrapEnsemble fit_simple_baseline(const envs::Game& game, const feedback::LabeledDataset& data,
                                      const TrainConfig& config);

/// Dense tabulation of a fitted reward model over every valid state of a
/// game, so training loops evaluate shaped rewards by lookup. Immutable once
/// built and safe to share across runs.
class RewardTable {
public:
    /// Soft-Q reward: stores Q_B(s, .) = Q_h(s, .) + t(s).
    static RewardTable soft_q(const envs::Game& game, const HumanQModel& q, const BaselineModel* baseline,
                              double gamma);
    /// `simple` reward: stores -1 where the ensemble predicts ErrP, 0 elsewhere.
    static RewardTable simple(const envs::Game& game, const BootstrapEnsemble& ensemble);

    /// Auxiliary reward of the transition (soft-Q) or the ensemble penalty (simple).
    double operator()(const envs::Transition& tr) const;
    double operator()(const envs::GameState& s, envs::ActionId a, const envs::GameState& s_next,
                      bool terminal) const;

    bool is_simple() const { return simple_; }
    double gamma() const { return gamma_; }

private:
    const envs::Game* game_ = nullptr;
    num::Matrix table_;  // actions x states
    num::Vector best_;   // max_a table_(a, s)
    double gamma_ = 0.0;
    bool simple_ = false;
};

/// Checkpoint round trip for fitted reward models.
num::Checkpoint save_soft_q(const envs::Game& game, const HumanQModel& q, const BaselineModel* baseline,
                            const SoftQParams& params);
num::Checkpoint save_simple(const envs::Game& game, const BootstrapEnsemble& ensemble);

struct LoadedReward {
    std::optional<HumanQModel> q;
    std::optional<BaselineModel> baseline;
    std::optional<BootstrapEnsemble> ensemble;
    SoftQParams params;
};
LoadedReward load_reward(const num::Checkpoint& ck, const envs::Game& game);

}  // namespace ihf::shaping
