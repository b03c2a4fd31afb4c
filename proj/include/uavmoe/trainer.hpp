#pragma once

// MAPPO training loop with the phase controller.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/controller.hpp"
#include "uavmoe/environment.hpp"
#include "uavmoe/losses.hpp"
#include "uavmoe/optimizer.hpp"
#include "uavmoe/policy.hpp"
#include "uavmoe/rng.hpp"
#include "uavmoe/train_config.hpp"

namespace uavmoe::train {

struct IterationRecord
{
    std::size_t iter = 0;
    std::size_t time_step = 0; ///< environment clock at the start of the rollout
    int phase = 0;
    bool switched = false;
    std::size_t episodes = 0;
    double return_mean = 0.0;
    double collisions = 0.0; ///< per episode
    double energy_j = 0.0;   ///< per episode, summed over UAVs
    double served = 0.0;     ///< per step
    double coverage = 0.0;   ///< per step
    std::vector<double> router_rates_policy;
    std::vector<double> router_rates_value;
    std::optional<double> dnf;
    std::optional<double> dnf_raw;
    std::optional<double> stable_rank;
    double kl_coef = 0.0;
    double entropy_coef = 0.0;
    double lr = 0.0;
    double lr_router = 0.0;
    double tau = 1.0;
    double clip = 0.0;
    double target_kl = 0.0;
    bool router_frozen = false;
    double noise_energy_cum = 0.0;
    std::size_t noise_epochs = 0; ///< epochs with an injection in this iteration
    std::size_t epochs_run = 0;
    double approx_kl = 0.0; ///< last epoch
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double kl_ref = 0.0;
    double clip_frac = 0.0;
    double log_std = 0.0; ///< mean over action dimensions after the update

    std::string to_json() const;
};

struct EpisodeRecord
{
    std::size_t iter = 0;
    std::size_t end_time_step = 0;
    int phase = 0;
    double return_sum = 0.0;
    double served_mean = 0.0;
    double coverage_mean = 0.0;
    std::size_t collisions = 0;
    double energy_j = 0.0;

    std::string to_json() const;
};

class Trainer;

struct TrainerHooks
{
    std::function<void(const Trainer&, std::size_t iter)> on_iteration_start;
    std::function<void(const Trainer&, std::size_t iter, std::size_t epoch, bool noise_injected)> on_epoch_end;
    std::function<void(const Trainer&, const IterationRecord&)> on_iteration_end;
};

struct TrainerOptions
{
    std::filesystem::path out_dir; ///< empty: keep records in memory only
    std::string run_metadata;      ///< stored inside checkpoints
    std::ostream* progress = nullptr;
    std::size_t progress_every = 10;
};

/// Fills a zero phase length with total_steps / (3 phases x cycles).
void resolve_phase_length(env::ScenarioConfig& scenario, const TrainConfig& train);

nn::ModelConfig model_config_for(const env::ScenarioConfig& scenario);

class Trainer
{
public:
    Trainer(env::ScenarioConfig scenario, TrainConfig cfg, nn::Algo algo, std::uint64_t seed,
            nn::ModelConfig model_cfg, TrainerOptions opts = {});
    Trainer(env::ScenarioConfig scenario, TrainConfig cfg, nn::Algo algo, std::uint64_t seed,
            TrainerOptions opts = {});

    /// Runs all remaining iterations.
    void run(const TrainerHooks& hooks = {});
    /// Runs a single iteration and returns its record.
    IterationRecord step(const TrainerHooks& hooks = {});

    std::size_t iteration() const { return iter_; }
    std::size_t total_iterations() const { return cfg_.iterations(); }
    std::size_t phase_len_iters() const { return phase_len_iters_; }

    const nn::PolicyModel& model() const { return model_; }
    nn::PolicyModel& model() { return model_; }
    const PhaseController& controller() const { return ctrl_; }
    const AdamState& actor_optimizer() const { return opt_actor_; }
    const AdamState& critic_optimizer() const { return opt_critic_; }
    const env::Environment& environment() const { return env_; }
    const TrainConfig& config() const { return cfg_; }
    const std::vector<IterationRecord>& records() const { return records_; }
    const std::vector<EpisodeRecord>& episodes() const { return episodes_; }

    void save(const std::filesystem::path& path) const;

private:
    struct Rollout
    {
        Eigen::MatrixXd obs;        ///< (T*U) x obs_dim, agent-major within a step
        Eigen::MatrixXd actions;    ///< (T*U) x action_dim
        Eigen::VectorXd log_prob;   ///< T*U
        Eigen::MatrixXd actor_xi;   ///< (T*U) x E
        Eigen::MatrixXd states;     ///< T x state_dim
        Eigen::MatrixXd critic_xi;  ///< T x E
        std::vector<double> rewards;
        std::vector<double> values; ///< T + 1
        std::vector<bool> dones;
        std::vector<int> policy_sel;
        std::vector<int> value_sel;
        std::vector<bool> experts_used;
    };

    void collect(Rollout& ro, IterationRecord& rec);
    void update(const Rollout& ro, const GaeResult& adv, IterationRecord& rec, const TrainerHooks& hooks);
    void diagnose(const Rollout& ro, IterationRecord& rec) const;
    [[noreturn]] void abort_with_dump(const std::string& what, const IterationRecord& rec) const;
    void open_logs();

    env::ScenarioConfig scenario_;
    TrainConfig cfg_;
    nn::Algo algo_;
    std::uint64_t seed_;
    TrainerOptions opts_;

    env::Environment env_;
    nn::PolicyModel model_;
    AdamState opt_actor_;
    AdamState opt_critic_;
    std::size_t phase_len_iters_ = 1;
    PhaseController ctrl_;

    RandomStream action_rng_;
    RandomStream gate_rng_;
    RandomStream shuffle_rng_;
    RandomStream noise_rng_;

    std::size_t iter_ = 0;
    int last_phase_ = 0;
    std::vector<env::Observation> current_obs_;
    env::Observation current_state_;
    double ep_return_ = 0.0, ep_served_ = 0.0, ep_coverage_ = 0.0, ep_energy_ = 0.0;
    std::size_t ep_collisions_ = 0, ep_len_ = 0;

    std::vector<IterationRecord> records_;
    std::vector<EpisodeRecord> episodes_;
    std::ofstream metrics_log_;
    std::ofstream episode_log_;
};

} // namespace uavmoe::train
