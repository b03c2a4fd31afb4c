#include "uavmoe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "uavmoe/checkpoint.hpp"
#include "uavmoe/diagnostics.hpp"
#include "uavmoe/errors.hpp"

namespace uavmoe::train {

using Eigen::Index;
using Eigen::MatrixXd;
using json = nlohmann::json;

void TrainConfig::validate() const
{
    auto positive = [](double v, const char* path) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(path, "must be a positive finite number");
    };
    auto non_negative = [](double v, const char* path) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(path, "must be a non-negative finite number");
    };
    auto unit_open = [](double v, const char* path) {
        if (!(v > 0.0 && v < 1.0))
            throw ConfigError(path, "must lie in (0, 1)");
    };
    if (rollout_len == 0)
        throw ConfigError("train.rollout_len", "must be >= 1");
    if (total_steps < rollout_len)
        throw ConfigError("train.total_steps", "must be at least one rollout (train.rollout_len)");
    if (minibatches == 0 || minibatches > rollout_len)
        throw ConfigError("train.minibatches", "must lie in [1, train.rollout_len]");
    if (update_epochs == 0)
        throw ConfigError("train.update_epochs", "must be >= 1");
    positive(lr, "train.lr");
    non_negative(weight_decay, "train.weight_decay");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
        throw ConfigError("train.adam_beta1", "must lie in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("train.adam_beta2", "must lie in [0, 1)");
    positive(adam_eps, "train.adam_eps");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ConfigError("train.gamma", "must lie in [0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw ConfigError("train.gae_lambda", "must lie in [0, 1]");
    if (!(clip > 0.0 && clip < 1.0))
        throw ConfigError("train.clip", "must lie in (0, 1)");
    non_negative(vf_coef, "train.vf_coef");
    non_negative(ent_start, "train.ent_start");
    non_negative(ent_end, "train.ent_end");
    if (ent_end > ent_start)
        throw ConfigError("train.ent_end", "must not exceed train.ent_start");
    if (!(ent_anneal_portion > 0.0 && ent_anneal_portion <= 1.0))
        throw ConfigError("train.ent_anneal_portion", "must lie in (0, 1]");
    positive(target_kl, "train.target_kl");
    non_negative(max_grad_norm, "train.max_grad_norm");
    non_negative(kl_ref_init, "train.kl_ref_init");
    unit_open(kl_ref_decay, "train.kl_ref_decay");
    non_negative(kl_ref_release, "train.kl_ref_release");
    if (!(phase_lr_mult > 0.0 && phase_lr_mult <= 1.0))
        throw ConfigError("train.phase_lr_mult", "must lie in (0, 1]");
    if (!std::isfinite(logstd_reset))
        throw ConfigError("train.logstd_reset", "must be finite");
    non_negative(noise_scale, "train.noise_scale");
    positive(tau_min, "train.tau_min");
    positive(tau_max, "train.tau_max");
    non_negative(tau_kappa, "train.tau_kappa");
    if (!std::isfinite(tau_beta))
        throw ConfigError("train.tau_beta", "must be finite");
    positive(reward_scale, "train.reward_scale");
    if (diag_every == 0)
        throw ConfigError("train.diag_every", "must be >= 1");
    if (diag_rows == 0)
        throw ConfigError("train.diag_rows", "must be >= 1");
    non_negative(dnf_delta, "train.dnf_delta");
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

std::string IterationRecord::to_json() const
{
    json j;
    j["iter"] = iter;
    j["time_step"] = time_step;
    j["phase"] = phase;
    j["switched"] = switched;
    j["episodes"] = episodes;
    j["return_mean"] = finite_or_null(return_mean);
    j["collisions"] = finite_or_null(collisions);
    j["energy_j"] = finite_or_null(energy_j);
    j["served"] = served;
    j["coverage"] = coverage;
    j["router_rates"] = {{"policy", router_rates_policy}, {"value", router_rates_value}};
    j["dnf"] = opt(dnf);
    j["dnf_raw"] = opt(dnf_raw);
    j["stable_rank"] = opt(stable_rank);
    j["kl_coef"] = kl_coef;
    j["entropy_coef"] = entropy_coef;
    j["lr"] = lr;
    j["lr_router"] = lr_router;
    j["tau"] = tau;
    j["clip"] = clip;
    j["target_kl"] = target_kl;
    j["router_frozen"] = router_frozen;
    j["noise_energy_cum"] = noise_energy_cum;
    j["noise_epochs"] = noise_epochs;
    j["epochs_run"] = epochs_run;
    j["approx_kl"] = approx_kl;
    j["policy_loss"] = policy_loss;
    j["value_loss"] = value_loss;
    j["entropy"] = entropy;
    j["kl_ref"] = kl_ref;
    j["clip_frac"] = clip_frac;
    j["log_std"] = log_std;
    return j.dump();
}

std::string EpisodeRecord::to_json() const
{
    json j;
    j["iter"] = iter;
    j["end_time_step"] = end_time_step;
    j["phase"] = phase;
    j["return"] = return_sum;
    j["served"] = served_mean;
    j["coverage"] = coverage_mean;
    j["collisions"] = collisions;
    j["energy_j"] = energy_j;
    return j.dump();
}

void resolve_phase_length(env::ScenarioConfig& scenario, const TrainConfig& train)
{
    if (scenario.phases.phase_len_steps != 0)
        return;
    const std::size_t segments = env::kPhaseCount * scenario.phases.cycles;
    scenario.phases.phase_len_steps = std::max<std::size_t>(1, train.total_steps / segments);
}

nn::ModelConfig model_config_for(const env::ScenarioConfig& scenario)
{
    nn::ModelConfig m;
    m.obs_dim = static_cast<Index>(scenario.obs_dim());
    m.state_dim = static_cast<Index>(scenario.global_state_dim());
    return m;
}

static env::ScenarioConfig resolved(env::ScenarioConfig s, const TrainConfig& t)
{
    t.validate();
    resolve_phase_length(s, t);
    return s;
}

Trainer::Trainer(env::ScenarioConfig scenario, TrainConfig cfg, nn::Algo algo, std::uint64_t seed, TrainerOptions opts)
    : Trainer(scenario, cfg, algo, seed, model_config_for(scenario), std::move(opts))
{
}

Trainer::Trainer(env::ScenarioConfig scenario, TrainConfig cfg, nn::Algo algo, std::uint64_t seed,
                 nn::ModelConfig model_cfg, TrainerOptions opts)
    : scenario_(resolved(std::move(scenario), cfg)),
      cfg_(cfg),
      algo_(algo),
      seed_(seed),
      opts_(std::move(opts)),
      env_(scenario_),
      model_(model_cfg, algo),
      phase_len_iters_(std::max<std::size_t>(1, scenario_.phases.phase_len_steps / cfg_.rollout_len)),
      ctrl_(cfg_, algo == nn::Algo::pemamoe, phase_len_iters_),
      action_rng_(seed, "train.action"),
      gate_rng_(seed, "train.gate"),
      shuffle_rng_(seed, "train.shuffle"),
      noise_rng_(seed, "train.noise")
{
    if (model_cfg.obs_dim != static_cast<Index>(scenario_.obs_dim()) ||
        model_cfg.state_dim != static_cast<Index>(scenario_.global_state_dim()))
        throw ConfigError("model", "network input sizes do not match the scenario observation layout");
    RandomStream init_rng(seed, "train.init");
    model_.init(init_rng);
    opt_actor_ = AdamState(model_.actor_params().size());
    opt_critic_ = AdamState(model_.critic_params().size());

    auto r = env_.reset(seed);
    current_obs_ = std::move(r.observations);
    current_state_ = std::move(r.global_state);
    last_phase_ = env_.state().phase;
    open_logs();
}

void Trainer::open_logs()
{
    if (opts_.out_dir.empty())
        return;
    std::filesystem::create_directories(opts_.out_dir);
    metrics_log_.open(opts_.out_dir / "metrics.jsonl", std::ios::app);
    episode_log_.open(opts_.out_dir / "episodes.jsonl", std::ios::app);
    if (!metrics_log_ || !episode_log_)
        throw std::runtime_error("cannot open logs in " + opts_.out_dir.string());
}

void Trainer::run(const TrainerHooks& hooks)
{
    while (iter_ < cfg_.iterations())
        step(hooks);
    if (!opts_.out_dir.empty()) {
        std::filesystem::create_directories(opts_.out_dir / "checkpoints");
        save(opts_.out_dir / "checkpoints" / "final.bin");
    }
}

void Trainer::save(const std::filesystem::path& path) const
{
    json meta = json::parse(opts_.run_metadata.empty() ? std::string("{}") : opts_.run_metadata);
    meta["algo"] = nn::algo_name(algo_);
    meta["seed"] = seed_;
    meta["iter"] = iter_;
    nn::save_checkpoint(path, model_, meta.dump());
}

IterationRecord Trainer::step(const TrainerHooks& hooks)
{
    IterationRecord rec;
    rec.iter = iter_;
    rec.time_step = env_.state().time_step;
    rec.phase = env_.state().phase;

    if (iter_ > 0 && rec.phase != last_phase_) {
        rec.switched = true;
        ctrl_.on_phase_switch(model_, opt_actor_, opt_critic_, noise_rng_);
    }
    last_phase_ = rec.phase;
    ctrl_.begin_iteration(iter_);
    const auto& cs = ctrl_.state();
    if (model_.actor().has_router()) {
        model_.actor().set_tau(cs.tau);
        model_.critic().set_tau(cs.tau);
    }
    rec.kl_coef = cs.kl_coef;
    rec.entropy_coef = cs.entropy_coef;
    rec.lr = cs.lr;
    rec.lr_router = cs.lr_router;
    rec.tau = cs.tau;
    rec.clip = cs.clip;
    rec.target_kl = cs.target_kl;
    rec.router_frozen = cs.router_frozen;
    if (hooks.on_iteration_start)
        hooks.on_iteration_start(*this, iter_);

    Rollout ro;
    collect(ro, rec);
    const auto adv = gae(ro.rewards, ro.values, ro.dones, cfg_.gamma, cfg_.gae_lambda);
    update(ro, adv, rec, hooks);

    if (iter_ % cfg_.diag_every == 0 || iter_ + 1 == cfg_.iterations())
        diagnose(ro, rec);
    rec.noise_energy_cum = ctrl_.state().noise_energy_cum;
    rec.log_std = model_.log_std().mean();
    ctrl_.end_iteration();

    if (metrics_log_.is_open()) {
        metrics_log_ << rec.to_json() << '\n';
        metrics_log_.flush();
    }
    if (opts_.progress && (iter_ % opts_.progress_every == 0 || iter_ + 1 == cfg_.iterations())) {
        char line[256];
        std::snprintf(line, sizeof line, "[%s] iter %zu/%zu phase %d return %.4g served %.3g kl %.3g epochs %zu\n",
                      nn::algo_name(algo_), iter_ + 1, cfg_.iterations(), rec.phase, rec.return_mean, rec.served,
                      rec.approx_kl, rec.epochs_run);
        *opts_.progress << line << std::flush;
    }
    ++iter_;
    if (!opts_.out_dir.empty() && cfg_.checkpoint_every > 0 && iter_ % cfg_.checkpoint_every == 0) {
        std::filesystem::create_directories(opts_.out_dir / "checkpoints");
        char name[64];
        std::snprintf(name, sizeof name, "iter_%06zu.bin", iter_);
        save(opts_.out_dir / "checkpoints" / name);
    }
    records_.push_back(rec);
    if (hooks.on_iteration_end)
        hooks.on_iteration_end(*this, rec);
    return rec;
}

static Eigen::RowVectorXd as_row(const env::Observation& o)
{
    return Eigen::Map<const Eigen::RowVectorXd>(o.data(), static_cast<Index>(o.size()));
}

void Trainer::collect(Rollout& ro, IterationRecord& rec)
{
    const std::size_t t_len = cfg_.rollout_len;
    const std::size_t n_ag = env_.n_agents();
    const Index obs_dim = model_.config().obs_dim;
    const Index act_dim = model_.config().action_dim;
    const int e_actor = model_.actor().n_experts();
    const int e_critic = model_.critic().n_experts();
    const bool actor_noise = model_.actor().config().gate_noise;
    const bool critic_noise = model_.critic().config().gate_noise;
    const auto rows = static_cast<Index>(t_len * n_ag);

    ro.obs.resize(rows, obs_dim);
    ro.actions.resize(rows, act_dim);
    ro.log_prob.resize(rows);
    if (actor_noise)
        ro.actor_xi.resize(rows, e_actor);
    ro.states.resize(static_cast<Index>(t_len), model_.config().state_dim);
    if (critic_noise)
        ro.critic_xi.resize(static_cast<Index>(t_len), e_critic);
    ro.rewards.reserve(t_len);
    ro.values.reserve(t_len + 1);
    ro.dones.reserve(t_len);
    ro.experts_used.assign(static_cast<std::size_t>(e_actor), false);

    nn::ForwardOptions fo;
    fo.training = true;
    fo.rng = &gate_rng_;

    const Eigen::RowVectorXd ls = model_.log_std();
    std::vector<env::Action> actions(n_ag);
    double ret_sum = 0.0, coll_sum = 0.0, energy_sum = 0.0, served_sum = 0.0, cov_sum = 0.0;
    std::size_t episodes = 0;

    for (std::size_t t = 0; t < t_len; ++t) {
        MatrixXd x(static_cast<Index>(n_ag), obs_dim);
        for (std::size_t a = 0; a < n_ag; ++a)
            x.row(static_cast<Index>(a)) = as_row(current_obs_[a]);
        auto ac = model_.actor().forward(model_.actor_params(), x, fo);
        for (std::size_t a = 0; a < n_ag; ++a) {
            const auto r = static_cast<Index>(a);
            const auto row = static_cast<Index>(t * n_ag + a);
            const Eigen::RowVectorXd act = nn::gaussian::sample(ac.output.row(r), ls, action_rng_);
            ro.obs.row(row) = x.row(r);
            ro.actions.row(row) = act;
            ro.log_prob(row) = nn::gaussian::log_prob(ac.output.row(r), ls, act);
            if (actor_noise)
                ro.actor_xi.row(row) = ac.xi.row(r);
            ro.policy_sel.push_back(ac.selected(r, 0));
            for (Index k = 0; k < ac.selected.cols(); ++k)
                ro.experts_used[static_cast<std::size_t>(ac.selected(r, k))] = true;
            actions[a] = env::Action(act(0), act(1));
        }

        const Eigen::RowVectorXd s = as_row(current_state_);
        auto vc = model_.critic().forward(model_.critic_params(), s, fo);
        ro.states.row(static_cast<Index>(t)) = s;
        if (critic_noise)
            ro.critic_xi.row(static_cast<Index>(t)) = vc.xi.row(0);
        ro.values.push_back(vc.output(0, 0));
        ro.value_sel.push_back(vc.selected(0, 0));

        env::StepOutcome out;
        try {
            out = env_.step(actions);
        } catch (const std::exception& ex) {
            throw TrainingAbort("environment step failed at iteration " + std::to_string(iter_) + ", rollout step " +
                                std::to_string(t) + " (time step " + std::to_string(env_.state().time_step) +
                                "): " + ex.what());
        }
        const double r_team = out.rewards.at(0);
        ro.rewards.push_back(r_team * cfg_.reward_scale);
        ro.dones.push_back(out.done);

        const double step_energy = std::accumulate(out.info.energy_j.begin(), out.info.energy_j.end(), 0.0);
        served_sum += static_cast<double>(out.info.served);
        cov_sum += out.info.coverage;
        ep_return_ += r_team;
        ep_served_ += static_cast<double>(out.info.served);
        ep_coverage_ += out.info.coverage;
        ep_energy_ += step_energy;
        ep_collisions_ += out.info.collisions;
        ++ep_len_;

        if (out.done) {
            EpisodeRecord er;
            er.iter = iter_;
            er.end_time_step = out.info.time_step;
            er.phase = out.info.phase;
            er.return_sum = ep_return_;
            er.served_mean = ep_served_ / static_cast<double>(ep_len_);
            er.coverage_mean = ep_coverage_ / static_cast<double>(ep_len_);
            er.collisions = ep_collisions_;
            er.energy_j = ep_energy_;
            if (episode_log_.is_open())
                episode_log_ << er.to_json() << '\n';
            episodes_.push_back(er);
            ++episodes;
            ret_sum += ep_return_;
            coll_sum += static_cast<double>(ep_collisions_);
            energy_sum += ep_energy_;
            ep_return_ = ep_served_ = ep_coverage_ = ep_energy_ = 0.0;
            ep_collisions_ = ep_len_ = 0;

            auto r = env_.next_episode();
            current_obs_ = std::move(r.observations);
            current_state_ = std::move(r.global_state);
        } else {
            current_obs_ = std::move(out.observations);
            current_state_ = std::move(out.global_state);
        }
    }
    if (episode_log_.is_open())
        episode_log_.flush();

    auto vlast = model_.critic().forward(model_.critic_params(), as_row(current_state_), fo);
    ro.values.push_back(vlast.output(0, 0));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.episodes = episodes;
    rec.return_mean = episodes ? ret_sum / static_cast<double>(episodes) : nan;
    rec.collisions = episodes ? coll_sum / static_cast<double>(episodes) : nan;
    rec.energy_j = episodes ? energy_sum / static_cast<double>(episodes) : nan;
    rec.served = served_sum / static_cast<double>(t_len);
    rec.coverage = cov_sum / static_cast<double>(t_len);
    rec.router_rates_policy = diag::routing_rates(ro.policy_sel, e_actor);
    rec.router_rates_value = diag::routing_rates(ro.value_sel, e_critic);
}

static bool all_finite(const nn::ParamStore& p)
{
    return std::all_of(p.values().begin(), p.values().end(), [](double v) { return std::isfinite(v); });
}

void Trainer::update(const Rollout& ro, const GaeResult& adv, IterationRecord& rec, const TrainerHooks& hooks)
{
    const std::size_t t_len = cfg_.rollout_len;
    const std::size_t n_ag = env_.n_agents();
    const std::size_t n_mb = cfg_.minibatches;
    const auto& cs = ctrl_.state();

    AdamHyper hyper;
    hyper.beta1 = cfg_.adam_beta1;
    hyper.beta2 = cfg_.adam_beta2;
    hyper.eps = cfg_.adam_eps;
    hyper.weight_decay = cfg_.weight_decay;
    hyper.max_grad_norm = cfg_.max_grad_norm;

    std::vector<std::size_t> perm(t_len);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), shuffle_rng_.engine());
        double kl_sum = 0.0;
        LossStats acc;
        for (std::size_t mb = 0; mb < n_mb; ++mb) {
            const std::size_t lo = mb * t_len / n_mb;
            const std::size_t hi = (mb + 1) * t_len / n_mb;
            const auto m = static_cast<Index>(hi - lo);
            const auto n = static_cast<Index>((hi - lo) * n_ag);

            ActorBatch ab;
            ab.obs.resize(n, ro.obs.cols());
            ab.actions.resize(n, ro.actions.cols());
            ab.old_log_prob.resize(n);
            ab.advantages.resize(n);
            if (ro.actor_xi.size() > 0)
                ab.xi.resize(n, ro.actor_xi.cols());
            CriticBatch cb;
            cb.states.resize(m, ro.states.cols());
            cb.returns.resize(m);
            if (ro.critic_xi.size() > 0)
                cb.xi.resize(m, ro.critic_xi.cols());

            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t s = perm[i];
                const auto ci = static_cast<Index>(i - lo);
                cb.states.row(ci) = ro.states.row(static_cast<Index>(s));
                cb.returns(ci) = adv.returns[s];
                if (cb.xi.size() > 0)
                    cb.xi.row(ci) = ro.critic_xi.row(static_cast<Index>(s));
                for (std::size_t a = 0; a < n_ag; ++a) {
                    const auto src = static_cast<Index>(s * n_ag + a);
                    const auto dst = static_cast<Index>((i - lo) * n_ag + a);
                    ab.obs.row(dst) = ro.obs.row(src);
                    ab.actions.row(dst) = ro.actions.row(src);
                    ab.old_log_prob(dst) = ro.log_prob(src);
                    ab.advantages(dst) = adv.advantages[s];
                    if (ab.xi.size() > 0)
                        ab.xi.row(dst) = ro.actor_xi.row(src);
                }
            }

            LossCoefs coefs;
            coefs.clip = cs.clip;
            coefs.vf_coef = cfg_.vf_coef;
            coefs.ent_coef = cs.entropy_coef;
            coefs.kl_coef = cs.ref_params ? cs.kl_coef : 0.0;

            Gradients g{model_.actor_params().zeros_like(), model_.critic_params().zeros_like()};
            const LossStats st = total_loss(model_, model_.actor_params(), model_.critic_params(), ab, cb, coefs,
                                            cs.ref_params ? &*cs.ref_params : nullptr, &g);
            if (!std::isfinite(st.total) || !all_finite(g.actor) || !all_finite(g.critic)) {
                rec.policy_loss = st.policy;
                rec.value_loss = st.value;
                rec.approx_kl = st.approx_kl;
                abort_with_dump("non-finite loss or gradient at iteration " + std::to_string(iter_) + ", epoch " +
                                    std::to_string(epoch) + ", minibatch " + std::to_string(mb),
                                rec);
            }
            adam_step(model_.actor_params(), g.actor, opt_actor_, ctrl_.actor_lr(), hyper);
            adam_step(model_.critic_params(), g.critic, opt_critic_, ctrl_.critic_lr(), hyper);

            kl_sum += st.approx_kl;
            acc.policy += st.policy;
            acc.value += st.value;
            acc.entropy += st.entropy;
            acc.kl_ref += st.kl_ref;
            acc.clip_frac += st.clip_frac;
        }
        const double inv = 1.0 / static_cast<double>(n_mb);
        const double epoch_kl = kl_sum * inv;
        rec.approx_kl = epoch_kl;
        rec.policy_loss = acc.policy * inv;
        rec.value_loss = acc.value * inv;
        rec.entropy = acc.entropy * inv;
        rec.kl_ref = acc.kl_ref * inv;
        rec.clip_frac = acc.clip_frac * inv;
        ++rec.epochs_run;

        const bool injected = ctrl_.epoch_noise(model_, ro.experts_used, noise_rng_);
        if (injected)
            ++rec.noise_epochs;
        if (hooks.on_epoch_end)
            hooks.on_epoch_end(*this, iter_, epoch, injected);
        if (!all_finite(model_.actor_params()) || !all_finite(model_.critic_params()))
            abort_with_dump("non-finite parameters after epoch " + std::to_string(epoch), rec);
        if (epoch_kl > cs.target_kl)
            break;
    }
}

void Trainer::diagnose(const Rollout& ro, IterationRecord& rec) const
{
    const auto p = diag::plasticity(model_.actor(), model_.actor_params(), ro.obs, cfg_.diag_rows, cfg_.dnf_delta);
    rec.dnf = p.dnf;
    rec.dnf_raw = p.dnf_raw;
    rec.stable_rank = p.stable_rank;
}

void Trainer::abort_with_dump(const std::string& what, const IterationRecord& rec) const
{
    std::string where;
    if (!opts_.out_dir.empty()) {
        json d;
        d["error"] = what;
        d["iteration"] = json::parse(rec.to_json());
        d["actor_param_norm"] = std::sqrt(model_.actor_params().squared_norm());
        d["critic_param_norm"] = std::sqrt(model_.critic_params().squared_norm());
        const Eigen::RowVectorXd ls = model_.log_std();
        d["log_std"] = std::vector<double>(ls.data(), ls.data() + ls.size());
        const auto path = opts_.out_dir / "abort_dump.json";
        std::ofstream(path) << d.dump(2) << '\n';
        where = " (diagnostic dump: " + path.string() + ")";
    }
    throw TrainingAbort(what + where);
}

} // namespace uavmoe::train
