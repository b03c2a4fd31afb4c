#include "uavmoe/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavmoe/checkpoint.hpp"
#include "uavmoe/errors.hpp"

namespace uavmoe::cli {

using json = nlohmann::json;

TrainResult run_training(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* progress)
{
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    for (const char* f : {"metrics.jsonl", "episodes.jsonl"})
        std::filesystem::remove(out_dir / f);
    {
        std::ofstream os(out_dir / "config.cfg");
        os << to_ini(cfg);
        if (!os)
            throw std::runtime_error("cannot write " + (out_dir / "config.cfg").string());
    }

    train::TrainerOptions opts;
    opts.out_dir = out_dir;
    opts.progress = progress;
    json meta;
    meta["obs_dim"] = cfg.scenario.obs_dim();
    meta["n_experts"] = cfg.model.n_experts;
    meta["top_k"] = cfg.model.top_k;
    meta["hidden"] = cfg.model.hidden;
    opts.run_metadata = meta.dump();

    train::Trainer trainer(cfg.scenario, cfg.train, cfg.algo, cfg.seed, cfg.resolved_model(), opts);
    trainer.run();
    return {out_dir, trainer.records()};
}

std::string EvalSummary::to_json() const
{
    json j;
    j["episodes"] = episodes;
    auto put = [&](const char* name, const diag::IqmStat& s) { j[name] = {{"iqm", s.iqm}, {"stderr", s.stderr_}}; };
    put("Return", return_);
    put("ServedNumber", served);
    put("Collisions", collisions);
    put("EnergyUse", energy_j);
    put("Coverage", coverage);
    return j.dump(2);
}

EvalSummary evaluate(const RunConfig& cfg_in, const std::filesystem::path& checkpoint, std::size_t episodes,
                     std::uint64_t seed)
{
    if (episodes == 0)
        throw ConfigError("episodes", "must be >= 1");
    RunConfig cfg = cfg_in;
    cfg.validate();
    train::resolve_phase_length(cfg.scenario, cfg.train);

    nn::PolicyModel model(cfg.resolved_model(), cfg.algo);
    nn::load_checkpoint(checkpoint, model);

    env::Environment environment(cfg.scenario);
    auto reset = environment.reset(seed);
    std::vector<env::Observation> obs = reset.observations;

    std::vector<double> ret, served, coll, energy, cov;
    nn::ForwardOptions fo;
    const std::size_t n_ag = environment.n_agents();
    const Eigen::Index d = model.config().obs_dim;
    std::vector<env::Action> actions(n_ag);

    for (std::size_t ep = 0; ep < episodes; ++ep) {
        if (ep > 0) {
            auto& st = environment.mutable_state();
            st.time_step = (ep % env::kPhaseCount) * cfg.scenario.phases.phase_len_steps;
            obs = environment.next_episode().observations;
        }
        double r = 0.0, s = 0.0, c = 0.0, e = 0.0, v = 0.0;
        std::size_t steps = 0;
        bool done = false;
        while (!done) {
            Eigen::MatrixXd x(static_cast<Eigen::Index>(n_ag), d);
            for (std::size_t a = 0; a < n_ag; ++a)
                x.row(static_cast<Eigen::Index>(a)) =
                    Eigen::Map<const Eigen::RowVectorXd>(obs[a].data(), static_cast<Eigen::Index>(obs[a].size()));
            const auto out = model.actor().forward(model.actor_params(), x, fo);
            for (std::size_t a = 0; a < n_ag; ++a)
                actions[a] = env::Action(out.output(static_cast<Eigen::Index>(a), 0),
                                         out.output(static_cast<Eigen::Index>(a), 1));
            auto step = environment.step(actions);
            r += step.rewards.at(0);
            s += static_cast<double>(step.info.served);
            c += static_cast<double>(step.info.collisions);
            for (double ej : step.info.energy_j)
                e += ej;
            v += step.info.coverage;
            ++steps;
            done = step.done;
            obs = std::move(step.observations);
        }
        ret.push_back(r);
        served.push_back(s / static_cast<double>(steps));
        coll.push_back(c);
        energy.push_back(e);
        cov.push_back(v / static_cast<double>(steps));
    }

    EvalSummary sum;
    sum.episodes = episodes;
    sum.return_ = diag::iqm_with_stderr(ret);
    sum.served = diag::iqm_with_stderr(served);
    sum.collisions = diag::iqm_with_stderr(coll);
    sum.energy_j = diag::iqm_with_stderr(energy);
    sum.coverage = diag::iqm_with_stderr(cov);
    return sum;
}

double final_iqm(const std::vector<train::IterationRecord>& records, const std::string& metric, double fraction)
{
    if (records.empty())
        throw std::invalid_argument("final_iqm: no records");
    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(records.size()))));
    std::vector<double> v;
    for (std::size_t i = records.size() - keep; i < records.size(); ++i) {
        const auto j = json::parse(records[i].to_json());
        if (!j.contains(metric))
            throw std::invalid_argument("final_iqm: unknown metric '" + metric + "'");
        if (j[metric].is_number())
            v.push_back(j[metric].get<double>());
    }
    if (v.empty())
        throw std::runtime_error("final_iqm: metric '" + metric + "' has no values in the window");
    return diag::iqm(v);
}

static std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string sweep_noise(const RunConfig& cfg, const std::vector<double>& gammas, const std::filesystem::path& out_root,
                        std::ostream* progress)
{
    if (gammas.empty())
        throw ConfigError("gammas", "need at least one noise scale");
    std::ostringstream table;
    table << "gamma\tserved_iqm\treturn_iqm\trun_dir\n";
    for (double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g))
            throw ConfigError("gammas", "noise scales must be finite and non-negative");
        RunConfig c = cfg;
        c.train.noise_scale = g;
        const auto dir = out_root / ("gamma_" + fmt(g));
        const auto res = run_training(c, dir, progress);
        table << fmt(g) << '\t' << fmt(final_iqm(res.records, "served", 1.0 / 3.0)) << '\t'
              << fmt(final_iqm(res.records, "return_mean", 1.0 / 3.0)) << '\t' << dir.string() << '\n';
    }
    return table.str();
}

void disable_component(RunConfig& cfg, const std::string& component)
{
    auto& f = cfg.train.features;
    if (component == "none")
        return;
    if (component == "entropy_anneal")
        f.entropy_anneal = false;
    else if (component == "logstd_reset")
        f.logstd_reset = false;
    else if (component == "lr_anneal")
        f.lr_anneal = false;
    else if (component == "noise")
        f.noise = false;
    else
        throw ConfigError("component", "unknown ablation component '" + component +
                                           "' (expected entropy_anneal, logstd_reset, lr_anneal, noise or none)");
}

std::string ablate(const RunConfig& cfg, const std::vector<std::string>& components,
                   const std::filesystem::path& out_root, std::ostream* progress)
{
    for (const auto& comp : components) {
        RunConfig probe = cfg;
        disable_component(probe, comp);
    }
    RunConfig full = cfg;
    full.algo = nn::Algo::pemamoe;
    const auto base = run_training(full, out_root / "full", progress);
    const double full_iqm = final_iqm(base.records, "return_mean", 1.0 / 3.0);

    std::ostringstream table;
    table << "component\tfull_return_iqm\tablated_return_iqm\trelative_change\n";
    for (const auto& comp : components) {
        double ablated = full_iqm;
        if (comp != "none") {
            RunConfig c = full;
            disable_component(c, comp);
            const auto res = run_training(c, out_root / ("minus_" + comp), progress);
            ablated = final_iqm(res.records, "return_mean", 1.0 / 3.0);
        }
        const double rel = full_iqm != 0.0 ? (ablated - full_iqm) / std::abs(full_iqm) : 0.0;
        table << comp << '\t' << fmt(full_iqm) << '\t' << fmt(ablated) << '\t' << fmt(rel) << '\n';
    }
    return table.str();
}

std::string diagnose_runs(const std::vector<std::filesystem::path>& run_dirs, double fraction)
{
    if (run_dirs.empty())
        throw ConfigError("runs", "need at least one run directory");
    std::vector<std::pair<std::string, std::map<std::string, double>>> rows;
    for (const auto& dir : run_dirs) {
        const auto log = dir / "metrics.jsonl";
        if (!std::filesystem::exists(log))
            throw ConfigError(dir.string(), "no metrics.jsonl in run directory");
        rows.emplace_back(dir.filename().string(), diag::summarize_metric_log(log, fraction));
    }
    return diag::comparison_table(rows, diag::comparison_metrics());
}

} // namespace uavmoe::cli
