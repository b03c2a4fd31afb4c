#include "uavmoe/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <cmath>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "uavmoe/errors.hpp"
#include "uavmoe/trainer.hpp"

namespace uavmoe::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- scalar codecs ----

template <class T> struct Codec;

template <> struct Codec<double>
{
    static double parse(const std::string& key, const std::string& s)
    {
        const std::string t = trim(s);
        double v = 0.0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            throw ConfigError(key, "expected a real number, got '" + s + "'");
        return v;
    }
    static std::string format(double v) { return fmt_double(v); }
};

template <> struct Codec<std::size_t>
{
    static std::size_t parse(const std::string& key, const std::string& s)
    {
        const std::string t = trim(s);
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
        return v;
    }
    static std::string format(std::size_t v) { return std::to_string(v); }
};

template <> struct Codec<int>
{
    static int parse(const std::string& key, const std::string& s)
    {
        const std::string t = trim(s);
        int v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            throw ConfigError(key, "expected an integer, got '" + s + "'");
        return v;
    }
    static std::string format(int v) { return std::to_string(v); }
};

template <> struct Codec<bool>
{
    static bool parse(const std::string& key, const std::string& s)
    {
        std::string t = trim(s);
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
        if (t == "true" || t == "1" || t == "yes" || t == "on")
            return true;
        if (t == "false" || t == "0" || t == "no" || t == "off")
            return false;
        throw ConfigError(key, "expected a boolean, got '" + s + "'");
    }
    static std::string format(bool v) { return v ? "true" : "false"; }
};

template <> struct Codec<std::string>
{
    static std::string parse(const std::string&, const std::string& s) { return trim(s); }
    static std::string format(const std::string& v) { return v; }
};

template <class T, std::size_t N> struct Codec<std::array<T, N>>
{
    static std::array<T, N> parse(const std::string& key, const std::string& s)
    {
        std::array<T, N> out{};
        std::stringstream ss(s);
        std::string item;
        std::size_t i = 0;
        while (std::getline(ss, item, ',')) {
            if (i >= N)
                throw ConfigError(key, "expected " + std::to_string(N) + " comma-separated values");
            out[i++] = Codec<T>::parse(key, item);
        }
        if (i != N)
            throw ConfigError(key, "expected " + std::to_string(N) + " comma-separated values");
        return out;
    }
    static std::string format(const std::array<T, N>& v)
    {
        std::string s;
        for (std::size_t i = 0; i < N; ++i)
            s += (i ? ", " : "") + Codec<T>::format(v[i]);
        return s;
    }
};

template <> struct Codec<nn::Algo>
{
    static nn::Algo parse(const std::string& key, const std::string& s)
    {
        try {
            return nn::algo_from_name(trim(s));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key, e.what());
        }
    }
    static std::string format(nn::Algo a) { return nn::algo_name(a); }
};

template <> struct Codec<nn::Fusion>
{
    static nn::Fusion parse(const std::string& key, const std::string& s)
    {
        const std::string t = trim(s);
        if (t == "trunk")
            return nn::Fusion::trunk;
        if (t == "means")
            return nn::Fusion::means;
        throw ConfigError(key, "expected 'trunk' or 'means', got '" + s + "'");
    }
    static std::string format(nn::Fusion f) { return f == nn::Fusion::trunk ? "trunk" : "means"; }
};

template <> struct Codec<Eigen::Index>
{
    static Eigen::Index parse(const std::string& key, const std::string& s)
    {
        const auto v = Codec<std::size_t>::parse(key, s);
        return static_cast<Eigen::Index>(v);
    }
    static std::string format(Eigen::Index v) { return std::to_string(v); }
};

struct Binding
{
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T, class F> Binding bind(std::string key, F access)
{
    Binding b;
    b.key = key;
    b.set = [key, access](RunConfig& c, const std::string& v) { access(c) = Codec<T>::parse(key, v); };
    b.get = [access](const RunConfig& c) { return Codec<T>::format(access(const_cast<RunConfig&>(c))); };
    return b;
}

#define UAVMOE_BIND(T, KEY, EXPR) bind<T>(KEY, [](RunConfig& c) -> T& { return EXPR; })

const std::vector<Binding>& bindings()
{
    using A3 = std::array<double, 3>;
    using I3 = std::array<int, 3>;
    using std::size_t;
    static const std::vector<Binding> b = {
        UAVMOE_BIND(nn::Algo, "run.algo", c.algo),
        UAVMOE_BIND(std::size_t, "run.seed", c.seed),
        UAVMOE_BIND(std::string, "run.out_dir", c.out_dir),

        UAVMOE_BIND(double, "env.area_m", c.scenario.area_m),
        UAVMOE_BIND(size_t, "env.n_uavs", c.scenario.n_uavs),
        UAVMOE_BIND(size_t, "env.n_users", c.scenario.n_users),
        UAVMOE_BIND(double, "env.dt_s", c.scenario.dt_s),
        UAVMOE_BIND(size_t, "env.episode_len", c.scenario.episode_len),
        UAVMOE_BIND(size_t, "env.max_users_per_uav", c.scenario.max_users_per_uav),
        UAVMOE_BIND(double, "env.altitude_m", c.scenario.altitude_m),
        UAVMOE_BIND(double, "env.user_height_m", c.scenario.user_height_m),
        UAVMOE_BIND(double, "env.max_step_m", c.scenario.max_step_m),
        UAVMOE_BIND(double, "env.battery_capacity_j", c.scenario.battery_capacity_j),
        UAVMOE_BIND(double, "env.rate_scale_bps", c.scenario.rate_scale_bps),

        UAVMOE_BIND(size_t, "phase.phase_len_steps", c.scenario.phases.phase_len_steps),
        UAVMOE_BIND(size_t, "phase.cycles", c.scenario.phases.cycles),
        UAVMOE_BIND(A3, "phase.demand_thresholds_mbps", c.scenario.phases.demand_thresholds_mbps),
        UAVMOE_BIND(A3, "phase.qoe_weights", c.scenario.phases.qoe_weights),
        UAVMOE_BIND(double, "phase.energy_weight", c.scenario.phases.energy_weight),
        UAVMOE_BIND(double, "phase.collision_weight", c.scenario.phases.collision_weight),
        UAVMOE_BIND(A3, "phase.overlap_weight", c.scenario.phases.overlap_weight),
        UAVMOE_BIND(double, "phase.overlap_sigma_m", c.scenario.phases.overlap_sigma_m),
        UAVMOE_BIND(A3, "phase.service_radius_m", c.scenario.phases.service_radius_m),
        UAVMOE_BIND(I3, "phase.reuse_factor", c.scenario.phases.reuse_factor),
        UAVMOE_BIND(double, "phase.d_min_m", c.scenario.phases.d_min_m),

        UAVMOE_BIND(bool, "mobility.user_moves", c.scenario.mobility.user_moves),
        UAVMOE_BIND(A3, "mobility.user_speed", c.scenario.mobility.user_speed),
        UAVMOE_BIND(A3, "mobility.direction_jitter", c.scenario.mobility.direction_jitter),
        UAVMOE_BIND(A3, "mobility.follow_gain", c.scenario.mobility.follow_gain),
        UAVMOE_BIND(double, "mobility.gm_memory", c.scenario.mobility.gm_memory),
        UAVMOE_BIND(double, "mobility.gm_noise", c.scenario.mobility.gm_noise),
        UAVMOE_BIND(double, "mobility.follow_noise", c.scenario.mobility.follow_noise),
        UAVMOE_BIND(double, "mobility.center_speed_factor", c.scenario.mobility.center_speed_factor),
        UAVMOE_BIND(size_t, "mobility.groups", c.scenario.mobility.groups),
        UAVMOE_BIND(size_t, "mobility.retarget_period", c.scenario.mobility.retarget_period),

        UAVMOE_BIND(double, "channel.fc_ghz", c.scenario.radio.fc_ghz),
        UAVMOE_BIND(double, "channel.rician_k_db", c.scenario.radio.rician_k_db),
        UAVMOE_BIND(double, "channel.nakagami_m", c.scenario.radio.nakagami_m),
        UAVMOE_BIND(double, "channel.shadow_sigma_los_db", c.scenario.radio.shadow_sigma_los_db),
        UAVMOE_BIND(double, "channel.shadow_sigma_nlos_db", c.scenario.radio.shadow_sigma_nlos_db),
        UAVMOE_BIND(double, "channel.g_tx_db", c.scenario.radio.g_tx_db),
        UAVMOE_BIND(double, "channel.g_rx_db", c.scenario.radio.g_rx_db),
        UAVMOE_BIND(double, "channel.n0_w_per_hz", c.scenario.radio.n0),
        UAVMOE_BIND(double, "channel.bandwidth_hz", c.scenario.radio.bandwidth_total_hz),
        UAVMOE_BIND(double, "channel.rho_adj", c.scenario.radio.rho_adj),
        UAVMOE_BIND(double, "channel.alpha_impl", c.scenario.radio.alpha_impl),
        UAVMOE_BIND(double, "channel.p_max_w", c.scenario.radio.p_max_w),
        UAVMOE_BIND(double, "channel.eps_gain", c.scenario.radio.eps_gain),
        UAVMOE_BIND(bool, "channel.small_scale_fading", c.scenario.radio.small_scale_fading),

        UAVMOE_BIND(double, "energy.p0_w", c.scenario.rotor.p0_w),
        UAVMOE_BIND(double, "energy.pi_w", c.scenario.rotor.pi_w),
        UAVMOE_BIND(double, "energy.u_tip", c.scenario.rotor.u_tip),
        UAVMOE_BIND(double, "energy.v0_hover", c.scenario.rotor.v0_hover),
        UAVMOE_BIND(double, "energy.d0", c.scenario.rotor.d0),
        UAVMOE_BIND(double, "energy.rho_air", c.scenario.rotor.rho_air),
        UAVMOE_BIND(double, "energy.solidity", c.scenario.rotor.solidity_s),
        UAVMOE_BIND(double, "energy.disk_area", c.scenario.rotor.disk_area_a),

        UAVMOE_BIND(int, "model.n_experts", c.model.n_experts),
        UAVMOE_BIND(int, "model.top_k", c.model.top_k),
        UAVMOE_BIND(Eigen::Index, "model.hidden", c.model.hidden),
        UAVMOE_BIND(nn::Fusion, "model.fusion", c.model.fusion),
        UAVMOE_BIND(double, "model.logstd_init", c.model.logstd_init),

        UAVMOE_BIND(size_t, "train.total_steps", c.train.total_steps),
        UAVMOE_BIND(size_t, "train.rollout_len", c.train.rollout_len),
        UAVMOE_BIND(size_t, "train.minibatches", c.train.minibatches),
        UAVMOE_BIND(size_t, "train.update_epochs", c.train.update_epochs),
        UAVMOE_BIND(double, "train.lr", c.train.lr),
        UAVMOE_BIND(double, "train.weight_decay", c.train.weight_decay),
        UAVMOE_BIND(double, "train.adam_beta1", c.train.adam_beta1),
        UAVMOE_BIND(double, "train.adam_beta2", c.train.adam_beta2),
        UAVMOE_BIND(double, "train.adam_eps", c.train.adam_eps),
        UAVMOE_BIND(double, "train.gamma", c.train.gamma),
        UAVMOE_BIND(double, "train.gae_lambda", c.train.gae_lambda),
        UAVMOE_BIND(double, "train.clip", c.train.clip),
        UAVMOE_BIND(double, "train.vf_coef", c.train.vf_coef),
        UAVMOE_BIND(double, "train.ent_start", c.train.ent_start),
        UAVMOE_BIND(double, "train.ent_end", c.train.ent_end),
        UAVMOE_BIND(double, "train.ent_anneal_portion", c.train.ent_anneal_portion),
        UAVMOE_BIND(double, "train.target_kl", c.train.target_kl),
        UAVMOE_BIND(double, "train.max_grad_norm", c.train.max_grad_norm),
        UAVMOE_BIND(double, "train.kl_ref_init", c.train.kl_ref_init),
        UAVMOE_BIND(double, "train.kl_ref_decay", c.train.kl_ref_decay),
        UAVMOE_BIND(double, "train.kl_ref_release", c.train.kl_ref_release),
        UAVMOE_BIND(size_t, "train.k_warm", c.train.k_warm),
        UAVMOE_BIND(size_t, "train.k_freeze_router", c.train.k_freeze_router),
        UAVMOE_BIND(double, "train.phase_lr_mult", c.train.phase_lr_mult),
        UAVMOE_BIND(size_t, "train.lr_warmup_iters", c.train.lr_warmup_iters),
        UAVMOE_BIND(double, "train.logstd_reset", c.train.logstd_reset),
        UAVMOE_BIND(size_t, "train.noise_epochs", c.train.noise_epochs),
        UAVMOE_BIND(double, "train.noise_scale", c.train.noise_scale),
        UAVMOE_BIND(double, "train.tau_min", c.train.tau_min),
        UAVMOE_BIND(double, "train.tau_max", c.train.tau_max),
        UAVMOE_BIND(double, "train.tau_kappa", c.train.tau_kappa),
        UAVMOE_BIND(double, "train.tau_beta", c.train.tau_beta),
        UAVMOE_BIND(double, "train.reward_scale", c.train.reward_scale),
        UAVMOE_BIND(size_t, "train.diag_every", c.train.diag_every),
        UAVMOE_BIND(size_t, "train.diag_rows", c.train.diag_rows),
        UAVMOE_BIND(double, "train.dnf_delta", c.train.dnf_delta),
        UAVMOE_BIND(size_t, "train.checkpoint_every", c.train.checkpoint_every),

        UAVMOE_BIND(bool, "controller.noise", c.train.features.noise),
        UAVMOE_BIND(bool, "controller.logstd_reset", c.train.features.logstd_reset),
        UAVMOE_BIND(bool, "controller.entropy_anneal", c.train.features.entropy_anneal),
        UAVMOE_BIND(bool, "controller.lr_anneal", c.train.features.lr_anneal),
        UAVMOE_BIND(bool, "controller.temperature", c.train.features.temperature),
        UAVMOE_BIND(bool, "controller.kl_ref", c.train.features.kl_ref),
        UAVMOE_BIND(bool, "controller.adam_reset", c.train.features.adam_reset),
        UAVMOE_BIND(bool, "controller.router_freeze", c.train.features.router_freeze),
        UAVMOE_BIND(bool, "controller.conservative_warm", c.train.features.conservative_warm),
    };
    return b;
}

#undef UAVMOE_BIND

const Binding& find_binding(const std::string& key)
{
    for (const auto& b : bindings())
        if (b.key == key)
            return b;
    throw ConfigError(key, "unknown configuration key");
}

} // namespace

void RunConfig::validate() const
{
    train.validate();
    env::ScenarioConfig resolved = scenario;
    train::resolve_phase_length(resolved, train);
    resolved.validate();
    if (model.n_experts < 1)
        throw ConfigError("model.n_experts", "must be >= 1");
    if (model.top_k < 1 || model.top_k > model.n_experts)
        throw ConfigError("model.top_k", "must lie in [1, model.n_experts]");
    if (model.hidden < 1)
        throw ConfigError("model.hidden", "must be >= 1");
    if (!std::isfinite(model.logstd_init))
        throw ConfigError("model.logstd_init", "must be finite");
}

nn::ModelConfig RunConfig::resolved_model() const
{
    nn::ModelConfig m = model;
    m.obs_dim = static_cast<Eigen::Index>(scenario.obs_dim());
    m.state_dim = static_cast<Eigen::Index>(scenario.global_state_dim());
    return m;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value)
{
    find_binding(key).set(cfg, value);
}

std::string get_value(const RunConfig& cfg, const std::string& key) { return find_binding(key).get(cfg); }

void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError(assignment, "override must have the form section.key=value");
    set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& b : bindings())
        keys.push_back(b.key);
    return keys;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin, std::string("cannot parse configuration: ") + e.message() + " (line " +
                                      std::to_string(e.line()) + ")");
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "key outside of a [section]");
        for (const auto& [key, value] : body)
            set_value(cfg, section + "." + key, value.data());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError(path.string(), "cannot open configuration file");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

std::string to_ini(const RunConfig& cfg)
{
    std::ostringstream os;
    std::string section;
    for (const auto& b : bindings()) {
        const auto dot = b.key.find('.');
        const std::string s = b.key.substr(0, dot);
        if (s != section) {
            if (!section.empty())
                os << '\n';
            os << '[' << s << "]\n";
            section = s;
        }
        os << b.key.substr(dot + 1) << " = " << b.get(cfg) << '\n';
    }
    return os.str();
}

} // namespace uavmoe::cli
