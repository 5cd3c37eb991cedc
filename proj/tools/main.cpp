#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "urbanrl/analysis.hpp"
#include "urbanrl/errors.hpp"
#include "urbanrl/kv.hpp"
#include "urbanrl/numfmt.hpp"
#include "urbanrl/svg.hpp"
#include "urbanrl/train.hpp"

using namespace urbanrl;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("URBANRL_OUT");
    return env && *env ? env : ".";
}

// --------------------------------------------------------------------------
// key=value override plumbing

double to_double(const std::string& v, const std::string& key) {
    return parse_double(v, "override '" + key + "'");
}
long long to_int(const std::string& v, const std::string& key) {
    return parse_int(v, "override '" + key + "'");
}
bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("override '" + key + "': expected true/false");
}

void apply_reward_key(env::RewardConfig& c, const std::string& key, const std::string& value) {
    if (key == "w") c.w = to_double(value, key);
    else if (key == "lambda_p") c.lambda_p = to_double(value, key);
    else if (key == "lambda_t") c.lambda_t = to_double(value, key);
    else if (key == "t_comfort_min_c") c.t_comfort_min_k = to_double(value, key) + 273.15;
    else if (key == "t_comfort_max_c") c.t_comfort_max_k = to_double(value, key) + 273.15;
    else if (key == "gamma") c.gamma = to_double(value, key);
    else if (key == "episode_steps") c.episode_steps = to_int(value, key);
    else throw ConfigError("unknown reward key '" + key + "'");
}

void apply_qlearning_key(agents::QLearningConfig& c, const std::string& key,
                         const std::string& value) {
    if (key == "alpha") c.alpha = to_double(value, key);
    else if (key == "gamma") c.gamma = to_double(value, key);
    else if (key == "max_eps") c.max_eps = to_double(value, key);
    else if (key == "min_eps") c.min_eps = to_double(value, key);
    else if (key == "decay") c.decay = to_double(value, key);
    else throw ConfigError("unknown qlearning key '" + key + "'");
}

void apply_dqn_key(agents::DqnConfig& c, const std::string& key, const std::string& value) {
    if (key == "hidden") c.hidden = static_cast<int>(to_int(value, key));
    else if (key == "lr") c.lr = to_double(value, key);
    else if (key == "gamma") c.gamma = to_double(value, key);
    else if (key == "buffer_capacity") c.buffer_capacity = static_cast<std::size_t>(to_int(value, key));
    else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(value, key));
    else if (key == "tau") c.tau = to_double(value, key);
    else if (key == "learning_start") c.learning_start = to_int(value, key);
    else if (key == "train_every") c.train_every = static_cast<int>(to_int(value, key));
    else if (key == "target_update_every") c.target_update_every = static_cast<int>(to_int(value, key));
    else if (key == "eps_start") c.eps_start = to_double(value, key);
    else if (key == "eps_end") c.eps_end = to_double(value, key);
    else if (key == "exploration_fraction") c.exploration_fraction = to_double(value, key);
    else throw ConfigError("unknown dqn key '" + key + "'");
}

void apply_sac_key(agents::SacConfig& c, const std::string& key, const std::string& value) {
    if (key == "hidden") c.hidden = static_cast<int>(to_int(value, key));
    else if (key == "q_lr") c.q_lr = to_double(value, key);
    else if (key == "policy_lr") c.policy_lr = to_double(value, key);
    else if (key == "gamma") c.gamma = to_double(value, key);
    else if (key == "buffer_capacity") c.buffer_capacity = static_cast<std::size_t>(to_int(value, key));
    else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(value, key));
    else if (key == "tau") c.tau = to_double(value, key);
    else if (key == "learning_start") c.learning_start = to_int(value, key);
    else if (key == "policy_update_every") c.policy_update_every = static_cast<int>(to_int(value, key));
    else if (key == "target_update_every") c.target_update_every = static_cast<int>(to_int(value, key));
    else if (key == "alpha_init") c.alpha_init = to_double(value, key);
    else if (key == "autotune_alpha") c.autotune_alpha = to_bool(value, key);
    else if (key == "target_entropy") c.target_entropy = to_double(value, key);
    else if (key == "log_std_min") c.log_std_min = to_double(value, key);
    else if (key == "log_std_max") c.log_std_max = to_double(value, key);
    else throw ConfigError("unknown sac key '" + key + "'");
}

void apply_agent_key(train::RunConfig& cfg, const std::string& key, const std::string& value) {
    if (cfg.agent_kind == "qlearning") apply_qlearning_key(cfg.qlearning, key, value);
    else if (cfg.agent_kind == "dqn") apply_dqn_key(cfg.dqn, key, value);
    else if (cfg.agent_kind == "sac") apply_sac_key(cfg.sac, key, value);
    else throw ConfigError("--set agent.* requires --agent");
}

void apply_set_overrides(train::RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key.rfind("reward.", 0) == 0) apply_reward_key(cfg.reward, key.substr(7), value);
        else if (key.rfind("agent.", 0) == 0) apply_agent_key(cfg, key.substr(6), value);
        else if (key.rfind("bem.", 0) == 0) cfg.building.set_field(key.substr(4), value);
        else throw ConfigError("unknown override namespace in '" + key +
                               "' (use bem.*, reward.*, agent.*)");
    }
}

// --------------------------------------------------------------------------
// shared option bundles

struct CommonConfig {
    std::string bem_path, reward_path, agent_config_path;
    std::vector<std::string> sets;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonConfig& c) {
    cmd->add_option("--bem", c.bem_path, "building parameter file (key=value, SI units)");
    cmd->add_option("--reward", c.reward_path,
                    "reward/episode config file (w, lambda_p, lambda_t, t_comfort_min_c, "
                    "t_comfort_max_c, gamma, episode_steps)");
    cmd->add_option("--set", c.sets,
                    "override as namespace.key=value (bem.*, reward.*, agent.*); repeatable")
        ->take_all();
    cmd->add_option("--out", c.out_dir, "output directory (default: $URBANRL_OUT or '.')");
}

void finish_config(train::RunConfig& cfg, const CommonConfig& c) {
    if (!c.bem_path.empty()) cfg.building = bem::BuildingParams::from_file(c.bem_path);
    if (!c.reward_path.empty()) cfg.reward = env::RewardConfig::from_file(c.reward_path);
    if (!c.agent_config_path.empty()) {
        const KvFile kv = KvFile::from_file(c.agent_config_path);
        for (const auto& [k, v] : kv.entries()) apply_agent_key(cfg, k, v);
    }
    apply_set_overrides(cfg, c.sets);
    cfg.out_dir = c.out_dir.empty() ? default_out_root() : c.out_dir;
}

data::ForcingSeries forcing_for_eval(const std::string& city, const std::string& forcing_path,
                                     long episode_steps) {
    if (!forcing_path.empty()) return data::load_forcing_csv(forcing_path);
    if (city.empty()) throw ConfigError("need --city or --forcing");
    return data::city_eval_forcing(data::find_city(city),
                                   static_cast<std::size_t>(episode_steps));
}

void write_trace_csv(const std::string& path, const train::EvalResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "step,energy_term,comfort_term,reward\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        out << i << ',' << format_double(result.trace.energy[i]) << ','
            << format_double(result.trace.comfort[i]) << ',' << format_double(result.rewards[i])
            << "\n";
    }
}

void write_eval_csv(const std::string& path, const train::EvalResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "episode,mean_reward\n";
    for (std::size_t i = 0; i < result.episode_means.size(); ++i)
        out << (i + 1) << ',' << format_double(result.episode_means[i]) << "\n";
}

// --------------------------------------------------------------------------
// subcommand runners

struct EvalArgs {
    std::string city, forcing, policy, qtable, dqn, default_city, baseline_city;
    int episodes = 3;
    bool svg = false;
    CommonConfig common;
};

train::Controller controller_from(const EvalArgs& a) {
    int sources = 0;
    sources += !a.policy.empty();
    sources += !a.qtable.empty();
    sources += !a.dqn.empty();
    sources += !a.default_city.empty();
    if (sources != 1)
        throw ConfigError(
            "pick exactly one of --policy, --qtable, --dqn, --default-controller");
    if (!a.policy.empty()) return train::make_policy_controller(policy_io::load_policy(a.policy));
    if (!a.qtable.empty()) return train::make_qtable_controller(agents::QTable::load(a.qtable));
    if (!a.dqn.empty())
        return train::make_dqn_controller(agents::DqnAgent::load(a.dqn, 0).q_network());
    return train::make_default_controller(a.default_city);
}

int run_evaluate(const EvalArgs& a) {
    train::RunConfig cfg;
    cfg.agent_kind = "sac"; // placeholder for override plumbing
    CommonConfig common = a.common;
    finish_config(cfg, common);
    std::filesystem::create_directories(cfg.out_dir);

    const data::ForcingSeries forcing =
        forcing_for_eval(a.city, a.forcing, cfg.reward.episode_steps);
    const train::EvalResult result =
        train::evaluate(controller_from(a), forcing, cfg.building, cfg.reward, a.episodes);

    write_eval_csv(cfg.out_dir + "/eval.csv", result);
    write_trace_csv(cfg.out_dir + "/trace.csv", result);
    std::cout << "mean_reward " << format_double(result.mean_reward) << " std "
              << format_double(result.std_reward) << "\n";

    if (!a.baseline_city.empty()) {
        const train::EvalResult base =
            train::evaluate(train::make_default_controller(a.baseline_city), forcing,
                            cfg.building, cfg.reward, a.episodes);
        const analysis::RewardDiffResult diff =
            analysis::reward_diff(result.trace, base.trace, cfg.reward);
        analysis::write_monthly_profile_csv(cfg.out_dir + "/monthly_profile.csv", diff);
        std::cout << "r_diff " << format_double(diff.r_diff) << "\n";
        if (a.svg) {
            analysis::LineSeries s;
            s.name = "r_diff";
            for (int m = 0; m < 12; ++m) {
                s.x.push_back(m + 1);
                s.y.push_back(diff.monthly[static_cast<std::size_t>(m)]);
            }
            analysis::write_line_chart_svg(cfg.out_dir + "/monthly_profile.svg",
                                           "Monthly reward difference", "month", "r_diff", {s});
        }
    }
    return 0;
}

struct SweepArgs {
    std::string city, forcing, policy, baseline_city;
    int episodes = 1;
    bool svg = false;
    CommonConfig common;
};

int run_sweep(const SweepArgs& a) {
    train::RunConfig cfg;
    cfg.agent_kind = "sac";
    CommonConfig common = a.common;
    finish_config(cfg, common);
    std::filesystem::create_directories(cfg.out_dir);
    if (a.policy.empty()) throw ConfigError("sweep requires --policy");
    const std::string baseline_city = a.baseline_city.empty() ? a.city : a.baseline_city;
    if (baseline_city.empty()) throw ConfigError("sweep requires --city or --baseline-city");

    const data::ForcingSeries forcing =
        forcing_for_eval(a.city.empty() ? baseline_city : a.city, a.forcing,
                         cfg.reward.episode_steps);
    const train::EvalResult rl =
        train::evaluate(train::make_policy_controller(policy_io::load_policy(a.policy)), forcing,
                        cfg.building, cfg.reward, a.episodes);
    const train::EvalResult base =
        train::evaluate(train::make_default_controller(baseline_city), forcing, cfg.building,
                        cfg.reward, a.episodes);

    analysis::write_weight_sweep_csv(cfg.out_dir + "/weight_sweep.csv", rl.trace, base.trace,
                                     cfg.reward);
    const analysis::Intersection w = analysis::weight_intersection(rl.trace, base.trace);
    switch (w.kind) {
        case analysis::Intersection::Kind::point:
            std::cout << "w* = " << format_double(w.w) << "\n";
            break;
        case analysis::Intersection::Kind::identical:
            std::cout << "w* = identical\n";
            break;
        default:
            std::cout << "w* = none\n";
    }
    if (a.svg) {
        analysis::LineSeries srl{"rl", {}, {}}, sbase{"default", {}, {}};
        for (int k = 0; k <= 100; ++k) {
            const double wv = k / 100.0;
            srl.x.push_back(wv);
            srl.y.push_back(analysis::reward_at_weight(rl.trace, wv, cfg.reward));
            sbase.x.push_back(wv);
            sbase.y.push_back(analysis::reward_at_weight(base.trace, wv, cfg.reward));
        }
        analysis::write_line_chart_svg(cfg.out_dir + "/weight_sweep.svg",
                                       "Reward vs weight", "w", "reward", {srl, sbase});
    }
    return 0;
}

struct TransferArgs {
    std::vector<std::string> policies; // city=path
    int episodes = 1;
    CommonConfig common;
};

int run_transfer(const TransferArgs& a) {
    train::RunConfig cfg;
    cfg.agent_kind = "sac";
    CommonConfig common = a.common;
    finish_config(cfg, common);
    std::filesystem::create_directories(cfg.out_dir);
    if (a.policies.size() < 2) throw ConfigError("transfer needs at least two city=path policies");

    analysis::TransferMatrix matrix;
    std::vector<policy_io::PolicyArtifact> artifacts;
    for (const auto& spec : a.policies) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--policy expects city=path, got '" + spec + "'");
        const std::string city = spec.substr(0, eq);
        data::find_city(city); // validates the name
        matrix.cities.push_back(city);
        artifacts.push_back(policy_io::load_policy(spec.substr(eq + 1)));
    }

    matrix.reward.assign(matrix.cities.size(), std::vector<double>(matrix.cities.size(), 0.0));
    matrix.baseline.assign(matrix.cities.size(), 0.0);
    for (std::size_t e = 0; e < matrix.cities.size(); ++e) {
        const data::ForcingSeries forcing = data::city_eval_forcing(
            data::find_city(matrix.cities[e]), static_cast<std::size_t>(cfg.reward.episode_steps));
        for (std::size_t m = 0; m < matrix.cities.size(); ++m) {
            matrix.reward[m][e] =
                train::evaluate(train::make_policy_controller(artifacts[m]), forcing,
                                cfg.building, cfg.reward, a.episodes)
                    .mean_reward;
        }
        matrix.baseline[e] =
            train::evaluate(train::make_default_controller(matrix.cities[e]), forcing,
                            cfg.building, cfg.reward, a.episodes)
                .mean_reward;
    }

    const auto scores = analysis::transfer_score(matrix);
    analysis::write_transfer_matrix_csv(cfg.out_dir + "/transfer_matrix.csv", matrix, scores);
    for (const auto& s : scores) std::cout << s.model << " " << s.total << "\n";
    return 0;
}

struct SimulateArgs {
    std::string city, forcing, default_city;
    double ac_c = 55.0, heat_c = -15.0, vent = 0.3;
    long steps = 0;
    CommonConfig common;
};

int run_simulate(const SimulateArgs& a) {
    train::RunConfig cfg;
    cfg.agent_kind = "sac";
    CommonConfig common = a.common;
    finish_config(cfg, common);
    std::filesystem::create_directories(cfg.out_dir);
    if (a.steps > 0) cfg.reward.episode_steps = a.steps;

    const data::ForcingSeries forcing =
        forcing_for_eval(a.city, a.forcing, cfg.reward.episode_steps);
    env::SetpointCommand cmd{a.ac_c + 273.15, a.heat_c + 273.15, a.vent};
    if (!a.default_city.empty()) cmd = env::default_controller(a.default_city);

    env::Environment environment(std::make_shared<data::ForcingSeries>(forcing), cfg.building,
                                 cfg.reward);
    environment.reset();
    std::ofstream out(cfg.out_dir + "/trajectory.csv", std::ios::binary);
    if (!out) throw IoError("cannot open trajectory.csv for writing");
    out << "step,t_canopy_k,t_indoor_k,f_cool_wm2,f_heat_wm2,f_vent_wm2,f_wasteheat_wm2,"
           "energy_term,comfort_term,reward\n";
    long step = 0;
    while (!environment.done()) {
        const double canopy =
            forcing.steps[static_cast<std::size_t>(step)].t_canopy_k;
        const env::StepOutcome o = environment.step(cmd);
        out << step << ',' << format_double(canopy) << ','
            << format_double(o.observation.t_indoor_k) << ','
            << format_double(o.fluxes.f_cool_wm2) << ',' << format_double(o.fluxes.f_heat_wm2)
            << ',' << format_double(o.fluxes.f_vent_wm2) << ','
            << format_double(o.fluxes.f_wasteheat_wm2) << ',' << format_double(o.energy_term)
            << ',' << format_double(o.comfort_term) << ',' << format_double(o.reward) << "\n";
        ++step;
    }
    std::cout << "wrote " << step << " steps\n";
    return 0;
}

struct GenForcingArgs {
    std::string city;
    long steps = data::kStepsPerYear;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_file;
    double mean_k = -1.0, annual_k = -1.0, diurnal_k = -1.0, noise_k = -1.0;
    long lag = -1;
};

int run_gen_forcing(const GenForcingArgs& a) {
    data::SyntheticClimateSpec spec;
    if (!a.city.empty()) spec = data::find_city(a.city).climate;
    if (a.mean_k >= 0.0) spec.mean_k = a.mean_k;
    if (a.annual_k >= 0.0) spec.annual_amplitude_k = a.annual_k;
    if (a.diurnal_k >= 0.0) spec.diurnal_amplitude_k = a.diurnal_k;
    if (a.noise_k >= 0.0) spec.noise_std_k = a.noise_k;
    if (a.lag >= 0) spec.inner_node_lag_steps = a.lag;
    if (a.seed_set) spec.seed = a.seed;
    if (a.out_file.empty()) throw ConfigError("gen-forcing requires --out FILE");

    const data::ForcingSeries series =
        data::generate_synthetic(spec, static_cast<std::size_t>(a.steps));
    data::write_forcing_csv(series, a.out_file);
    std::cout << "wrote " << series.size() << " steps to " << a.out_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate building-energy RL toolkit: train HVAC control agents, evaluate "
                 "and analyze policies"};
    app.require_subcommand(1);

    // ---- train ----
    train::RunConfig tcfg;
    CommonConfig tcommon;
    bool seed_given = false;
    auto* t = app.add_subcommand("train", "train an agent on a city or forcing file");
    t->add_option("--agent", tcfg.agent_kind, "agent kind: qlearning | dqn | sac")->required();
    t->add_option("--city", tcfg.city, "city preset (london, newyork, beijing, hongkong, singapore)");
    t->add_option("--forcing", tcfg.forcing_path, "training forcing CSV (overrides --city)");
    t->add_option("--eval-forcing", tcfg.eval_forcing_path, "evaluation forcing CSV");
    t->add_option("--episodes", tcfg.episodes, "training episodes (default 50)");
    t->add_option("--eval-episodes", tcfg.eval_episodes, "evaluation episodes (default 3)");
    auto* seed_opt = t->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t s) {
            tcfg.seed = s;
            seed_given = true;
        },
        "RNG seed (required)");
    seed_opt->required();
    t->add_option("--agent-config", tcommon.agent_config_path,
                  "agent hyperparameter file (key=value)");
    add_common(t, tcommon);

    // ---- evaluate ----
    EvalArgs eargs;
    auto* e = app.add_subcommand("evaluate", "roll out a policy or controller and report rewards");
    e->add_option("--city", eargs.city, "city preset for the evaluation year");
    e->add_option("--forcing", eargs.forcing, "forcing CSV (overrides --city)");
    e->add_option("--policy", eargs.policy, "SAC policy artifact (.sacpolicy)");
    e->add_option("--qtable", eargs.qtable, "Q-table dump file");
    e->add_option("--dqn", eargs.dqn, "DQN network checkpoint");
    e->add_option("--default-controller", eargs.default_city, "fixed per-city default set points");
    e->add_option("--baseline-city", eargs.baseline_city,
                  "also evaluate this city's default controller and report the reward difference");
    e->add_option("--episodes", eargs.episodes, "evaluation episodes (default 3)");
    e->add_flag("--svg", eargs.svg, "emit SVG charts next to the CSV reports");
    add_common(e, eargs.common);

    // ---- sweep ----
    SweepArgs sargs;
    auto* s = app.add_subcommand("sweep",
                                 "reward-weight sweep of a fixed policy against a default "
                                 "controller; finds the crossing weight");
    s->add_option("--policy", sargs.policy, "SAC policy artifact")->required();
    s->add_option("--city", sargs.city, "forcing city (eval year)");
    s->add_option("--forcing", sargs.forcing, "forcing CSV (overrides --city)");
    s->add_option("--baseline-city", sargs.baseline_city,
                  "default-controller city (defaults to --city)");
    s->add_option("--episodes", sargs.episodes, "rollout episodes (default 1)");
    s->add_flag("--svg", sargs.svg, "emit weight_sweep.svg");
    add_common(s, sargs.common);

    // ---- transfer ----
    TransferArgs xargs;
    auto* x = app.add_subcommand("transfer",
                                 "evaluate city-trained policies across all listed cities and "
                                 "rank transferability");
    x->add_option("--policy", xargs.policies, "city=path, repeatable (one per model city)")
        ->take_all();
    x->add_option("--episodes", xargs.episodes, "rollout episodes per cell (default 1)");
    add_common(x, xargs.common);

    // ---- simulate ----
    SimulateArgs margs;
    auto* m = app.add_subcommand("simulate",
                                 "raw building-model trajectory under fixed set points");
    m->add_option("--city", margs.city, "forcing city (eval year)");
    m->add_option("--forcing", margs.forcing, "forcing CSV (overrides --city)");
    m->add_option("--ac-c", margs.ac_c, "AC set point (deg C, default 55 = off)");
    m->add_option("--heat-c", margs.heat_c, "heating set point (deg C, default -15 = off)");
    m->add_option("--vent", margs.vent, "ventilation rate (air changes per hour, default 0.3)");
    m->add_option("--default-controller", margs.default_city,
                  "use this city's default set points instead of --ac-c/--heat-c/--vent");
    m->add_option("--steps", margs.steps, "steps to simulate (default: episode_steps)");
    add_common(m, margs.common);

    // ---- gen-forcing ----
    GenForcingArgs gargs;
    auto* g = app.add_subcommand("gen-forcing", "generate a synthetic forcing CSV");
    g->add_option("--city", gargs.city, "start from this city's climate spec");
    g->add_option("--steps", gargs.steps, "number of half-hour steps (default 17520)");
    auto* gseed = g->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t v) {
            gargs.seed = v;
            gargs.seed_set = true;
        },
        "RNG seed");
    (void)gseed;
    g->add_option("--out", gargs.out_file, "output CSV path")->required();
    g->add_option("--mean-k", gargs.mean_k, "mean canopy temperature (K)");
    g->add_option("--annual-k", gargs.annual_k, "annual amplitude (K)");
    g->add_option("--diurnal-k", gargs.diurnal_k, "diurnal amplitude (K)");
    g->add_option("--noise-k", gargs.noise_k, "Gaussian noise standard deviation (K)");
    g->add_option("--lag", gargs.lag, "inner-node lag (steps)");

    // ---- export ----
    std::string exp_in, exp_out;
    auto* ex = app.add_subcommand("export", "validate and canonicalize a policy artifact");
    ex->add_option("--policy", exp_in, "input .sacpolicy file")->required();
    ex->add_option("--out", exp_out, "output .sacpolicy file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(t)) {
            finish_config(tcfg, tcommon);
            if (!seed_given) throw ConfigError("train requires --seed");
            const train::RunLog log = train::train_run(tcfg);
            std::cout << "episodes " << log.episodes.size() << " total_steps " << log.total_steps
                      << "\n";
            std::cout << "eval_mean " << format_double(log.eval_mean) << " eval_std "
                      << format_double(log.eval_std) << "\n";
            std::cout << "checkpoint " << log.checkpoint_path << "\n";
            return 0;
        }
        if (app.got_subcommand(e)) return run_evaluate(eargs);
        if (app.got_subcommand(s)) return run_sweep(sargs);
        if (app.got_subcommand(x)) return run_transfer(xargs);
        if (app.got_subcommand(m)) return run_simulate(margs);
        if (app.got_subcommand(g)) return run_gen_forcing(gargs);
        if (app.got_subcommand(ex)) {
            policy_io::save_policy(policy_io::load_policy(exp_in), exp_out);
            std::cout << "wrote " << exp_out << "\n";
            return 0;
        }
        throw ConfigError("no subcommand");
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
