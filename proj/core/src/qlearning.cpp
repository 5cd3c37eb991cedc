#include "urbanrl/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"

namespace urbanrl::agents {

std::int64_t encode_state(const env::Observation& obs) {
    const std::array<double, 5> raw = {obs.ac_setpoint_k, obs.heat_setpoint_k, obs.vent_ach * 10.0,
                                       obs.t_indoor_k, obs.t_canopy_k};
    std::int64_t key = 0;
    std::int64_t place = 1;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw ConfigError("encode_state: component " + std::to_string(i) + " is not finite");
        const long long v = std::llround(raw[i]);
        if (v < 0 || v > 999) {
            throw ConfigError("encode_state: component " + std::to_string(i) + " rounds to " +
                              std::to_string(v) + ", outside [0, 999]");
        }
        key += static_cast<std::int64_t>(v) * place;
        place *= 1000;
    }
    return key;
}

double epsilon_exponential(long epoch, double max_eps, double min_eps, double decay) {
    if (epoch < 0) throw ConfigError("epsilon_exponential: epoch must be >= 0");
    return min_eps + (max_eps - min_eps) * std::exp(-decay * static_cast<double>(epoch));
}

int argmax_action(const std::array<double, 8>& q_row) {
    int best = 0;
    for (int a = 1; a < 8; ++a)
        if (q_row[a] > q_row[best]) best = a; // lowest index wins ties
    return best;
}

int epsilon_greedy(const std::array<double, 8>& q_row, double eps, Rng& rng) {
    if (rng.uniform() < eps) return static_cast<int>(rng.uniform_int(8));
    return argmax_action(q_row);
}

std::array<double, 8> QTable::row(std::int64_t key) const {
    auto it = table_.find(key);
    if (it == table_.end()) return {}; // unseen states read as zeros
    return it->second;
}

int QTable::greedy_action(std::int64_t key) const { return argmax_action(row(key)); }

void q_update(QTable& table, std::int64_t s, int a, double r, std::optional<std::int64_t> s_next,
              double alpha, double gamma) {
    if (a < 0 || a >= QTable::kActions)
        throw ConfigError("q_update: action " + std::to_string(a) + " outside 0..7");
    double bootstrap = 0.0;
    if (s_next) {
        const auto next_row = table.row(*s_next);
        bootstrap = *std::max_element(next_row.begin(), next_row.end());
    }
    auto& row = table.table_[s]; // creates the zero row on first touch
    row[a] += alpha * (r + gamma * bootstrap - row[a]);
}

void QTable::save(const std::string& path) const {
    std::vector<std::int64_t> keys;
    keys.reserve(table_.size());
    for (const auto& [k, v] : table_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto k : keys) {
        out << k;
        const auto& row = table_.at(k);
        for (const double q : row) out << ' ' << format_double(q);
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

QTable QTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open Q-table file '" + path + "'");
    QTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view l = trim(line);
        if (l.empty()) continue;
        auto cols = split(l, ' ');
        if (cols.size() != 9)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected key plus 8 values");
        const std::string ctx = path + ":" + std::to_string(lineno);
        std::array<double, 8> row{};
        const auto key = static_cast<std::int64_t>(parse_int(cols[0], ctx));
        for (int a = 0; a < 8; ++a) row[a] = parse_double(cols[a + 1], ctx);
        table.table_[key] = row;
    }
    return table;
}

QLearningAgent::QLearningAgent(QLearningConfig cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {}

int QLearningAgent::act(const env::Observation& obs, long episode_index) {
    const double eps =
        epsilon_exponential(episode_index, cfg_.max_eps, cfg_.min_eps, cfg_.decay);
    return epsilon_greedy(table_.row(encode_state(obs)), eps, rng_);
}

int QLearningAgent::greedy_action(const env::Observation& obs) const {
    return table_.greedy_action(encode_state(obs));
}

void QLearningAgent::observe(const env::Observation& obs, int action, double reward,
                             const env::Observation& next_obs, bool done) {
    std::optional<std::int64_t> s_next;
    if (!done) s_next = encode_state(next_obs);
    q_update(table_, encode_state(obs), action, reward, s_next, cfg_.alpha, cfg_.gamma);
}

} // namespace urbanrl::agents
