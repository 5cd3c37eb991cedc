#include "urbanrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"

namespace urbanrl::analysis {

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double step_reward(const TermTrace& t, std::size_t i, const env::RewardConfig& c) {
    return -c.w * c.lambda_p * t.energy[i] - (1.0 - c.w) * c.lambda_t * t.comfort[i];
}

} // namespace

double TermTrace::mean_energy() const { return mean_of(energy); }
double TermTrace::mean_comfort() const { return mean_of(comfort); }

RewardDiffResult reward_diff(const TermTrace& rl, const TermTrace& baseline,
                             const env::RewardConfig& config) {
    if (rl.size() != baseline.size() || rl.energy.size() != rl.comfort.size())
        throw ConfigError("reward_diff: traces must have equal lengths");
    if (rl.size() == 0) throw ConfigError("reward_diff: empty traces");

    RewardDiffResult out;
    double total = 0.0;
    for (std::size_t i = 0; i < rl.size(); ++i)
        total += step_reward(rl, i, config) - step_reward(baseline, i, config);
    out.r_diff = total / static_cast<double>(rl.size());

    for (int m = 0; m < 12; ++m) {
        const std::size_t lo = static_cast<std::size_t>(m) * kStepsPerMonth;
        const std::size_t hi = std::min(rl.size(), lo + kStepsPerMonth);
        if (lo >= hi) {
            out.monthly[static_cast<std::size_t>(m)] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            acc += step_reward(rl, i, config) - step_reward(baseline, i, config);
        out.monthly[static_cast<std::size_t>(m)] = acc / static_cast<double>(hi - lo);
    }
    return out;
}

double reward_at_weight(const TermTrace& trace, double w, const env::RewardConfig& config) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("reward_at_weight: w must be in [0, 1]");
    return -w * config.lambda_p * trace.mean_energy() -
           (1.0 - w) * config.lambda_t * trace.mean_comfort();
}

Intersection weight_intersection(const TermTrace& rl, const TermTrace& baseline) {
    const double e_r = rl.mean_energy(), c_r = rl.mean_comfort();
    const double e_b = baseline.mean_energy(), c_b = baseline.mean_comfort();
    // -w e_r - (1-w) c_r = -w e_b - (1-w) c_b  =>  w [(e_r - e_b) - (c_r - c_b)] = c_b - c_r
    const double denom = (e_r - e_b) + (c_b - c_r);
    const double numer = c_b - c_r;
    Intersection out;
    if (e_r == e_b && c_r == c_b) {
        out.kind = Intersection::Kind::identical;
        return out;
    }
    if (denom == 0.0) return out; // parallel, distinct lines
    const double w = numer / denom;
    if (w >= 0.0 && w <= 1.0) {
        out.kind = Intersection::Kind::point;
        out.w = w;
    }
    return out;
}

std::vector<TransferScore> transfer_score(const TransferMatrix& matrix) {
    const std::size_t n = matrix.cities.size();
    if (n == 0) throw ConfigError("transfer_score: empty matrix");
    if (matrix.reward.size() != n) throw ConfigError("transfer_score: matrix is not square");
    for (const auto& row : matrix.reward) {
        if (row.size() != n) throw ConfigError("transfer_score: matrix is not square");
        for (const double v : row)
            if (!std::isfinite(v)) throw ConfigError("transfer_score: non-finite reward entry");
    }

    std::vector<TransferScore> scores(n);
    for (std::size_t m = 0; m < n; ++m) {
        scores[m].model = matrix.cities[m];
        scores[m].per_city.assign(n, 0);
    }
    for (std::size_t city = 0; city < n; ++city) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return matrix.reward[a][city] > matrix.reward[b][city]; // ties keep model order
        });
        for (std::size_t rank = 0; rank < n; ++rank) {
            scores[order[rank]].per_city[city] = static_cast<int>(n - rank);
        }
    }
    for (auto& s : scores) s.total = std::accumulate(s.per_city.begin(), s.per_city.end(), 0);
    std::stable_sort(scores.begin(), scores.end(),
                     [](const TransferScore& a, const TransferScore& b) { return a.total > b.total; });
    return scores;
}

void write_weight_sweep_csv(const std::string& path, const TermTrace& rl,
                            const TermTrace& baseline, const env::RewardConfig& config,
                            int grid_points) {
    if (grid_points < 2) throw ConfigError("weight sweep needs at least 2 grid points");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "w,reward_rl,reward_baseline\n";
    for (int k = 0; k < grid_points; ++k) {
        const double w = static_cast<double>(k) / static_cast<double>(grid_points - 1);
        out << format_double(w) << ',' << format_double(reward_at_weight(rl, w, config)) << ','
            << format_double(reward_at_weight(baseline, w, config)) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_monthly_profile_csv(const std::string& path, const RewardDiffResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "month,r_diff\n";
    for (int m = 0; m < 12; ++m)
        out << (m + 1) << ',' << format_double(result.monthly[static_cast<std::size_t>(m)]) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_transfer_matrix_csv(const std::string& path, const TransferMatrix& matrix,
                               const std::vector<TransferScore>& scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "model";
    for (const auto& c : matrix.cities) out << ',' << c;
    out << ",total_score\n";
    for (std::size_t m = 0; m < matrix.cities.size(); ++m) {
        out << matrix.cities[m];
        for (std::size_t c = 0; c < matrix.cities.size(); ++c)
            out << ',' << format_double(matrix.reward[m][c]);
        int total = 0;
        for (const auto& s : scores)
            if (s.model == matrix.cities[m]) total = s.total;
        out << ',' << total << "\n";
    }
    if (!matrix.baseline.empty()) {
        out << "baseline";
        for (const double v : matrix.baseline) out << ',' << format_double(v);
        out << ",\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace urbanrl::analysis
