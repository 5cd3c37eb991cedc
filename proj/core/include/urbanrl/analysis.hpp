#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "urbanrl/env.hpp"

namespace urbanrl::analysis {

// Per-step reward components of one rollout.
struct TermTrace {
    std::vector<double> energy;
    std::vector<double> comfort;

    std::size_t size() const { return energy.size(); }
    double mean_energy() const;
    double mean_comfort() const;
};

inline constexpr long kStepsPerMonth = 1460; // 17520 / 12

struct RewardDiffResult {
    double r_diff = 0.0;
    std::array<double, 12> monthly{}; // NaN where a bucket has no data
};

/// Mean reward of the RL trace minus the baseline trace at the configured
/// weight, plus a 12-bucket monthly profile of the difference.
RewardDiffResult reward_diff(const TermTrace& rl, const TermTrace& baseline,
                             const env::RewardConfig& config);

/// R(w) = -w lambda_P mean(energy) - (1-w) lambda_T mean(comfort); affine in w.
double reward_at_weight(const TermTrace& trace, double w, const env::RewardConfig& config);

struct Intersection {
    enum class Kind { none, point, identical };
    Kind kind = Kind::none;
    double w = 0.0; // meaningful only for Kind::point
};

/// Crossing weight of the two reward lines, if it lies inside [0, 1].
Intersection weight_intersection(const TermTrace& rl, const TermTrace& baseline);

// reward[model][eval_city] over the same city list, plus the default
// controller's reward per eval city.
struct TransferMatrix {
    std::vector<std::string> cities;
    std::vector<std::vector<double>> reward;
    std::vector<double> baseline;
};

struct TransferScore {
    std::string model;
    int total = 0;
    std::vector<int> per_city; // rank earned in each eval city, 5 best .. 1 worst
};

/// Per eval city the five models earn ranks 5 (best reward) down to 1;
/// ties go to the earlier model. Returns totals sorted best-first.
std::vector<TransferScore> transfer_score(const TransferMatrix& matrix);

void write_weight_sweep_csv(const std::string& path, const TermTrace& rl,
                            const TermTrace& baseline, const env::RewardConfig& config,
                            int grid_points = 101);
void write_monthly_profile_csv(const std::string& path, const RewardDiffResult& result);
void write_transfer_matrix_csv(const std::string& path, const TransferMatrix& matrix,
                               const std::vector<TransferScore>& scores);

} // namespace urbanrl::analysis
