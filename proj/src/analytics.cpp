#include "agora/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "agora/errors.hpp"
#include "agora/stats.hpp"

namespace agora {

double reversion_ratio(const ReversionInputs& inputs) {
    if (inputs.a_mean == inputs.a_first) return 0.0;
    return (inputs.a_mean - inputs.a_final) / (inputs.a_mean - inputs.a_first);
}

namespace {

// Scored entries of one agent's run, in protocol order.
std::vector<std::pair<int, double>> scored_positions(const AttitudeSeries& series,
                                                     const std::string& agent_id, int run_id) {
    std::vector<std::pair<int, double>> scored;
    for (const auto& entry : series.entries) {
        if (entry.agent_id != agent_id || entry.run_id != run_id || !entry.score) continue;
        scored.emplace_back(phase_position(entry.phase, series.rounds),
                            static_cast<double>(*entry.score));
    }
    std::sort(scored.begin(), scored.end());
    return scored;
}

}  // namespace

std::optional<double> run_reversion(const AttitudeSeries& series, const std::string& agent_id,
                                    int run_id) {
    const auto scored = scored_positions(series, agent_id, run_id);
    // First and final scored statements bracket the middle; gaps are skipped.
    if (scored.size() < 3) return std::nullopt;
    double middle_sum = 0.0;
    for (std::size_t i = 1; i + 1 < scored.size(); ++i) middle_sum += scored[i].second;
    const double middle_mean = middle_sum / static_cast<double>(scored.size() - 2);
    return reversion_ratio(
        ReversionInputs{scored.front().second, scored.back().second, middle_mean});
}

double mean_reversion(const AttitudeSeries& series, const std::string& agent_id) {
    double sum = 0.0;
    int count = 0;
    for (int run_id : series.run_ids()) {
        if (auto value = run_reversion(series, agent_id, run_id)) {
            sum += *value;
            ++count;
        }
    }
    if (count == 0) throw NoData("no run of agent " + agent_id + " yields a reversion ratio");
    return sum / count;
}

std::vector<double> Trajectory::means() const {
    std::vector<double> values;
    values.reserve(phases.size());
    for (const auto& phase : phases) values.push_back(phase.mean);
    return values;
}

Trajectory trajectory(const AttitudeSeries& series, const std::string& agent_id) {
    std::map<int, std::pair<PhaseRef, std::vector<double>>> by_position;
    for (const auto& entry : series.entries) {
        if (entry.agent_id != agent_id || !entry.score) continue;
        auto& bucket = by_position[phase_position(entry.phase, series.rounds)];
        bucket.first = entry.phase;
        bucket.second.push_back(static_cast<double>(*entry.score));
    }
    if (by_position.empty())
        throw NoData("agent " + agent_id + " has no scored statements");

    Trajectory result{agent_id, series.rounds, {}};
    for (auto& [position, bucket] : by_position) {
        auto& [phase, values] = bucket;
        const auto q = stats::quartiles(values);
        PhaseStats phase_stats;
        phase_stats.phase = phase;
        phase_stats.position = position;
        phase_stats.mean = stats::mean(values);
        phase_stats.q1 = q.q1;
        phase_stats.median = q.median;
        phase_stats.q3 = q.q3;
        phase_stats.min = *std::min_element(values.begin(), values.end());
        phase_stats.max = *std::max_element(values.begin(), values.end());
        phase_stats.n = static_cast<int>(values.size());
        result.phases.push_back(phase_stats);
    }
    return result;
}

double linear_gradient(std::span<const double> phase_means) {
    return stats::ols_slope(phase_means);
}

const char* to_string(Direction direction) {
    switch (direction) {
        case Direction::Intensifying: return "intensifying";
        case Direction::Moderating: return "moderating";
        case Direction::Flat: return "flat";
    }
    return "flat";
}

EchoChamberVerdict detect_echo_chamber(const std::vector<Trajectory>& trajectories,
                                       const std::vector<std::string>& opinionated_ids,
                                       double tau, RegressionDomain domain) {
    EchoChamberVerdict verdict;
    verdict.tau = tau;
    verdict.chamber_formed = !opinionated_ids.empty();

    for (const auto& agent_id : opinionated_ids) {
        auto it = std::find_if(trajectories.begin(), trajectories.end(),
                               [&](const Trajectory& t) { return t.agent_id == agent_id; });
        if (it == trajectories.end())
            throw MissingTrajectory("no trajectory for opinionated agent " + agent_id);

        std::vector<double> means;
        for (const auto& phase : it->phases) {
            if (domain == RegressionDomain::RoundsOnly && phase.phase.phase != Phase::Round)
                continue;
            means.push_back(phase.mean);
        }
        if (means.size() < 2)
            throw MissingTrajectory("trajectory of agent " + agent_id +
                                    " has fewer than two phases in the regression domain");

        AgentEcho echo;
        echo.agent_id = agent_id;
        echo.slope = stats::ols_slope(means);
        echo.mean = stats::mean(means);
        if (std::fabs(echo.slope) <= tau) {
            echo.direction = Direction::Flat;
        } else if ((echo.mean > 4.0 && echo.slope > tau) ||
                   (echo.mean < 4.0 && echo.slope < -tau)) {
            echo.direction = Direction::Intensifying;
        } else {
            echo.direction = Direction::Moderating;
        }
        if (echo.direction != Direction::Intensifying) verdict.chamber_formed = false;
        verdict.agents.push_back(std::move(echo));
    }
    return verdict;
}

namespace {

struct GroupSums {
    int k = 0;
    int n = 0;
    double ss_between = 0.0;
    double ss_within = 0.0;
};

GroupSums sums_of_squares(const std::vector<std::vector<double>>& groups) {
    GroupSums sums;
    sums.k = static_cast<int>(groups.size());
    if (sums.k < 2) throw DegenerateInput("need at least two groups");

    double grand_sum = 0.0;
    for (const auto& group : groups) {
        if (group.size() < 2)
            throw DegenerateInput("every group needs at least two samples");
        sums.n += static_cast<int>(group.size());
        for (double value : group) grand_sum += value;
    }
    const double grand_mean = grand_sum / sums.n;

    for (const auto& group : groups) {
        const double group_mean = stats::mean(group);
        sums.ss_between += static_cast<double>(group.size()) * (group_mean - grand_mean) *
                           (group_mean - grand_mean);
        for (double value : group)
            sums.ss_within += (value - group_mean) * (value - group_mean);
    }
    return sums;
}

TestResult f_test(const GroupSums& sums) {
    TestResult result;
    result.df1 = sums.k - 1;
    result.df2 = sums.n - sums.k;
    if (result.df2 < 1) throw DegenerateInput("no within-group degrees of freedom");

    const double ms_between = sums.ss_between / result.df1;
    const double ms_within = sums.ss_within / result.df2;
    if (ms_within == 0.0) {
        if (ms_between == 0.0)
            throw DegenerateInput("zero within-group and between-group variance");
        result.statistic = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
    } else {
        result.statistic = ms_between / ms_within;
        result.p_value = stats::f_upper_tail(result.statistic, result.df1, result.df2);
    }
    result.significant = result.p_value < 0.05;
    return result;
}

}  // namespace

TestResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    return f_test(sums_of_squares(groups));
}

TestResult levene_test(const std::vector<std::vector<double>>& groups, LeveneCenter center) {
    std::vector<std::vector<double>> deviations;
    deviations.reserve(groups.size());
    for (const auto& group : groups) {
        if (group.size() < 2)
            throw DegenerateInput("every group needs at least two samples");
        std::vector<double> sorted = group;
        std::sort(sorted.begin(), sorted.end());
        const double group_center = center == LeveneCenter::Mean
                                        ? stats::mean(group)
                                        : stats::quantile_linear(sorted, 0.5);
        std::vector<double> z;
        z.reserve(group.size());
        for (double value : group) z.push_back(std::fabs(value - group_center));
        deviations.push_back(std::move(z));
    }
    return f_test(sums_of_squares(deviations));
}

const char* to_string(Grouping grouping) {
    return grouping == Grouping::Pooled ? "pooled" : "round-means";
}

const char* to_string(LeveneCenter center) {
    return center == LeveneCenter::Mean ? "mean" : "median";
}

const char* to_string(RegressionDomain domain) {
    return domain == RegressionDomain::AllPhases ? "all-phases" : "rounds-only";
}

namespace {

std::vector<double> pooled_scores(const AttitudeSeries& series) {
    std::vector<double> values;
    for (const auto& entry : series.entries)
        if (entry.score) values.push_back(static_cast<double>(*entry.score));
    return values;
}

std::vector<double> per_phase_means(const AttitudeSeries& series) {
    std::map<int, std::vector<double>> by_position;
    for (const auto& entry : series.entries)
        if (entry.score)
            by_position[phase_position(entry.phase, series.rounds)].push_back(
                static_cast<double>(*entry.score));
    std::vector<double> means;
    means.reserve(by_position.size());
    for (const auto& [position, values] : by_position) means.push_back(stats::mean(values));
    return means;
}

}  // namespace

ComparisonResult compare_experiments(const AttitudeSeries& a, const AttitudeSeries& b,
                                     Grouping grouping, LeveneCenter center) {
    if (a.entries.empty() || b.entries.empty())
        throw NoData("compare_experiments needs two non-empty series");

    std::vector<std::vector<double>> groups;
    if (grouping == Grouping::Pooled) {
        groups = {pooled_scores(a), pooled_scores(b)};
    } else {
        groups = {per_phase_means(a), per_phase_means(b)};
    }
    return ComparisonResult{one_way_anova(groups), levene_test(groups, center)};
}

}  // namespace agora
