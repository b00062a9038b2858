#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agora/judge.hpp"

namespace agora {

/// Inputs of the attitude-reversion ratio for one run.
struct ReversionInputs {
    double a_first = 0.0;  // opening-statement attitude
    double a_final = 0.0;  // final-statement attitude
    double a_mean = 0.0;   // mean of the middle-round attitudes
};

/// R = (a_mean - a_final) / (a_mean - a_first), or 0 when a_mean == a_first
/// (the guard that removes the singularity).
double reversion_ratio(const ReversionInputs& inputs);

/// Per-run reversion inputs from a series: first and final scored statements
/// of the run bracket the middle; gaps are skipped. nullopt when fewer than
/// three scored statements remain.
std::optional<double> run_reversion(const AttitudeSeries& series, const std::string& agent_id,
                                    int run_id);

/// Mean of the per-run reversion ratios, runs without a value excluded.
/// Throws NoData when no run yields one.
double mean_reversion(const AttitudeSeries& series, const std::string& agent_id);

struct PhaseStats {
    PhaseRef phase;
    int position = 0;
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    int n = 0;
};

/// Per-phase score distribution across runs for one agent, in protocol
/// order. Quartiles use linear interpolation between closest ranks. Throws
/// NoData when the agent has no scored statements.
struct Trajectory {
    std::string agent_id;
    int rounds = 0;
    std::vector<PhaseStats> phases;

    std::vector<double> means() const;
};

Trajectory trajectory(const AttitudeSeries& series, const std::string& agent_id);

/// OLS slope of the per-phase means over positions 0..n-1. Throws
/// InsufficientPoints below two points.
double linear_gradient(std::span<const double> phase_means);

enum class RegressionDomain { AllPhases, RoundsOnly };

enum class Direction { Intensifying, Moderating, Flat };
const char* to_string(Direction direction);

struct AgentEcho {
    std::string agent_id;
    double slope = 0.0;
    double mean = 0.0;
    Direction direction = Direction::Flat;
};

struct EchoChamberVerdict {
    std::vector<AgentEcho> agents;  // opinionated agents only
    bool chamber_formed = false;
    double tau = 0.0;
};

/// An agent intensifies when its slope moves the trajectory away from the
/// neutral baseline of 4 on its own side (mean > 4 with slope > +tau, or
/// mean < 4 with slope < -tau); |slope| <= tau is flat. A chamber forms when
/// every opinionated agent intensifies. Throws MissingTrajectory.
EchoChamberVerdict detect_echo_chamber(const std::vector<Trajectory>& trajectories,
                                       const std::vector<std::string>& opinionated_ids,
                                       double tau = 0.05,
                                       RegressionDomain domain = RegressionDomain::AllPhases);

struct TestResult {
    double statistic = 0.0;  // F for ANOVA, W for Levene
    int df1 = 0;
    int df2 = 0;
    double p_value = 1.0;
    bool significant = false;  // p < 0.05
};

/// Classic one-way F test for equality of group means. Requires at least two
/// groups of at least two samples; all-identical data (zero between- and
/// within-variance) is DegenerateInput. Zero within-variance with nonzero
/// between-variance yields F = inf, p = 0.
TestResult one_way_anova(const std::vector<std::vector<double>>& groups);

enum class LeveneCenter { Mean, Median };

/// Levene's W: one-way ANOVA on absolute deviations from the group centers
/// (mean-centered classic variant; median-centered Brown-Forsythe behind the
/// flag).
TestResult levene_test(const std::vector<std::vector<double>>& groups,
                       LeveneCenter center = LeveneCenter::Mean);

enum class Grouping { Pooled, ByRoundMeans };
const char* to_string(Grouping grouping);
const char* to_string(LeveneCenter center);
const char* to_string(RegressionDomain domain);

struct ComparisonResult {
    TestResult anova;
    TestResult levene;
};

/// Applies both tests to two experiments' scores: pooled statement scores, or
/// per-phase means across runs and agents.
ComparisonResult compare_experiments(const AttitudeSeries& a, const AttitudeSeries& b,
                                     Grouping grouping,
                                     LeveneCenter center = LeveneCenter::Mean);

}  // namespace agora
