#pragma once

#include "foodshock/parameter_set.hpp"
#include "foodshock/rules.hpp"

#include <optional>
#include <span>
#include <vector>

namespace foodshock {

struct SimulationConfig {
    int tau = 10;
    bool adaptation_enabled = false;
    bool substitution_enabled = false;
    double trigger_delta_rel = 0.26;
    double trigger_delta_abs = 1000.0;

    void validate() const;
};

/// Destroys a fraction `phi` of the output of one sector at every step.
struct ShockTarget {
    std::size_t area = 0;
    std::size_t item = 0;
    double phi = 1.0;

    friend bool operator==(const ShockTarget&, const ShockTarget&) = default;
};

struct ShockSpec {
    std::vector<ShockTarget> targets;

    /// Throws ValidationError for out-of-range sectors, phi outside [0, 1]
    /// or a sector listed twice.
    void validate(const Dims& dims) const;
    /// Union of two specs; sectors must not overlap.
    static ShockSpec combine(const ShockSpec& a, const ShockSpec& b);
};

/// Model state at one time step. At t = 0 availability is x0 and output and
/// trade inflow are zero; from t = 1 on x = o + h.
struct StepState {
    std::vector<double> x;       ///< available amount
    std::vector<double> o;       ///< production output
    std::vector<double> h;       ///< trade inflow
    std::vector<double> p_alloc; ///< amount allocated to production
    std::vector<double> e_alloc; ///< amount allocated to export
};

enum class ResponseKind { adaptation, substitution };

struct Response {
    ResponseKind kind{};
    int t = 0;
    std::size_t area = 0;
    std::size_t item = 0;
    double loss = 0.0;      ///< relative shortfall against the baseline
    double shortfall = 0.0; ///< absolute shortfall against the baseline
};

struct RenormalizationLog {
    std::size_t emptied_trade_columns = 0; ///< rows left all-zero after adaptation
    std::size_t emptied_nu_rows = 0;
    std::size_t emptied_eta_rows = 0;
    std::size_t emptied_alpha_columns = 0;
    std::size_t emptied_beta_columns = 0;

    std::size_t total() const
    {
        return emptied_trade_columns + emptied_nu_rows + emptied_eta_rows + emptied_alpha_columns +
               emptied_beta_columns;
    }
};

struct Trajectory {
    std::vector<StepState> steps; ///< t = 0 .. tau
    std::vector<Response> responses;
    RenormalizationLog renormalization;
    /// Parameters in effect after the last adaptation; empty when none changed.
    std::optional<ParameterSet> adapted_params;

    const StepState& final_state() const { return steps.back(); }
    const ParameterSet& final_params(const ParameterSet& input) const
    {
        return adapted_params ? *adapted_params : input;
    }
};

/// Iterates production, trade and allocation with fixed parameters.
Trajectory run_baseline(const ParameterSet& params, const SimulationConfig& config);

/// Shocked run, optionally with rule-based adaptation at t = 1 and
/// substitution at t = 2. `baseline` must come from run_baseline with the
/// same parameters and config.
Trajectory run_scenario(const ParameterSet& params, const ShockSpec& shock, const AdaptationRuleSet& rules,
                        const Trajectory& baseline, const SimulationConfig& config);

/// A sector whose shortfall crossed both trigger thresholds.
struct Trigger {
    std::size_t area = 0;
    std::size_t item = 0;
    double loss = 0.0;
};

/// Sectors of `state` short of `baseline` by more than both thresholds.
std::vector<Trigger> find_triggers(const StepState& state, const StepState& baseline, const Dims& dims,
                                   double delta_rel, double delta_abs, std::vector<double>* shortfalls = nullptr);

/// Applies l·W·v + l·R to every parameter associated with each trigger, in
/// place and without renormalization.
void apply_adaptation(ParameterSet& params, std::span<const Trigger> triggers, const AdaptationRuleSet& rules);

/// Scales existing import links of same-group substitutes by (1 + S).
void apply_substitution(ParameterSet& params, std::span<const Trigger> triggers, const AdaptationRuleSet& rules);

enum class RenormalizeScope { all, trade_only };

/// Restores the conservation constraints against `originals`: exporter
/// columns and input-share rows return to their original sums, allocation
/// shares (with the implicit other-uses share) to one, and output-rate totals
/// per (area, process) to their original totals.
ParameterSet renormalize_constraints(const ParameterSet& params, const ParameterSet& originals,
                                     RenormalizationLog* log = nullptr,
                                     RenormalizeScope scope = RenormalizeScope::all);

} // namespace foodshock
