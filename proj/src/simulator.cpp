#include "foodshock/simulator.hpp"

#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <set>

namespace foodshock {

void SimulationConfig::validate() const
{
    if (tau < 1) {
        throw ValidationError(fmt::format("tau must be at least 1, got {}", tau));
    }
    if ((adaptation_enabled || substitution_enabled) && tau < 2) {
        throw ValidationError("tau must be at least 2 when adaptation is enabled");
    }
    if (!(trigger_delta_rel > 0.0) || !(trigger_delta_abs > 0.0)) {
        throw ValidationError("trigger thresholds must be positive");
    }
}

void ShockSpec::validate(const Dims& dims) const
{
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : targets) {
        if (t.area >= dims.areas || t.item >= dims.items) {
            throw ValidationError(fmt::format("shock target ({}, {}) outside the catalog", t.area, t.item));
        }
        if (!(t.phi >= 0.0 && t.phi <= 1.0)) {
            throw ValidationError(fmt::format("shock fraction {} outside [0, 1]", t.phi));
        }
        if (!seen.emplace(t.area, t.item).second) {
            throw ValidationError(fmt::format("shock target ({}, {}) listed twice", t.area, t.item));
        }
    }
}

ShockSpec ShockSpec::combine(const ShockSpec& a, const ShockSpec& b)
{
    ShockSpec out = a;
    for (const auto& t : b.targets) {
        for (const auto& u : a.targets) {
            if (t.area == u.area && t.item == u.item) {
                throw ValidationError(fmt::format("combined shocks overlap on sector ({}, {})", t.area, t.item));
            }
        }
        out.targets.push_back(t);
    }
    return out;
}

namespace {

StepState initial_state(const ParameterSet& params)
{
    const auto n = params.dims.sectors();
    StepState s;
    s.x = params.x0;
    s.o.assign(n, 0.0);
    s.h.assign(n, 0.0);
    s.p_alloc.resize(n);
    s.e_alloc.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        s.p_alloc[k] = params.eta_prod[k] * s.x[k];
        s.e_alloc[k] = params.eta_exp[k] * s.x[k];
    }
    return s;
}

/// One production -> trade -> allocation step. `keep` holds 1 - phi per sector.
void advance(const ParameterSet& params, const StepState& prev, std::span<const double> keep,
             std::vector<double>& process_input, StepState& next)
{
    const auto& d = params.dims;
    const auto n = d.sectors();
    next.x.resize(n);
    next.o.resize(n);
    next.h.resize(n);
    next.p_alloc.resize(n);
    next.e_alloc.resize(n);

    process_input.assign(d.areas * d.processes, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        const double allocated = prev.p_alloc[s];
        if (allocated == 0.0) {
            continue;
        }
        const auto base = (s / d.items) * d.processes;
        for (const auto& e : params.nu.row(s)) {
            process_input[base + e.key] += e.value * allocated;
        }
    }

    for (std::size_t s = 0; s < n; ++s) {
        const auto area = s / d.items;
        const auto item = s % d.items;
        const auto base = area * d.processes;
        double output = 0.0;
        for (const auto& e : params.alpha.row(s)) {
            output += e.value * process_input[base + e.key];
        }
        for (const auto& e : params.beta.row(s)) {
            output += e.value;
        }
        output *= keep[s];

        double inflow = 0.0;
        for (const auto& e : params.trade.row(item, area)) {
            inflow += e.value * prev.e_alloc[d.sector(e.key, item)];
        }
        next.o[s] = output;
        next.h[s] = inflow;
        next.x[s] = output + inflow;
    }
    for (std::size_t s = 0; s < n; ++s) {
        next.p_alloc[s] = params.eta_prod[s] * next.x[s];
        next.e_alloc[s] = params.eta_exp[s] * next.x[s];
    }
}

} // namespace

std::vector<Trigger> find_triggers(const StepState& state, const StepState& baseline, const Dims& dims,
                                   double delta_rel, double delta_abs, std::vector<double>* shortfalls)
{
    std::vector<Trigger> out;
    if (shortfalls) {
        shortfalls->clear();
    }
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        const double reference = baseline.x[s];
        if (!(reference > 0.0)) {
            continue;
        }
        const double shortfall = reference - state.x[s];
        const double loss = shortfall / reference;
        if (loss > delta_rel && shortfall > delta_abs) {
            const auto sec = dims.unpack(s);
            out.push_back({sec.area, sec.item, loss});
            if (shortfalls) {
                shortfalls->push_back(shortfall);
            }
        }
    }
    return out;
}

Trajectory run_baseline(const ParameterSet& params, const SimulationConfig& config)
{
    return run_scenario(params, ShockSpec{}, AdaptationRuleSet{}, Trajectory{},
                        SimulationConfig{config.tau, false, false, config.trigger_delta_rel, config.trigger_delta_abs});
}

Trajectory run_scenario(const ParameterSet& params, const ShockSpec& shock, const AdaptationRuleSet& rules,
                        const Trajectory& baseline, const SimulationConfig& config)
{
    config.validate();
    shock.validate(params.dims);
    const bool adaptive = config.adaptation_enabled || config.substitution_enabled;
    if (adaptive && baseline.steps.size() != static_cast<std::size_t>(config.tau) + 1) {
        throw ValidationError("baseline trajectory does not match the simulation length");
    }

    const auto& d = params.dims;
    std::vector<double> keep(d.sectors(), 1.0);
    for (const auto& t : shock.targets) {
        keep[d.sector(t.area, t.item)] = 1.0 - t.phi;
    }

    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(config.tau) + 1);
    traj.steps.push_back(initial_state(params));

    const ParameterSet* current = &params;
    std::vector<char> adapted(d.sectors(), 0);
    std::vector<double> process_input;
    std::vector<double> shortfalls;
    for (int t = 1; t <= config.tau; ++t) {
        StepState next;
        advance(*current, traj.steps.back(), keep, process_input, next);
        traj.steps.push_back(std::move(next));
        const auto& state = traj.steps.back();

        if (t == 1 && config.adaptation_enabled) {
            const auto triggers = find_triggers(state, baseline.steps[1], d, config.trigger_delta_rel,
                                                config.trigger_delta_abs, &shortfalls);
            for (std::size_t k = 0; k < triggers.size(); ++k) {
                adapted[d.sector(triggers[k].area, triggers[k].item)] = 1;
                traj.responses.push_back(
                    {ResponseKind::adaptation, t, triggers[k].area, triggers[k].item, triggers[k].loss, shortfalls[k]});
            }
            if (!triggers.empty()) {
                ParameterSet changed = *current;
                apply_adaptation(changed, triggers, rules);
                traj.adapted_params = renormalize_constraints(changed, *current, &traj.renormalization);
                current = &*traj.adapted_params;
            }
        }
        if (t == 2 && config.substitution_enabled && !rules.substitution.empty()) {
            auto still = find_triggers(state, baseline.steps[2], d, config.trigger_delta_rel, config.trigger_delta_abs,
                                       &shortfalls);
            std::vector<Trigger> substituting;
            for (std::size_t k = 0; k < still.size(); ++k) {
                // Only sectors that already adapted at t = 1 and failed to recover substitute.
                if (!config.adaptation_enabled || adapted[d.sector(still[k].area, still[k].item)]) {
                    substituting.push_back(still[k]);
                    traj.responses.push_back(
                        {ResponseKind::substitution, t, still[k].area, still[k].item, still[k].loss, shortfalls[k]});
                }
            }
            if (!substituting.empty()) {
                ParameterSet changed = *current;
                apply_substitution(changed, substituting, rules);
                auto renormalized =
                    renormalize_constraints(changed, *current, &traj.renormalization, RenormalizeScope::trade_only);
                traj.adapted_params = std::move(renormalized);
                current = &*traj.adapted_params;
            }
        }
    }
    return traj;
}

} // namespace foodshock
