#pragma once

#include <optional>
#include <vector>

#include "beamsim/core_model.hpp"

namespace beamsim {

enum class ScenarioKind { static_channel, noisy, churn, time_varying };

const char* to_string(ScenarioKind kind);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::static_channel;
    bool rayleigh = true;
    double equal_gain_value = 1.0;
    std::optional<double> noise_power_db;
    double p_add = 0.0;
    double p_remove = 0.0;
    double sigma_xi = 0.0;
    int n_nodes_initial = 100;
    double tx_power = 1.0;

    void validate() const;
    double noise_power() const;  // linear variance, 0 when noiseless
};

enum class TopologyChange { added, removed };

struct TopologyEvent {
    std::int64_t slot = 0;
    TopologyChange kind = TopologyChange::added;
    NodeId node_id = 0;
};

/// One channel realization with node ids 0..N-1. Rayleigh gains are |CN(0,1)|;
/// equal-gain channels use `equal_gain_value`. Phases are uniform on (-pi, pi].
ChannelState sample_channel(const ScenarioSpec& spec, Rng& rng);

/// phi_i <- phi_i + N(0, sigma_xi^2) for every node; gains untouched.
ChannelState evolve_phases(ChannelState channel, double sigma_xi, Rng& rng);

struct ChurnResult {
    ChannelState channel;
    PhaseVector phases;
    std::vector<TopologyEvent> events;
};

/// One slot of random membership change: an add draw, then an independent
/// remove draw. Added nodes get never-used ids, a channel drawn like
/// sample_channel and a uniform commanded phase. Removal picks a node
/// uniformly and is a no-op on an empty network.
ChurnResult apply_churn(ChannelState channel, PhaseVector phases, const ScenarioSpec& spec,
                        Rng& rng, std::int64_t slot = 0);

/// Uniform phase on (-pi, pi].
double uniform_phase(Rng& rng);

}  // namespace beamsim
