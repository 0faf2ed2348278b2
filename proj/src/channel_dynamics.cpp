#include "beamsim/channel_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace beamsim {

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::static_channel: return "static";
        case ScenarioKind::noisy: return "noisy";
        case ScenarioKind::churn: return "churn";
        case ScenarioKind::time_varying: return "time_varying";
    }
    return "unknown";
}

void ScenarioSpec::validate() const {
    if (!(p_add >= 0.0 && p_add <= 1.0)) throw ContractViolation("p_add must be in [0, 1]");
    if (!(p_remove >= 0.0 && p_remove <= 1.0)) throw ContractViolation("p_remove must be in [0, 1]");
    if (!(sigma_xi >= 0.0)) throw ContractViolation("sigma_xi must be >= 0");
    if (n_nodes_initial < 1) throw ContractViolation("n_nodes_initial must be >= 1");
    if (!rayleigh && !(equal_gain_value > 0.0)) throw ContractViolation("equal_gain_value must be > 0");
    if (!(tx_power > 0.0)) throw ContractViolation("tx_power must be > 0");
}

double ScenarioSpec::noise_power() const {
    return noise_power_db ? noise_power_from_db(*noise_power_db) : 0.0;
}

double uniform_phase(Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return kPi - kTwoPi * unit(rng);  // [0,1) -> (-pi, pi]
}

namespace {

struct NodeChannel {
    double gain;
    double phase;
};

NodeChannel draw_node(const ScenarioSpec& spec, Rng& rng) {
    if (spec.rayleigh) {
        std::normal_distribution<double> component(0.0, std::sqrt(0.5));
        const double re = component(rng);
        const double im = component(rng);
        const std::complex<double> h{re, im};
        const double phase = (re == 0.0 && im == 0.0) ? 0.0 : canonical_phase(std::arg(h));
        return {std::abs(h), phase};
    }
    return {spec.equal_gain_value, uniform_phase(rng)};
}

}  // namespace

ChannelState sample_channel(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    ChannelState channel;
    channel.tx_power = spec.tx_power;
    const auto n = static_cast<std::size_t>(spec.n_nodes_initial);
    channel.gains.reserve(n);
    channel.phases.reserve(n);
    channel.node_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeChannel node = draw_node(spec, rng);
        channel.gains.push_back(node.gain);
        channel.phases.push_back(node.phase);
        channel.node_ids.push_back(i);
    }
    channel.next_node_id = n;
    return channel;
}

ChannelState evolve_phases(ChannelState channel, double sigma_xi, Rng& rng) {
    if (!(sigma_xi >= 0.0)) {
        throw ContractViolation("evolve_phases: sigma_xi must be >= 0");
    }
    if (sigma_xi == 0.0) {
        return channel;
    }
    std::normal_distribution<double> innovation(0.0, sigma_xi);
    for (double& phi : channel.phases) {
        phi = canonical_phase(phi + innovation(rng));
    }
    return channel;
}

ChurnResult apply_churn(ChannelState channel, PhaseVector phases, const ScenarioSpec& spec,
                        Rng& rng, std::int64_t slot) {
    spec.validate();
    if (channel.size() != phases.size()) {
        throw ContractViolation("apply_churn: channel and phase vector differ in length");
    }
    ChurnResult out;
    if (spec.p_add == 0.0 && spec.p_remove == 0.0) {
        out.channel = std::move(channel);
        out.phases = std::move(phases);
        return out;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (spec.p_add > 0.0 && unit(rng) < spec.p_add) {
        NodeId id = channel.next_node_id;
        if (!channel.node_ids.empty()) {
            id = std::max(id, *std::max_element(channel.node_ids.begin(), channel.node_ids.end()) + 1);
        }
        channel.next_node_id = id + 1;
        const NodeChannel node = draw_node(spec, rng);
        channel.gains.push_back(node.gain);
        channel.phases.push_back(node.phase);
        channel.node_ids.push_back(id);
        phases.psi.push_back(uniform_phase(rng));
        out.events.push_back({slot, TopologyChange::added, id});
    }

    if (spec.p_remove > 0.0 && unit(rng) < spec.p_remove && !channel.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, channel.size() - 1);
        const std::size_t k = pick(rng);
        const NodeId id = channel.node_ids[k];
        const auto offset = static_cast<std::ptrdiff_t>(k);
        channel.gains.erase(channel.gains.begin() + offset);
        channel.phases.erase(channel.phases.begin() + offset);
        channel.node_ids.erase(channel.node_ids.begin() + offset);
        phases.psi.erase(phases.psi.begin() + offset);
        out.events.push_back({slot, TopologyChange::removed, id});
    }

    out.channel = std::move(channel);
    out.phases = std::move(phases);
    return out;
}

}  // namespace beamsim
