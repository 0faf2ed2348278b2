#include "beamsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <unordered_set>

namespace beamsim {

double canonical_phase(double theta) {
    if (!std::isfinite(theta)) {
        throw ContractViolation("canonical_phase: non-finite angle");
    }
    if (theta > -kPi && theta <= kPi) {
        return theta;
    }
    double r = std::fmod(theta, kTwoPi);  // (-2pi, 2pi), sign of theta
    if (r <= -kPi) {
        r += kTwoPi;
    } else if (r > kPi) {
        r -= kTwoPi;
    }
    // fmod is exact, but the +-2pi shift can round onto the excluded boundary.
    if (r <= -kPi) {
        r = kPi;
    }
    return r;
}

std::size_t ChannelState::index_of(NodeId id) const {
    auto it = std::find(node_ids.begin(), node_ids.end(), id);
    return static_cast<std::size_t>(it - node_ids.begin());
}

void ChannelState::validate() const {
    if (gains.size() != phases.size() || gains.size() != node_ids.size()) {
        throw ContractViolation("ChannelState: gains, phases and node_ids differ in length");
    }
    if (!(tx_power > 0.0)) {
        throw ContractViolation("ChannelState: tx_power must be positive");
    }
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (!(gains[i] >= 0.0) || !std::isfinite(gains[i])) {
            throw ContractViolation("ChannelState: gain " + std::to_string(i) + " is negative or non-finite");
        }
        if (!(phases[i] > -kPi && phases[i] <= kPi)) {
            throw ContractViolation("ChannelState: phase " + std::to_string(i) + " outside (-pi, pi]");
        }
    }
    std::unordered_set<NodeId> seen(node_ids.begin(), node_ids.end());
    if (seen.size() != node_ids.size()) {
        throw ContractViolation("ChannelState: duplicate node id");
    }
}

namespace {

std::complex<double> coherent_sum(const ChannelState& channel, const PhaseVector& phases) {
    if (channel.size() != phases.size()) {
        throw ContractViolation("evaluate_rss: channel has " + std::to_string(channel.size()) +
                                " nodes but phase vector has " + std::to_string(phases.size()));
    }
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < channel.size(); ++i) {
        sum += std::polar(channel.gains[i], channel.phases[i] + phases.psi[i]);
    }
    return std::sqrt(channel.tx_power) * sum;
}

}  // namespace

double evaluate_rss(const ChannelState& channel, const PhaseVector& phases) {
    return std::abs(coherent_sum(channel, phases));
}

double evaluate_rss_noisy(const ChannelState& channel, const PhaseVector& phases,
                          double noise_power, Rng& rng) {
    if (!(noise_power >= 0.0)) {
        throw ContractViolation("evaluate_rss_noisy: noise power must be >= 0");
    }
    if (noise_power == 0.0) {
        return evaluate_rss(channel, phases);
    }
    std::normal_distribution<double> component(0.0, std::sqrt(noise_power / 2.0));
    const double re = component(rng);
    const double im = component(rng);
    return std::abs(coherent_sum(channel, phases) + std::complex<double>{re, im});
}

double rss_max(const ChannelState& channel) {
    const double total = std::accumulate(channel.gains.begin(), channel.gains.end(), 0.0);
    return std::sqrt(channel.tx_power) * total;
}

GainRatio gain_ratio(double rss, const ChannelState& channel, bool noisy) {
    if (!(rss >= 0.0)) {
        throw ContractViolation("gain_ratio: rss must be >= 0");
    }
    const double peak = rss_max(channel);
    if (!(peak > 0.0)) {
        throw UndefinedRatio("gain_ratio: rss_max is zero");
    }
    const double ratio = rss / peak;
    if (noisy) {
        return {ratio, ratio > 1.0};
    }
    return {std::clamp(ratio, 0.0, 1.0), false};
}

}  // namespace beamsim
