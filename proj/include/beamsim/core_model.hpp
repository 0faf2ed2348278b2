#pragma once

// Received-signal-strength model for distributed transmit beamforming.
//
// Every transmitter i reaches the receiver through a flat channel
// h_i = a_i e^{j phi_i} and applies a commanded phase psi_i, so the receiver
// sees sqrt(P) * sum_i a_i e^{j(phi_i + psi_i)} (plus noise when enabled).

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamsim {

using NodeId = std::uint64_t;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Reduce an angle into (-pi, pi]. Throws ContractViolation on non-finite input.
double canonical_phase(double theta);

struct ChannelState {
    std::vector<double> gains;   // a_i >= 0
    std::vector<double> phases;  // phi_i in (-pi, pi]
    std::vector<NodeId> node_ids;
    double tx_power = 1.0;
    NodeId next_node_id = 0;  // ids are never reused after removal

    std::size_t size() const { return gains.size(); }
    bool empty() const { return gains.empty(); }

    /// Index of `id`, or size() when absent.
    std::size_t index_of(NodeId id) const;

    /// Throws ContractViolation when the parallel-list, range or uniqueness
    /// invariants are broken.
    void validate() const;
};

/// Commanded phases psi_i, parallel to the ChannelState node order.
struct PhaseVector {
    std::vector<double> psi;

    std::size_t size() const { return psi.size(); }
    bool operator==(const PhaseVector&) const = default;
};

struct Measurement {
    double rss = 0.0;
    std::int64_t slot = 0;
};

double evaluate_rss(const ChannelState& channel, const PhaseVector& phases);

/// |signal + w| with w ~ CN(0, noise_power). noise_power == 0 returns
/// evaluate_rss() without touching the generator.
double evaluate_rss_noisy(const ChannelState& channel, const PhaseVector& phases,
                          double noise_power, Rng& rng);

double rss_max(const ChannelState& channel);

struct GainRatio {
    double value = 0.0;
    bool exceeds_max = false;  // only possible for noisy measurements
};

class UndefinedRatio : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// rss / rss_max. Noiseless ratios are clamped into [0, 1]; noisy ones are
/// reported as-is and flagged when they exceed 1.
GainRatio gain_ratio(double rss, const ChannelState& channel, bool noisy = false);

/// Noise variance for a configured noise power in dB relative to unit signal power.
inline double noise_power_from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace beamsim
