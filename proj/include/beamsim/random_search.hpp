#pragma once

// Random-perturbation searches driven by one feedback bit per slot.
//
// OneBitRandom: every node perturbs by U[-delta0, delta0] each slot and keeps
// the perturbation when the RSS beats the best seen so far.
//
// Biorarsa2: trials of a random direction with a reverse attempt, a short
// swim along successful directions, step-size adaptation per block of trials
// and a periodic reset of the reference level.

#include <span>
#include <vector>

#include "beamsim/beamformer.hpp"

namespace beamsim {

struct OneBitParams {
    double delta0 = kPi / 18.0;
};

class OneBitReceiver {
public:
    explicit OneBitReceiver(std::size_t n_nodes) : n_nodes_(n_nodes) {}

    StepOutput observe(const Measurement& m);
    void on_topology(std::span<const TopologyEvent> events);
    std::optional<double> recorded_best() const { return best_; }

private:
    std::size_t n_nodes_;
    std::optional<double> best_;
};

class OneBitTransmitters {
public:
    OneBitTransmitters(std::vector<NodeId> order, PhaseVector initial, const OneBitParams& params,
                       Rng rng);

    const PhaseVector& request() const { return request_; }
    const PhaseVector& committed() const { return committed_; }
    void apply(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after);

private:
    double draw();
    void rebuild_request();

    std::vector<NodeId> order_;
    PhaseVector committed_;
    PhaseVector request_;
    std::vector<double> perturbation_;
    OneBitParams params_;
    Rng rng_;
    bool started_ = false;  // the first slot measures the unperturbed phases
};

using OneBitBeamformer = SplitBeamformer<OneBitReceiver, OneBitTransmitters>;

struct BiorarsaParams {
    double delta0 = kPi / 2.0;
    int trials_per_block = 10;
    int swim_limit = 4;
    int failure_limit = 15;
    double delta_reset = kPi / 2.0;
    double rho = 0.5;
    double rho_reset = 0.95;
    double delta_max = kPi;
};

class BiorarsaProtocol {
public:
    enum class Stage { init, probe, reverse, swim, reset };

    explicit BiorarsaProtocol(const BiorarsaParams& params);

    Stage stage() const { return stage_; }
    double step_size() const { return delta_; }
    int direction() const { return direction_; }
    int trial() const { return trial_; }
    int failures() const { return failures_; }
    /// Increments whenever a new trial (and so a new random direction) starts.
    std::uint64_t trial_serial() const { return serial_; }

    void advance(const FeedbackMessage& fb);

private:
    void accept(int direction);
    void end_trial(int omega);
    void start_trial();

    BiorarsaParams params_;
    Stage stage_ = Stage::init;
    double delta_;
    int trial_ = 1;
    int omega_ = 0;
    int omega_sum_ = 0;
    int failures_ = 0;
    int direction_ = 1;
    std::uint64_t serial_ = 0;
};

class BiorarsaReceiver {
public:
    BiorarsaReceiver(std::size_t n_nodes, const BiorarsaParams& params);

    StepOutput observe(const Measurement& m);
    void on_topology(std::span<const TopologyEvent> events);
    std::optional<double> recorded_best() const { return reference_; }
    const BiorarsaProtocol& protocol() const { return protocol_; }

private:
    BiorarsaProtocol protocol_;
    BiorarsaParams params_;
    std::size_t n_nodes_;
    std::optional<double> reference_;
};

class BiorarsaTransmitters {
public:
    BiorarsaTransmitters(std::vector<NodeId> order, PhaseVector initial,
                         const BiorarsaParams& params, Rng rng);

    const PhaseVector& request() const { return request_; }
    const PhaseVector& committed() const { return committed_; }
    void apply(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after);
    const BiorarsaProtocol& protocol() const { return protocol_; }

private:
    double draw();
    void redraw_if_new_trial();
    void shift(double sign);
    void rebuild_request();

    BiorarsaProtocol protocol_;
    std::vector<NodeId> order_;
    PhaseVector committed_;
    PhaseVector request_;
    std::vector<double> direction_;
    Rng rng_;
    std::uint64_t drawn_for_ = 0;
};

using BiorarsaBeamformer = SplitBeamformer<BiorarsaReceiver, BiorarsaTransmitters>;

}  // namespace beamsim
