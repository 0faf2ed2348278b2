#pragma once

// Uniform slot-by-slot contract shared by every beamforming algorithm.
//
// Each slot the harness transmits request(), measures the RSS and calls
// step(). Algorithms are built from two halves: a receiver that sees only
// measurements and emits a FeedbackMessage, and a transmitter array that sees
// only that message (plus its own state) and moves the phases. The halves
// never share mutable state.

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "beamsim/channel_dynamics.hpp"
#include "beamsim/core_model.hpp"
#include "beamsim/feedback.hpp"

namespace beamsim {

struct StepOutput {
    FeedbackMessage feedback;
    std::string_view stage;
    std::optional<NodeId> finalized_node;  // node whose single-node update completed
};

class Beamformer {
public:
    virtual ~Beamformer() = default;

    virtual std::string_view name() const = 0;
    /// Phases to transmit in the coming slot.
    virtual const PhaseVector& request() const = 0;
    /// Operating point the transmitters have settled on.
    virtual const PhaseVector& committed() const = 0;
    virtual StepOutput step(const Measurement& measurement) = 0;
    /// Membership changed before the coming slot. `committed_after` and `ids_after`
    /// are the committed phases and node order after the change.
    virtual void on_topology(std::span<const TopologyEvent> events,
                             const std::vector<NodeId>& ids_after,
                             const PhaseVector& committed_after) = 0;
    /// The receiver's recorded comparison value, when the algorithm keeps one.
    virtual std::optional<double> recorded_best() const = 0;
    virtual std::unique_ptr<Beamformer> clone() const = 0;
};

/// Glues a receiver and a transmitter array. The only data crossing from
/// `Rx` to `Tx` is the FeedbackMessage.
template <class Rx, class Tx>
class SplitBeamformer final : public Beamformer {
public:
    SplitBeamformer(std::string_view name, Rx rx, Tx tx)
        : name_(name), rx_(std::move(rx)), tx_(std::move(tx)) {}

    std::string_view name() const override { return name_; }
    const PhaseVector& request() const override { return tx_.request(); }
    const PhaseVector& committed() const override { return tx_.committed(); }

    StepOutput step(const Measurement& measurement) override {
        StepOutput out = rx_.observe(measurement);
        tx_.apply(out.feedback);
        return out;
    }

    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after) override {
        rx_.on_topology(events);
        tx_.on_topology(events, ids_after, committed_after);
    }

    std::optional<double> recorded_best() const override { return rx_.recorded_best(); }

    std::unique_ptr<Beamformer> clone() const override {
        return std::make_unique<SplitBeamformer>(*this);
    }

    const Rx& receiver() const { return rx_; }
    const Tx& transmitters() const { return tx_; }

private:
    std::string_view name_;
    Rx rx_;
    Tx tx_;
};

}  // namespace beamsim
