#pragma once

// One D-QESA round to get close, then BioRARSA2 from the phases it left.
// Both halves switch once every node has been updated once and no sign check
// is outstanding, which each side can tell from its own protocol copy.

#include <optional>
#include <span>
#include <vector>

#include "beamsim/dqesa.hpp"
#include "beamsim/random_search.hpp"

namespace beamsim {

struct HybridParams {
    DqesaParams dqesa;
    BiorarsaParams biorarsa;
};

bool hybrid_should_switch(const DqesaProtocol& protocol);

class HybridReceiver {
public:
    HybridReceiver(std::vector<NodeId> order, const HybridParams& params, double tx_power);

    StepOutput observe(const Measurement& m);
    void on_topology(std::span<const TopologyEvent> events);
    std::optional<double> recorded_best() const;
    bool switched() const { return search_.has_value(); }

private:
    DqesaReceiver quadratic_;
    std::optional<BiorarsaReceiver> search_;
    BiorarsaParams search_params_;
    bool announced_ = false;
};

class HybridTransmitters {
public:
    HybridTransmitters(std::vector<NodeId> order, PhaseVector initial, const HybridParams& params,
                       Rng rng);

    const PhaseVector& request() const;
    const PhaseVector& committed() const;
    void apply(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after);

private:
    DqesaTransmitters quadratic_;
    std::optional<BiorarsaTransmitters> search_;
    BiorarsaParams search_params_;
    Rng rng_;
};

using HybridBeamformer = SplitBeamformer<HybridReceiver, HybridTransmitters>;

}  // namespace beamsim
