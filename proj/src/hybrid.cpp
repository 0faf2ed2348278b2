#include "beamsim/hybrid.hpp"

namespace beamsim {

bool hybrid_should_switch(const DqesaProtocol& protocol) {
    return protocol.round() > 1 && !protocol.pending();
}

HybridReceiver::HybridReceiver(std::vector<NodeId> order, const HybridParams& params,
                               double tx_power)
    : quadratic_(std::move(order), params.dqesa, tx_power), search_params_(params.biorarsa) {}

StepOutput HybridReceiver::observe(const Measurement& m) {
    if (!search_) {
        StepOutput out = quadratic_.observe(m);
        if (hybrid_should_switch(quadratic_.protocol())) {
            search_.emplace(quadratic_.protocol().order().size(), search_params_);
        }
        return out;
    }
    StepOutput out = search_->observe(m);
    if (!announced_ && out.stage == "init") {
        out.stage = "switch";
        announced_ = true;
    }
    return out;
}

void HybridReceiver::on_topology(std::span<const TopologyEvent> events) {
    if (search_) {
        search_->on_topology(events);
        return;
    }
    quadratic_.on_topology(events);
    if (hybrid_should_switch(quadratic_.protocol())) {
        search_.emplace(quadratic_.protocol().order().size(), search_params_);
    }
}

std::optional<double> HybridReceiver::recorded_best() const {
    return search_ ? search_->recorded_best() : quadratic_.recorded_best();
}

HybridTransmitters::HybridTransmitters(std::vector<NodeId> order, PhaseVector initial,
                                       const HybridParams& params, Rng rng)
    : quadratic_(std::move(order), std::move(initial), params.dqesa.sign_mode),
      search_params_(params.biorarsa),
      rng_(rng) {}

const PhaseVector& HybridTransmitters::request() const {
    return search_ ? search_->request() : quadratic_.request();
}

const PhaseVector& HybridTransmitters::committed() const {
    return search_ ? search_->committed() : quadratic_.committed();
}

void HybridTransmitters::apply(const FeedbackMessage& fb) {
    if (search_) {
        search_->apply(fb);
        return;
    }
    quadratic_.apply(fb);
    if (hybrid_should_switch(quadratic_.protocol())) {
        search_.emplace(quadratic_.protocol().order(), quadratic_.committed(), search_params_, rng_);
    }
}

void HybridTransmitters::on_topology(std::span<const TopologyEvent> events,
                                     const std::vector<NodeId>& ids_after,
                                     const PhaseVector& committed_after) {
    if (search_) {
        search_->on_topology(events, ids_after, committed_after);
        return;
    }
    quadratic_.on_topology(events, ids_after, committed_after);
    if (hybrid_should_switch(quadratic_.protocol())) {
        search_.emplace(quadratic_.protocol().order(), quadratic_.committed(), search_params_, rng_);
    }
}

}  // namespace beamsim
