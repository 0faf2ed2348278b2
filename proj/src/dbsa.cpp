#include "beamsim/dbsa.hpp"

#include <algorithm>
#include <cmath>

namespace beamsim {

DbsaProtocol::DbsaProtocol(std::vector<NodeId> order, const DbsaParams& params)
    : order_(std::move(order)), alpha_(params.alpha_init), alpha_min_(params.alpha_min) {
    if (!(params.alpha_init > 0.0 && params.alpha_init <= kPi) || !(params.alpha_min > 0.0)) {
        throw ContractViolation("dbsa: need 0 < alpha_init <= pi and alpha_min > 0");
    }
    steps_ = std::max(2, static_cast<int>(std::lround(kTwoPi / params.alpha_init)));
}

void DbsaProtocol::next_sweep_node() {
    sweep_index_ = 1;
    best_index_ = 0;
    if (++cursor_ >= order_.size()) {
        cursor_ = 0;
        alpha_ = std::max(alpha_ / 2.0, alpha_min_);
        stage_ = Stage::forward;
    }
}

void DbsaProtocol::next_pass_node() {
    stage_ = Stage::forward;
    if (++cursor_ >= order_.size()) {
        cursor_ = 0;
        alpha_ = std::max(alpha_ / 2.0, alpha_min_);
    }
}

void DbsaProtocol::advance(const FeedbackMessage& fb) {
    if (order_.empty()) {
        return;
    }
    const bool better = fb.bit.value_or(false);
    switch (stage_) {
    case Stage::init:
        stage_ = Stage::sweep;
        cursor_ = 0;
        sweep_index_ = 1;
        best_index_ = 0;
        return;
    case Stage::sweep:
        if (better) {
            best_index_ = sweep_index_;
        }
        if (++sweep_index_ >= steps_) {
            next_sweep_node();
        }
        return;
    case Stage::forward:
        if (better) {
            next_pass_node();
        } else {
            stage_ = Stage::reverse;
        }
        return;
    case Stage::reverse:
        next_pass_node();
        return;
    }
}

// A removed node's remaining trials are skipped; newcomers join at the end
// of the order.
void DbsaProtocol::on_topology(std::span<const TopologyEvent> events) {
    for (const TopologyEvent& ev : events) {
        if (ev.kind == TopologyChange::added) {
            order_.push_back(ev.node_id);
            continue;
        }
        const auto it = std::find(order_.begin(), order_.end(), ev.node_id);
        if (it == order_.end()) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(it - order_.begin());
        order_.erase(it);
        if (idx < cursor_) {
            --cursor_;
        } else if (idx == cursor_) {
            sweep_index_ = 1;
            best_index_ = 0;
            if (stage_ == Stage::reverse) {
                stage_ = Stage::forward;
            }
            settle_cursor();
        }
    }
}

void DbsaProtocol::settle_cursor() {
    if (order_.empty()) {
        cursor_ = 0;
        return;
    }
    if (cursor_ < order_.size()) {
        return;
    }
    // The removed node closed the sweep or the pass.
    --cursor_;
    if (stage_ == Stage::sweep) {
        next_sweep_node();
    } else if (stage_ != Stage::init) {
        next_pass_node();
    } else {
        cursor_ = 0;
    }
}

DbsaReceiver::DbsaReceiver(std::vector<NodeId> order, const DbsaParams& params)
    : protocol_(std::move(order), params) {}

StepOutput DbsaReceiver::observe(const Measurement& m) {
    if (protocol_.empty()) {
        return {FeedbackMessage::none(), "idle", std::nullopt};
    }
    const DbsaProtocol::Stage stage = protocol_.stage();
    if (stage == DbsaProtocol::Stage::init) {
        best_ = m.rss;
        protocol_.advance(FeedbackMessage::none());
        return {FeedbackMessage::none(), "init", std::nullopt};
    }
    const NodeId node = protocol_.current();
    const bool better = !best_ || m.rss > *best_;
    if (better) {
        best_ = m.rss;
    }
    std::optional<NodeId> finalized;
    if ((stage == DbsaProtocol::Stage::sweep && protocol_.last_sweep_slot()) ||
        (stage == DbsaProtocol::Stage::forward && better) || stage == DbsaProtocol::Stage::reverse) {
        finalized = node;
    }
    const FeedbackMessage fb = FeedbackMessage::one_bit(better);
    protocol_.advance(fb);
    switch (stage) {
    case DbsaProtocol::Stage::sweep:
        return {fb, "sweep", finalized};
    case DbsaProtocol::Stage::forward:
        return {fb, "forward", finalized};
    default:
        return {fb, "reverse", finalized};
    }
}

DbsaTransmitters::DbsaTransmitters(std::vector<NodeId> order, PhaseVector initial,
                                   const DbsaParams& params)
    : protocol_(std::move(order), params), committed_(std::move(initial)) {
    if (committed_.size() != protocol_.order().size()) {
        throw ContractViolation("initial phases and node order differ in length");
    }
    rebuild_request();
}

std::size_t DbsaTransmitters::current_slot() const {
    const auto& order = protocol_.order();
    return static_cast<std::size_t>(
        std::find(order.begin(), order.end(), protocol_.current()) - order.begin());
}

void DbsaTransmitters::apply(const FeedbackMessage& fb) {
    if (protocol_.empty()) {
        return;
    }
    const bool better = fb.bit.value_or(false);
    const double alpha = protocol_.alpha();
    switch (protocol_.stage()) {
    case DbsaProtocol::Stage::init:
        break;
    case DbsaProtocol::Stage::sweep:
        if (protocol_.last_sweep_slot()) {
            const int best = better ? protocol_.sweep_index() : protocol_.best_index();
            double& psi = committed_.psi[current_slot()];
            psi = canonical_phase(psi + best * alpha);
        }
        break;
    case DbsaProtocol::Stage::forward:
        if (better) {
            double& psi = committed_.psi[current_slot()];
            psi = canonical_phase(psi + alpha);
        }
        break;
    case DbsaProtocol::Stage::reverse:
        if (better) {
            double& psi = committed_.psi[current_slot()];
            psi = canonical_phase(psi - alpha);
        }
        break;
    }
    protocol_.advance(fb);
    rebuild_request();
}

void DbsaTransmitters::on_topology(std::span<const TopologyEvent> events,
                                   const std::vector<NodeId>& ids_after,
                                   const PhaseVector& committed_after) {
    protocol_.on_topology(events);
    if (ids_after != protocol_.order() || committed_after.size() != ids_after.size()) {
        throw ContractViolation("transmitter membership out of step with the channel");
    }
    committed_ = committed_after;
    rebuild_request();
}

void DbsaTransmitters::rebuild_request() {
    request_ = committed_;
    if (protocol_.empty()) {
        return;
    }
    double offset = 0.0;
    switch (protocol_.stage()) {
    case DbsaProtocol::Stage::init:
        return;
    case DbsaProtocol::Stage::sweep:
        offset = protocol_.sweep_index() * protocol_.alpha();
        break;
    case DbsaProtocol::Stage::forward:
        offset = protocol_.alpha();
        break;
    case DbsaProtocol::Stage::reverse:
        offset = -protocol_.alpha();
        break;
    }
    double& psi = request_.psi[current_slot()];
    psi = canonical_phase(psi + offset);
}

}  // namespace beamsim
