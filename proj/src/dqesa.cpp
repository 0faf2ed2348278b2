#include "beamsim/dqesa.hpp"

#include <algorithm>
#include <cmath>

#include "beamsim/receiver_math.hpp"

namespace beamsim {

// ---------------------------------------------------------------- protocol

DqesaProtocol::DqesaProtocol(std::vector<NodeId> order, SignMode mode)
    : order_(std::move(order)), mode_(mode) {}

void DqesaProtocol::next_node() {
    stage_ = Stage::base;
    if (++cursor_ >= order_.size()) {
        cursor_ = 0;
        ++round_;
    }
}

void DqesaProtocol::advance(const FeedbackMessage& fb) {
    if (order_.empty()) {
        return;
    }
    switch (stage_) {
    case Stage::base:
        if (pending_) {
            const bool fixed = mode_ == SignMode::probe && !fb.empty();
            pending_.reset();
            if (fixed) {
                return;  // the fix used this slot; measure the base again
            }
        }
        stage_ = Stage::flip;
        return;
    case Stage::flip:
        if (fb.quarter_probe) {
            stage_ = Stage::quarter;
            return;
        }
        if (fb.has_angle() && mode_ != SignMode::optimistic) {
            pending_ = Pending{order_[cursor_], fb.angle};
        }
        next_node();
        return;
    case Stage::quarter:
        next_node();
        return;
    }
}

void DqesaProtocol::on_topology(std::span<const TopologyEvent> events) {
    if (events.empty()) {
        return;
    }
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
        }
    }
    // Old measurements describe a different network: drop the unverified
    // update and restart whatever visit was in flight.
    pending_.reset();
    stage_ = Stage::base;
    if (cursor_ >= order_.size()) {
        cursor_ = 0;
        if (!order_.empty()) {
            ++round_;
        }
    }
}

// ---------------------------------------------------------------- receiver

DqesaReceiver::DqesaReceiver(std::vector<NodeId> order, const DqesaParams& params, double tx_power)
    : protocol_(std::move(order), params.sign_mode),
      params_(params),
      coder_(params.feedback, params.dead_zone_factor, params.exact_dead_zone),
      tx_power_(tx_power) {
    if (!(tx_power > 0.0)) {
        throw ContractViolation("tx_power must be > 0");
    }
}

std::optional<DqesaReceiver::GainPair> DqesaReceiver::gain_for(NodeId node) const {
    if (params_.shared_gain) {
        return shared_;
    }
    const auto it = gains_.find(node);
    if (it == gains_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<double> DqesaReceiver::gain_estimate(NodeId node) const {
    const auto g = gain_for(node);
    return g ? std::optional<double>(g->t) : std::nullopt;
}

// A fresh solve yields the unordered pair {|r|, |t|}. Gains are fixed, so
// |t| is the new root that reappears from the previous pair while |r| moves
// with the other nodes. When both roots reappear (nothing moved), keep the
// pairing that moves them least.
void DqesaReceiver::refresh_gain(NodeId node, double lo, double hi) {
    std::optional<GainPair> old = gain_for(node);
    GainPair next{lo, hi};
    if (old) {
        const double d_lo = std::min(std::abs(lo - old->t), std::abs(lo - old->other));
        const double d_hi = std::min(std::abs(hi - old->t), std::abs(hi - old->other));
        const double both_match = 1e-6 * (lo + hi);
        bool swap = d_hi < d_lo;
        if (d_lo <= both_match && d_hi <= both_match) {
            swap = std::abs(hi - old->t) + std::abs(lo - old->other) <
                   std::abs(lo - old->t) + std::abs(hi - old->other);
        }
        if (swap) {
            next = GainPair{hi, lo};
        }
    }
    if (params_.shared_gain) {
        shared_confirmed_ = shared_confirmed_ || old.has_value();
        shared_ = next;
    } else {
        gains_[node] = next;
    }
}

StepOutput DqesaReceiver::observe(const Measurement& m) {
    if (protocol_.empty()) {
        return {FeedbackMessage::none(), "idle", std::nullopt};
    }
    switch (protocol_.stage()) {
    case DqesaProtocol::Stage::base:
        return observe_base(m.rss);
    case DqesaProtocol::Stage::flip:
        return observe_flip(m.rss);
    case DqesaProtocol::Stage::quarter:
        return observe_quarter(m.rss);
    }
    return {};
}

StepOutput DqesaReceiver::observe_base(double rss) {
    if (!protocol_.check_slot() || !check_) {
        m_base_ = rss;
        recorded_ = rss;
        const FeedbackMessage fb = FeedbackMessage::none();
        protocol_.advance(fb);
        return {fb, "base", std::nullopt};
    }

    const DqesaProtocol::Pending pending = *protocol_.pending();
    const Check check = *check_;
    check_.reset();
    // This slot measured the node rotated by -angle from its kept phase.
    const OffsetSolve os = solve_with_offset(check.kept, check.other, rss, -pending.angle, tx_power_);
    const std::optional<GainPair> cached = gain_for(pending.node);
    if (!os.degenerate) {
        refresh_gain(pending.node, os.lo, os.hi);
    }
    const double now = canonical_phase(os.beta - pending.angle);

    if (params_.sign_mode == SignMode::probe) {
        FeedbackMessage fix;
        if (!os.degenerate) {
            double residual = now;
            if (std::abs(residual) > kPi / 2.0) {
                fix.bit = true;  // rotate by pi first
                residual = canonical_phase(residual + kPi);
            }
            const FeedbackMessage angle = coder_.encode(residual);
            fix.angle_kind = angle.angle_kind;
            fix.angle = angle.angle;
            fix.angle_bits = angle.angle_bits;
        }
        if (!fix.empty()) {
            protocol_.advance(fix);
            return {fix, "fix", pending.node};
        }
        m_base_ = rss;
        recorded_ = rss;
        protocol_.advance(fix);
        return {fix, "check", pending.node};
    }

    // Deferred: the only correction is mirroring the rotation (+2 angle),
    // applied by the transmitter before the next slot.
    const double mirrored = canonical_phase(os.beta + pending.angle);
    const bool flip = !os.degenerate && std::cos(mirrored) > std::cos(now);
    FeedbackMessage fb = flip ? FeedbackMessage::one_bit(true) : FeedbackMessage::none();
    m_base_ = flip ? predict_mirrored(check, os, cached, mirrored) : rss;
    recorded_ = m_base_;
    protocol_.advance(fb);
    return {fb, "check", pending.node};
}

// RSS after mirroring the pending rotation. A chain of flips would otherwise
// feed each prediction into the next node's kept value and double its error
// at every step, so rebuild |r| from the measured pi-slot and the cached |t|
// instead; the kept value then only enters through the angle. A shared |t|
// is no anchor: every node re-solves it from the previous prediction.
double DqesaReceiver::predict_mirrored(const Check& check, const OffsetSolve& os,
                                       const std::optional<GainPair>& cached, double mirrored) const {
    if (!cached || os.degenerate || params_.shared_gain) {
        return predicted_rss(os.sum_sq, os.product2, mirrored, tx_power_);
    }
    const double t = cached->t;
    const double at_flip = os.beta + (check.flipped_kept ? 0.0 : kPi);
    const double c = t * std::cos(at_flip);
    const double disc = check.flipped * check.flipped / tx_power_ - t * t + c * c;
    if (disc < 0.0) {
        return predicted_rss(os.sum_sq, os.product2, mirrored, tx_power_);
    }
    // Two candidate |r|; take the one nearer the fresh solve's companion root.
    const double guess = std::abs(os.lo - t) < std::abs(os.hi - t) ? os.hi : os.lo;
    const double root = std::sqrt(disc);
    double r = -c + root;
    if (-c - root >= 0.0 && std::abs(-c - root - guess) < std::abs(r - guess)) {
        r = -c - root;
    }
    return std::sqrt(tx_power_ * std::max(r * r + t * t + 2.0 * r * t * std::cos(mirrored), 0.0));
}

StepOutput DqesaReceiver::observe_flip(double rss) {
    const NodeId node = protocol_.current();
    const bool keep = rss > m_base_;
    m_kept_ = keep ? rss : m_base_;
    m_other_ = keep ? m_base_ : rss;
    recorded_ = m_kept_;

    const std::optional<GainPair> gain = gain_for(node);
    bool three_path = !gain;
    TwoSolve two;
    if (gain) {
        two = solve_two(m_kept_, m_other_, gain->t, tx_power_);
        // A clamped solve means the cached |t| no longer fits these
        // measurements; only the sign-checking modes can afford to re-learn it.
        bool misfit = std::abs(two.cos_argument) > 1.0 + 1e-9;
        if (misfit && params_.shared_gain && !shared_confirmed_) {
            // A lone solve cannot tell |t| from |r|; the companion root may be
            // the one. Once confirmed, a misfit is rounding near alignment and
            // the swapped root would fit just as well by symmetry.
            const TwoSolve alt = solve_two(m_kept_, m_other_, gain->other, tx_power_);
            if (!alt.degenerate && std::abs(alt.cos_argument) <= 1.0 + 1e-9) {
                shared_ = GainPair{gain->other, gain->t};
                shared_confirmed_ = true;
                two = alt;
                misfit = false;
            }
        }
        three_path = two.degenerate || (misfit && params_.sign_mode != SignMode::optimistic);
    }

    FeedbackMessage fb;
    if (three_path) {
        fb.bit = keep;
        fb.quarter_probe = true;
        protocol_.advance(fb);
        return {fb, "flip", std::nullopt};
    }

    fb = coder_.encode(two.beta_magnitude);
    fb.bit = keep;
    std::optional<NodeId> finalized = node;
    if (fb.has_angle() && params_.sign_mode != SignMode::optimistic) {
        check_ = Check{m_kept_, m_other_, rss, keep};
        finalized.reset();
    }
    protocol_.advance(fb);
    return {fb, "flip", finalized};
}

StepOutput DqesaReceiver::observe_quarter(double rss) {
    const NodeId node = protocol_.current();
    const ThreeSolve s = solve_three(m_kept_, m_other_, rss, tx_power_);
    if (!s.degenerate) {
        refresh_gain(node, s.t_mag, s.r_mag);
    }
    const FeedbackMessage fb = coder_.encode(s.beta);
    protocol_.advance(fb);
    return {fb, "quarter", node};
}

void DqesaReceiver::on_topology(std::span<const TopologyEvent> events) {
    protocol_.on_topology(events);
    if (!events.empty()) {
        check_.reset();
    }
    for (const TopologyEvent& ev : events) {
        if (ev.kind == TopologyChange::removed) {
            gains_.erase(ev.node_id);
        }
    }
}

// ------------------------------------------------------------ transmitters

DqesaTransmitters::DqesaTransmitters(std::vector<NodeId> order, PhaseVector initial, SignMode mode)
    : protocol_(std::move(order), mode), committed_(std::move(initial)) {
    if (committed_.size() != protocol_.order().size()) {
        throw ContractViolation("initial phases and node order differ in length");
    }
    rebuild_request();
}

std::size_t DqesaTransmitters::slot_of(NodeId node) const {
    const auto& order = protocol_.order();
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), node) - order.begin());
}

void DqesaTransmitters::rotate(NodeId node, double by) {
    double& psi = committed_.psi.at(slot_of(node));
    psi = canonical_phase(psi + by);
}

void DqesaTransmitters::apply(const FeedbackMessage& fb) {
    if (protocol_.empty()) {
        return;
    }
    switch (protocol_.stage()) {
    case DqesaProtocol::Stage::base:
        if (protocol_.check_slot()) {
            const auto& pending = *protocol_.pending();
            if (protocol_.sign_mode() == SignMode::probe) {
                if (fb.bit.value_or(false)) {
                    rotate(pending.node, kPi);
                }
                if (fb.has_angle()) {
                    rotate(pending.node, -fb.angle);
                }
            } else if (fb.bit.value_or(false)) {
                rotate(pending.node, 2.0 * pending.angle);
            }
        }
        break;
    case DqesaProtocol::Stage::flip: {
        const NodeId node = protocol_.current();
        if (fb.bit.value_or(false)) {
            rotate(node, kPi);
        }
        if (!fb.quarter_probe && fb.has_angle()) {
            rotate(node, -fb.angle);
        }
        break;
    }
    case DqesaProtocol::Stage::quarter:
        if (fb.has_angle()) {
            rotate(protocol_.current(), -fb.angle);
        }
        break;
    }
    protocol_.advance(fb);
    rebuild_request();
}

void DqesaTransmitters::on_topology(std::span<const TopologyEvent> events,
                                    const std::vector<NodeId>& ids_after,
                                    const PhaseVector& committed_after) {
    protocol_.on_topology(events);
    if (ids_after != protocol_.order() || committed_after.size() != ids_after.size()) {
        throw ContractViolation("transmitter membership out of step with the channel");
    }
    committed_ = committed_after;
    rebuild_request();
}

void DqesaTransmitters::rebuild_request() {
    request_ = committed_;
    if (protocol_.empty()) {
        return;
    }
    const std::size_t i = slot_of(protocol_.current());
    switch (protocol_.stage()) {
    case DqesaProtocol::Stage::base:
        break;
    case DqesaProtocol::Stage::flip:
        request_.psi[i] = canonical_phase(request_.psi[i] + kPi);
        break;
    case DqesaProtocol::Stage::quarter:
        request_.psi[i] = canonical_phase(request_.psi[i] + kPi / 2.0);
        break;
    }
}

}  // namespace beamsim
