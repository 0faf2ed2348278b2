#include "beamsim/random_search.hpp"

#include <algorithm>
#include <unordered_map>

namespace beamsim {

namespace {

std::size_t count_after(std::size_t n, std::span<const TopologyEvent> events) {
    for (const TopologyEvent& ev : events) {
        if (ev.kind == TopologyChange::added) {
            ++n;
        } else if (n > 0) {
            --n;
        }
    }
    return n;
}

// Re-aligns per-node values with the new membership; newcomers get `fresh()`.
template <class Fresh>
std::vector<double> realign(const std::vector<NodeId>& old_ids, const std::vector<double>& values,
                            const std::vector<NodeId>& new_ids, Fresh fresh) {
    std::unordered_map<NodeId, double> by_id;
    for (std::size_t i = 0; i < old_ids.size() && i < values.size(); ++i) {
        by_id.emplace(old_ids[i], values[i]);
    }
    std::vector<double> out;
    out.reserve(new_ids.size());
    for (NodeId id : new_ids) {
        const auto it = by_id.find(id);
        out.push_back(it != by_id.end() ? it->second : fresh());
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- one-bit

StepOutput OneBitReceiver::observe(const Measurement& m) {
    if (n_nodes_ == 0) {
        return {FeedbackMessage::none(), "idle", std::nullopt};
    }
    if (!best_) {
        best_ = m.rss;
        return {FeedbackMessage::none(), "init", std::nullopt};
    }
    const bool better = m.rss > *best_;
    if (better) {
        best_ = m.rss;
    }
    return {FeedbackMessage::one_bit(better), "perturb", std::nullopt};
}

void OneBitReceiver::on_topology(std::span<const TopologyEvent> events) {
    n_nodes_ = count_after(n_nodes_, events);
}

OneBitTransmitters::OneBitTransmitters(std::vector<NodeId> order, PhaseVector initial,
                                       const OneBitParams& params, Rng rng)
    : order_(std::move(order)), committed_(std::move(initial)), params_(params), rng_(rng) {
    if (committed_.size() != order_.size()) {
        throw ContractViolation("initial phases and node order differ in length");
    }
    if (!(params_.delta0 > 0.0)) {
        throw ContractViolation("one-bit random: delta0 must be > 0");
    }
    rebuild_request();
}

double OneBitTransmitters::draw() {
    return std::uniform_real_distribution<double>(-params_.delta0, params_.delta0)(rng_);
}

void OneBitTransmitters::apply(const FeedbackMessage& fb) {
    if (order_.empty()) {
        return;
    }
    if (started_ && fb.bit.value_or(false)) {
        committed_ = request_;
    }
    started_ = true;
    perturbation_.resize(order_.size());
    for (double& d : perturbation_) {
        d = draw();
    }
    rebuild_request();
}

void OneBitTransmitters::on_topology(std::span<const TopologyEvent>,
                                     const std::vector<NodeId>& ids_after,
                                     const PhaseVector& committed_after) {
    if (committed_after.size() != ids_after.size()) {
        throw ContractViolation("transmitter membership out of step with the channel");
    }
    if (started_) {
        perturbation_ = realign(order_, perturbation_, ids_after, [this] { return draw(); });
    }
    order_ = ids_after;
    committed_ = committed_after;
    rebuild_request();
}

void OneBitTransmitters::rebuild_request() {
    request_ = committed_;
    if (!started_) {
        return;
    }
    for (std::size_t i = 0; i < request_.size(); ++i) {
        request_.psi[i] = canonical_phase(request_.psi[i] + perturbation_[i]);
    }
}

// ---------------------------------------------------------------- biorarsa2

BiorarsaProtocol::BiorarsaProtocol(const BiorarsaParams& params)
    : params_(params), delta_(params.delta0) {
    if (!(params.delta0 > 0.0) || params.trials_per_block < 1 || params.swim_limit < 1 ||
        params.failure_limit < 0 || !(params.delta_reset > 0.0) || !(params.rho > 0.0) ||
        !(params.rho_reset > 0.0 && params.rho_reset <= 1.0) || !(params.delta_max > 0.0)) {
        throw ContractViolation("biorarsa2: invalid parameters");
    }
}

void BiorarsaProtocol::start_trial() {
    stage_ = Stage::probe;
    omega_ = 0;
    ++serial_;
}

void BiorarsaProtocol::accept(int direction) {
    failures_ = 0;  // counts consecutive failed trials
    direction_ = direction;
    omega_ = 2;
    if (omega_ > params_.swim_limit) {
        end_trial(omega_);
    } else {
        stage_ = Stage::swim;
    }
}

void BiorarsaProtocol::end_trial(int omega) {
    omega_sum_ += omega;
    if (++trial_ > params_.trials_per_block) {
        const double mean = static_cast<double>(omega_sum_) / params_.trials_per_block;
        delta_ = std::min(delta_ * std::max(params_.rho, mean), params_.delta_max);
        omega_sum_ = 0;
        trial_ = 1;
        if (failures_ > params_.failure_limit) {
            delta_ = params_.delta_reset;
            stage_ = Stage::reset;
            return;
        }
    }
    start_trial();
}

void BiorarsaProtocol::advance(const FeedbackMessage& fb) {
    const bool yes = fb.bit.value_or(false);
    switch (stage_) {
    case Stage::init:
        start_trial();
        return;
    case Stage::probe:
        if (yes) {
            accept(1);
        } else {
            stage_ = Stage::reverse;
        }
        return;
    case Stage::reverse:
        if (yes) {
            accept(-1);
        } else {
            ++failures_;
            end_trial(0);
        }
        return;
    case Stage::swim:
        if (yes && ++omega_ <= params_.swim_limit) {
            return;
        }
        end_trial(omega_);
        return;
    case Stage::reset:
        failures_ = 0;
        start_trial();
        return;
    }
}

BiorarsaReceiver::BiorarsaReceiver(std::size_t n_nodes, const BiorarsaParams& params)
    : protocol_(params), params_(params), n_nodes_(n_nodes) {}

StepOutput BiorarsaReceiver::observe(const Measurement& m) {
    if (n_nodes_ == 0) {
        return {FeedbackMessage::none(), "idle", std::nullopt};
    }
    FeedbackMessage fb;
    std::string_view stage;
    switch (protocol_.stage()) {
    case BiorarsaProtocol::Stage::init:
        reference_ = m.rss;
        stage = "init";
        break;
    case BiorarsaProtocol::Stage::probe:
    case BiorarsaProtocol::Stage::reverse: {
        const bool better = m.rss > *reference_;
        if (better) {
            reference_ = m.rss;
        }
        fb = FeedbackMessage::one_bit(better);
        stage = protocol_.stage() == BiorarsaProtocol::Stage::probe ? "probe" : "reverse";
        break;
    }
    case BiorarsaProtocol::Stage::swim: {
        const bool go_on = m.rss >= *reference_;
        if (go_on) {
            reference_ = m.rss;
        }
        fb = FeedbackMessage::one_bit(go_on);
        stage = "swim";
        break;
    }
    case BiorarsaProtocol::Stage::reset:
        if (m.rss < *reference_) {
            reference_ = params_.rho_reset * m.rss;
        }
        stage = "reset";
        break;
    }
    protocol_.advance(fb);
    return {fb, stage, std::nullopt};
}

void BiorarsaReceiver::on_topology(std::span<const TopologyEvent> events) {
    n_nodes_ = count_after(n_nodes_, events);
}

BiorarsaTransmitters::BiorarsaTransmitters(std::vector<NodeId> order, PhaseVector initial,
                                           const BiorarsaParams& params, Rng rng)
    : protocol_(params), order_(std::move(order)), committed_(std::move(initial)), rng_(rng) {
    if (committed_.size() != order_.size()) {
        throw ContractViolation("initial phases and node order differ in length");
    }
    rebuild_request();
}

double BiorarsaTransmitters::draw() {
    const double d = protocol_.step_size();
    return std::uniform_real_distribution<double>(-d, d)(rng_);
}

void BiorarsaTransmitters::redraw_if_new_trial() {
    if (protocol_.trial_serial() == drawn_for_) {
        return;
    }
    drawn_for_ = protocol_.trial_serial();
    direction_.resize(order_.size());
    for (double& d : direction_) {
        d = draw();
    }
}

void BiorarsaTransmitters::shift(double sign) {
    for (std::size_t i = 0; i < committed_.size(); ++i) {
        committed_.psi[i] = canonical_phase(committed_.psi[i] + sign * direction_[i]);
    }
}

void BiorarsaTransmitters::apply(const FeedbackMessage& fb) {
    if (order_.empty()) {
        return;
    }
    if (fb.bit.value_or(false)) {
        switch (protocol_.stage()) {
        case BiorarsaProtocol::Stage::probe:
            shift(1.0);
            break;
        case BiorarsaProtocol::Stage::reverse:
            shift(-1.0);
            break;
        case BiorarsaProtocol::Stage::swim:
            shift(protocol_.direction());
            break;
        default:
            break;
        }
    }
    protocol_.advance(fb);
    redraw_if_new_trial();
    rebuild_request();
}

void BiorarsaTransmitters::on_topology(std::span<const TopologyEvent>,
                                       const std::vector<NodeId>& ids_after,
                                       const PhaseVector& committed_after) {
    if (committed_after.size() != ids_after.size()) {
        throw ContractViolation("transmitter membership out of step with the channel");
    }
    if (!direction_.empty() || drawn_for_ > 0) {
        direction_ = realign(order_, direction_, ids_after, [this] { return draw(); });
    }
    order_ = ids_after;
    committed_ = committed_after;
    rebuild_request();
}

void BiorarsaTransmitters::rebuild_request() {
    request_ = committed_;
    double sign = 0.0;
    switch (protocol_.stage()) {
    case BiorarsaProtocol::Stage::probe:
        sign = 1.0;
        break;
    case BiorarsaProtocol::Stage::reverse:
        sign = -1.0;
        break;
    case BiorarsaProtocol::Stage::swim:
        sign = protocol_.direction();
        break;
    default:
        return;
    }
    for (std::size_t i = 0; i < request_.size(); ++i) {
        request_.psi[i] = canonical_phase(request_.psi[i] + sign * direction_[i]);
    }
}

}  // namespace beamsim
