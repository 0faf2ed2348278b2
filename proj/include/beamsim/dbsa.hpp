#pragma once

// Deterministic bisection search with one-bit feedback.
//
// After an initial measurement every node sweeps its phase over multiples of
// alpha and keeps the best one; alpha then halves and the nodes take turns
// trying +alpha, then -alpha, halving alpha after each full pass.

#include <span>
#include <vector>

#include "beamsim/beamformer.hpp"

namespace beamsim {

struct DbsaParams {
    double alpha_init = kPi / 2.0;
    double alpha_min = 1e-10;
};

class DbsaProtocol {
public:
    enum class Stage { init, sweep, forward, reverse };

    DbsaProtocol(std::vector<NodeId> order, const DbsaParams& params);

    Stage stage() const { return stage_; }
    bool empty() const { return order_.empty(); }
    NodeId current() const { return order_.at(cursor_); }
    double alpha() const { return alpha_; }
    int sweep_index() const { return sweep_index_; }
    int best_index() const { return best_index_; }
    int sweep_steps() const { return steps_; }
    bool last_sweep_slot() const { return stage_ == Stage::sweep && sweep_index_ + 1 >= steps_; }
    const std::vector<NodeId>& order() const { return order_; }

    void advance(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events);

private:
    void next_sweep_node();
    void next_pass_node();
    void settle_cursor();

    std::vector<NodeId> order_;
    double alpha_;
    double alpha_min_;
    int steps_;  // sweep positions per node, including the current phase
    Stage stage_ = Stage::init;
    std::size_t cursor_ = 0;
    int sweep_index_ = 1;
    int best_index_ = 0;
};

class DbsaReceiver {
public:
    DbsaReceiver(std::vector<NodeId> order, const DbsaParams& params);

    StepOutput observe(const Measurement& m);
    void on_topology(std::span<const TopologyEvent> events) { protocol_.on_topology(events); }
    std::optional<double> recorded_best() const { return best_; }
    const DbsaProtocol& protocol() const { return protocol_; }

private:
    DbsaProtocol protocol_;
    std::optional<double> best_;
};

class DbsaTransmitters {
public:
    DbsaTransmitters(std::vector<NodeId> order, PhaseVector initial, const DbsaParams& params);

    const PhaseVector& request() const { return request_; }
    const PhaseVector& committed() const { return committed_; }
    void apply(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after);

private:
    std::size_t current_slot() const;
    void rebuild_request();

    DbsaProtocol protocol_;
    PhaseVector committed_;
    PhaseVector request_;
};

using DbsaBeamformer = SplitBeamformer<DbsaReceiver, DbsaTransmitters>;

}  // namespace beamsim
