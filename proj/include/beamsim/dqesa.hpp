#pragma once

// Quadratic-equation search (D-QESA) and its equal-gain variant.
//
// One node at a time: measure (base), measure with the node rotated by pi
// (flip), keep the better of the two, solve for the misalignment and send the
// correction. The receiver needs |t| for the two-measurement solve; until it
// has one it spends a third slot with the node rotated by pi/2.

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "beamsim/beamformer.hpp"

namespace beamsim {

struct OffsetSolve;

/// How the receiver resolves the sign that the two-measurement solve loses.
enum class SignMode {
    probe,       // next slot measures the update; a correction costs one extra slot
    optimistic,  // always rotate by -|beta|, never check
    deferred,    // the next node's first slot doubles as the check; one-bit flip fix
};

struct DqesaParams {
    FeedbackResolution feedback;
    SignMode sign_mode = SignMode::probe;
    bool shared_gain = false;  // equal-gain variant: one |t| for every node
    double dead_zone_factor = 0.25;
    double exact_dead_zone = 1e-6;
};

/// Visit schedule mirrored by the receiver and the transmitters. It advances
/// only on FeedbackMessages and topology events, so both halves agree on it
/// without sharing anything else.
class DqesaProtocol {
public:
    enum class Stage { base, flip, quarter };
    struct Pending {
        NodeId node;
        double angle;  // the node was rotated by -angle; sign not yet verified
    };

    DqesaProtocol(std::vector<NodeId> order, SignMode mode);

    Stage stage() const { return stage_; }
    int round() const { return round_; }
    bool empty() const { return order_.empty(); }
    NodeId current() const { return order_.at(cursor_); }
    const std::optional<Pending>& pending() const { return pending_; }
    bool check_slot() const { return stage_ == Stage::base && pending_.has_value(); }
    const std::vector<NodeId>& order() const { return order_; }
    SignMode sign_mode() const { return mode_; }

    void advance(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events);

private:
    void next_node();

    std::vector<NodeId> order_;
    SignMode mode_;
    std::size_t cursor_ = 0;
    int round_ = 1;
    Stage stage_ = Stage::base;
    std::optional<Pending> pending_;
};

class DqesaReceiver {
public:
    DqesaReceiver(std::vector<NodeId> order, const DqesaParams& params, double tx_power);

    StepOutput observe(const Measurement& m);
    void on_topology(std::span<const TopologyEvent> events);
    std::optional<double> recorded_best() const { return recorded_; }
    const DqesaProtocol& protocol() const { return protocol_; }
    /// Current |t| estimate the receiver would use for `node`.
    std::optional<double> gain_estimate(NodeId node) const;

private:
    struct GainPair {
        double t;      // root believed to be |t|
        double other;  // companion root from the same solve
    };

    std::optional<GainPair> gain_for(NodeId node) const;
    void refresh_gain(NodeId node, double lo, double hi);

    StepOutput observe_base(double rss);
    StepOutput observe_flip(double rss);
    StepOutput observe_quarter(double rss);

    DqesaProtocol protocol_;
    DqesaParams params_;
    AngleCoder coder_;
    double tx_power_;
    std::unordered_map<NodeId, GainPair> gains_;
    std::optional<GainPair> shared_;
    bool shared_confirmed_ = false;  // a later solve has re-found the shared root

    double m_base_ = 0.0;
    double m_kept_ = 0.0;
    double m_other_ = 0.0;
    // Measurements of the node whose sign is still unverified. `kept` may be
    // a prediction; `flipped` (the pi-rotated slot) is always measured.
    struct Check {
        double kept;
        double other;
        double flipped;
        bool flipped_kept;
    };
    std::optional<Check> check_;
    double predict_mirrored(const Check& check, const OffsetSolve& os,
                            const std::optional<GainPair>& cached, double mirrored) const;
    std::optional<double> recorded_;
};

class DqesaTransmitters {
public:
    DqesaTransmitters(std::vector<NodeId> order, PhaseVector initial, SignMode mode);

    const PhaseVector& request() const { return request_; }
    const PhaseVector& committed() const { return committed_; }
    void apply(const FeedbackMessage& fb);
    void on_topology(std::span<const TopologyEvent> events, const std::vector<NodeId>& ids_after,
                     const PhaseVector& committed_after);
    const DqesaProtocol& protocol() const { return protocol_; }

private:
    std::size_t slot_of(NodeId node) const;
    void rotate(NodeId node, double by);
    void rebuild_request();

    DqesaProtocol protocol_;
    PhaseVector committed_;
    PhaseVector request_;
};

using DqesaBeamformer = SplitBeamformer<DqesaReceiver, DqesaTransmitters>;

}  // namespace beamsim
