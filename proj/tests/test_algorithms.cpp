#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "doctest.h"

#include "beamsim/algorithms.hpp"
#include "beamsim/channel_dynamics.hpp"
#include "beamsim/harness.hpp"
#include "beamsim/oracle.hpp"

using namespace beamsim;

namespace {

ChannelState channel_of(std::vector<double> gains, std::vector<double> phases) {
    ChannelState c;
    c.gains = std::move(gains);
    c.phases = std::move(phases);
    for (std::size_t i = 0; i < c.gains.size(); ++i) c.node_ids.push_back(i);
    c.next_node_id = c.gains.size();
    return c;
}

ChannelState rayleigh(int n, Rng& rng) {
    ScenarioSpec s;
    s.n_nodes_initial = n;
    return sample_channel(s, rng);
}

PhaseVector random_phases(Rng& rng, std::size_t n) {
    PhaseVector p;
    for (std::size_t i = 0; i < n; ++i) p.psi.push_back(uniform_phase(rng));
    return p;
}

AlgorithmParams params_for(AlgorithmKind kind) {
    AlgorithmParams p;
    p.kind = kind;
    return p;
}

struct Slot {
    PhaseVector sent;
    double rss = 0.0;
    StepOutput out;
    PhaseVector committed;
    std::optional<double> recorded;
    // membership change applied before this slot
    std::vector<TopologyEvent> events;
    std::vector<NodeId> ids_after;
    PhaseVector committed_after;
};

// Noiseless slot loop with optional churn, independent of the harness.
std::vector<Slot> drive(Beamformer& bf, ChannelState& channel, int slots,
                        const ScenarioSpec* churn = nullptr, Rng* rng = nullptr) {
    std::vector<Slot> trace;
    for (int k = 1; k <= slots; ++k) {
        Slot s;
        if (churn) {
            ChurnResult r = apply_churn(channel, bf.committed(), *churn, *rng, k);
            channel = std::move(r.channel);
            if (!r.events.empty()) {
                bf.on_topology(r.events, channel.node_ids, r.phases);
                s.events = r.events;
                s.ids_after = channel.node_ids;
                s.committed_after = r.phases;
            }
        }
        s.sent = bf.request();
        s.rss = evaluate_rss(channel, s.sent);
        s.out = bf.step({s.rss, k});
        s.committed = bf.committed();
        s.recorded = bf.recorded_best();
        trace.push_back(std::move(s));
    }
    return trace;
}

template <class Tx>
void replay(Tx tx, const std::vector<Slot>& trace) {
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Slot& s = trace[k];
        if (!s.events.empty()) {
            tx.on_topology(s.events, s.ids_after, s.committed_after);
        }
        INFO("slot ", k + 1);
        REQUIRE(tx.request() == s.sent);
        tx.apply(s.out.feedback);
        REQUIRE(tx.committed() == s.committed);
    }
}

ExperimentConfig static_config(AlgorithmKind kind, int n, int trials, std::int64_t budget) {
    ExperimentConfig c;
    c.algorithm.kind = kind;
    c.scenario.n_nodes_initial = n;
    c.n_trials = trials;
    c.slot_budget = budget;
    c.master_seed = 99;
    return c;
}

double mean_at(const ExperimentConfig& c, std::int64_t slot) {
    RunOptions o;
    o.write_files = false;
    const ExperimentResult r = run_experiment(c, o);
    return r.summary.rows.at(static_cast<std::size_t>(slot - 1)).mean;
}

}  // namespace

// ------------------------------------------------------------------ DBSA

TEST_CASE("dbsa: single node reaches the optimum within three halvings") {
    for (double psi0 : {-2.5, 0.0, 1.0, 3.0}) {
        ChannelState c = channel_of({1.0}, {0.3});
        AlgorithmParams p = params_for(AlgorithmKind::dbsa);
        auto bf = make_beamformer(p, c, {{psi0}}, 0);
        // init + sweep of 3 + three single-node passes of at most 2 slots
        const auto trace = drive(*bf, c, 1 + 3 + 3 * 2);
        REQUIRE(trace.back().recorded.has_value());
        CHECK(*trace.back().recorded >= 0.999 * rss_max(c));
    }
}

TEST_CASE("dbsa: forward success skips reverse; double failure leaves the phase") {
    Rng rng(3);
    ChannelState c = rayleigh(6, rng);
    auto bf = make_beamformer(params_for(AlgorithmKind::dbsa), c, random_phases(rng, 6), 0);
    const auto trace = drive(*bf, c, 600);
    int forward_wins = 0, double_failures = 0;
    for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
        const Slot& s = trace[k];
        if (s.out.stage == "forward" && s.out.feedback.bit.value_or(false)) {
            REQUIRE(trace[k + 1].out.stage != "reverse");
            ++forward_wins;
        }
        if (s.out.stage == "reverse" && !s.out.feedback.bit.value_or(false)) {
            REQUIRE(trace[k - 1].out.stage == "forward");
            REQUIRE(s.committed == trace[k - 2].committed);
            ++double_failures;
        }
    }
    CHECK(forward_wins > 0);
    CHECK(double_failures > 0);
}

// ----------------------------------------------------------------- D-QESA

TEST_CASE("dqesa: two equal nodes align after the second node's first update") {
    ChannelState c = channel_of({1.0, 1.0}, {0.0, 0.0});
    AlgorithmParams p = params_for(AlgorithmKind::dqesa);
    p.dqesa.sign_mode = SignMode::probe;
    auto bf = make_beamformer(p, c, {{0.0, kPi / 2}}, 0);
    const auto trace = drive(*bf, c, 6);
    REQUIRE(trace[5].out.stage == "quarter");
    REQUIRE(trace[5].out.finalized_node == NodeId{1});
    CHECK(std::abs(evaluate_rss(c, trace[5].committed) - 2.0) <= 1e-9);
}

TEST_CASE("property: after each node update the node is aligned with the rest") {
    Rng rng(8);
    int updates = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 9;
        ChannelState c = rayleigh(n, rng);
        c.tx_power = 0.5 + trial % 3;
        AlgorithmParams p = params_for(AlgorithmKind::dqesa);
        p.dqesa.sign_mode = SignMode::probe;
        auto bf = make_beamformer(p, c, random_phases(rng, n), 0);
        const auto trace = drive(*bf, c, 12 * n);
        for (const Slot& s : trace) {
            if (!s.out.finalized_node) continue;
            const std::size_t i = c.index_of(*s.out.finalized_node);
            std::complex<double> r{}, t{};
            for (std::size_t j = 0; j < c.size(); ++j) {
                (j == i ? t : r) += std::polar(c.gains[j], c.phases[j] + s.committed.psi[j]);
            }
            const double aligned = std::sqrt(c.tx_power) * (std::abs(r) + std::abs(t));
            const double got = evaluate_rss(c, s.committed);
            REQUIRE(std::abs(got - aligned) <= 1e-9);
            const auto best = oracle::best_single_phase(c, s.committed, *s.out.finalized_node);
            REQUIRE(std::abs(got - best.rss) <= 1e-8);
            ++updates;
        }
    }
    CHECK(updates > 500);
}

TEST_CASE("dqesa: exact feedback on 100 Rayleigh nodes is converged by slot 300") {
    CHECK(mean_at(static_config(AlgorithmKind::dqesa, 100, 10, 300), 300) >= 0.99);
}

namespace {

// Slots spent per node visit, in visit order. A visit starts at every
// base or check slot.
std::vector<int> visit_lengths(const std::vector<Slot>& trace) {
    std::vector<int> out;
    for (const Slot& s : trace) {
        if (s.out.stage == "base" || s.out.stage == "check") {
            out.push_back(0);
        }
        REQUIRE(!out.empty());
        ++out.back();
    }
    return out;
}

}  // namespace

TEST_CASE("dqesa: slot accounting") {
    Rng rng(21);
    for (int n : {2, 5, 17}) {
        ChannelState c = rayleigh(n, rng);
        const PhaseVector start = random_phases(rng, n);

        SUBCASE("optimistic: 3 per node in round one, 2 after") {
            AlgorithmParams p = params_for(AlgorithmKind::dqesa);
            p.dqesa.sign_mode = SignMode::optimistic;
            auto bf = make_beamformer(p, c, start, 0);
            const auto v = visit_lengths(drive(*bf, c, 3 * n + 2 * n * 6));
            for (std::size_t k = 0; k + 1 < v.size(); ++k) {
                REQUIRE(v[k] == (k < static_cast<std::size_t>(n) ? 3 : 2));
            }
        }
        SUBCASE("probe: a third slot only when the sign is corrected") {
            AlgorithmParams p = params_for(AlgorithmKind::dqesa);
            p.dqesa.sign_mode = SignMode::probe;
            auto bf = make_beamformer(p, c, start, 0);
            const auto trace = drive(*bf, c, 3 * n + 2 * n * 6);
            int fixes = 0;
            for (const Slot& s : trace) fixes += s.out.stage == "fix";
            const auto v = visit_lengths(trace);
            int extra = 0;
            for (std::size_t k = static_cast<std::size_t>(n); k + 1 < v.size(); ++k) {
                REQUIRE((v[k] == 2 || v[k] == 3));
                extra += v[k] - 2;
            }
            CHECK(extra <= fixes);
        }
    }
}

TEST_CASE("dqesa-e: shared gain and a 3 + 2(N-1) first round") {
    Rng rng(5);
    const int n = 100;
    ScenarioSpec s;
    s.rayleigh = false;
    s.n_nodes_initial = n;
    ChannelState c = sample_channel(s, rng);
    for (SignMode mode : {SignMode::deferred, SignMode::optimistic}) {
        AlgorithmParams p = params_for(AlgorithmKind::dqesa_e);
        p.dqesa.sign_mode = mode;
        auto bf = make_beamformer(p, c, random_phases(rng, n), 0);
        const auto trace = drive(*bf, c, 400);
        const auto v = visit_lengths(trace);
        CHECK(v[0] == 3);
        int first_round = 0;
        for (int k = 0; k < n; ++k) first_round += v[static_cast<std::size_t>(k)];
        CHECK(first_round == 3 + 2 * (n - 1));

        const auto& rx = dynamic_cast<const DqesaBeamformer&>(*bf).receiver();
        REQUIRE(rx.gain_estimate(c.node_ids[0]).has_value());
        CHECK(std::abs(*rx.gain_estimate(c.node_ids[0]) - 1.0) <= 1e-9);
    }
}

TEST_CASE("dqesa: a node joining mid-run is measured with the quarter probe") {
    Rng rng(13);
    ChannelState c = rayleigh(4, rng);
    auto bf = make_beamformer(params_for(AlgorithmKind::dqesa), c, random_phases(rng, 4), 0);
    drive(*bf, c, 12 + 5);  // round one plus part of round two

    ScenarioSpec add;
    add.kind = ScenarioKind::churn;
    add.p_add = 1.0;
    ChurnResult r = apply_churn(c, bf->committed(), add, rng, 18);
    c = std::move(r.channel);
    bf->on_topology(r.events, c.node_ids, r.phases);
    const NodeId newcomer = r.events.at(0).node_id;

    const auto& rx = dynamic_cast<const DqesaBeamformer&>(*bf).receiver();
    CHECK_FALSE(rx.gain_estimate(newcomer).has_value());
    const auto trace = drive(*bf, c, 30);
    bool quarter_for_newcomer = false;
    for (const Slot& s : trace) {
        if (s.out.stage == "quarter" && s.out.finalized_node == newcomer) quarter_for_newcomer = true;
    }
    CHECK(quarter_for_newcomer);
    CHECK(rx.gain_estimate(newcomer).has_value());
}

// ------------------------------------------------------ random searches

TEST_CASE("one-bit random: keep iff the measurement beats the recorded best") {
    Rng rng(2);
    ChannelState c = rayleigh(20, rng);
    auto bf = make_beamformer(params_for(AlgorithmKind::one_bit_random), c, random_phases(rng, 20), 7);
    const auto trace = drive(*bf, c, 2000);
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const Slot& s = trace[k];
        const bool better = s.rss > *trace[k - 1].recorded;
        REQUIRE(s.out.feedback.bit == better);
        REQUIRE(s.committed == (better ? s.sent : trace[k - 1].committed));
    }
}

TEST_CASE("one-bit random after 5000 slots is still short of D-QESA after 300") {
    const double random_late = mean_at(static_config(AlgorithmKind::one_bit_random, 100, 10, 5000), 5000);
    const double dqesa_early = mean_at(static_config(AlgorithmKind::dqesa, 100, 10, 300), 300);
    CHECK(random_late < dqesa_early);
}

TEST_CASE("biorarsa2: swims while improving") {
    Rng rng(6);
    ChannelState c = rayleigh(10, rng);
    auto bf = make_beamformer(params_for(AlgorithmKind::biorarsa2), c, random_phases(rng, 10), 3);
    const auto trace = drive(*bf, c, 3000);
    int swims = 0;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        const Slot& s = trace[k];
        const bool accepted = s.out.feedback.bit.value_or(false);
        if ((s.out.stage == "probe" || s.out.stage == "reverse") && accepted) {
            REQUIRE(trace[k + 1].out.stage == "swim");
        }
        if (s.out.stage == "swim") {
            ++swims;
            REQUIRE(s.out.feedback.bit == (s.rss >= *trace[k - 1].recorded));
        }
    }
    CHECK(swims > 0);
}

TEST_CASE("biorarsa2: too many failures reset the step size") {
    BiorarsaParams p;
    p.trials_per_block = 2;
    p.failure_limit = 3;
    p.delta0 = 0.4;
    p.delta_reset = 1.1;
    BiorarsaProtocol proto(p);
    const FeedbackMessage no = FeedbackMessage::one_bit(false);
    proto.advance(FeedbackMessage::none());  // init
    // every trial fails twice (probe and reverse)
    int guard = 0;
    while (proto.stage() != BiorarsaProtocol::Stage::reset && guard++ < 100) {
        proto.advance(no);
    }
    REQUIRE(proto.stage() == BiorarsaProtocol::Stage::reset);
    CHECK(proto.failures() > p.failure_limit);
    CHECK(proto.step_size() == p.delta_reset);
    proto.advance(FeedbackMessage::none());
    CHECK(proto.stage() == BiorarsaProtocol::Stage::probe);
    CHECK(proto.failures() == 0);
}

TEST_CASE("biorarsa2: block update scales the step by the mean swim length") {
    BiorarsaParams p;
    p.trials_per_block = 2;
    p.delta0 = 0.4;
    p.rho = 0.5;
    BiorarsaProtocol proto(p);
    const FeedbackMessage yes = FeedbackMessage::one_bit(true), no = FeedbackMessage::one_bit(false);
    proto.advance(FeedbackMessage::none());
    proto.advance(no);
    proto.advance(no);  // trial 1 fails: omega 0
    CHECK(proto.step_size() == 0.4);
    proto.advance(yes);  // trial 2 accepted
    proto.advance(yes);  // omega 3
    proto.advance(no);   // swim ends
    // mean omega = 1.5 -> step grows by 1.5
    CHECK(proto.step_size() == doctest::Approx(0.6).epsilon(1e-15));
}

// ------------------------------------------------------------------ hybrid

TEST_CASE("hybrid: one quadratic round, then a single switch") {
    const int n = 30;
    ExperimentConfig hybrid = static_config(AlgorithmKind::hybrid, n, 1, 400);
    ExperimentConfig plain = static_config(AlgorithmKind::dqesa, n, 1, 400);
    const auto h = run_trial(hybrid, 0);
    const auto d = run_trial(plain, 0);
    for (int k = 0; k < 3 * n; ++k) {
        REQUIRE(h[k].rss == d[k].rss);
        REQUIRE(h[k].stage == d[k].stage);
    }
    CHECK(h[3 * n].stage == "switch");
    int switches = 0;
    for (const auto& rec : h) switches += rec.stage == "switch";
    CHECK(switches == 1);
}

// ---------------------------------------------------------------- shared

TEST_CASE("property: recorded best never decreases on a static noiseless channel") {
    Rng rng(77);
    for (AlgorithmKind kind : {AlgorithmKind::dbsa, AlgorithmKind::dqesa, AlgorithmKind::dqesa_e,
                               AlgorithmKind::hybrid, AlgorithmKind::one_bit_random,
                               AlgorithmKind::biorarsa2}) {
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 2 + 7 * trial;
            ScenarioSpec spec;
            spec.n_nodes_initial = n;
            spec.rayleigh = kind != AlgorithmKind::dqesa_e;  // the shared-gain variant assumes equal gains
            ChannelState c = sample_channel(spec, rng);
            AlgorithmParams p = params_for(kind);
            p.dqesa.sign_mode = SignMode::probe;  // every sign verified before the next node
            auto bf = make_beamformer(p, c, random_phases(rng, n), trial);
            const auto trace = drive(*bf, c, 3000);
            std::optional<double> prev;
            for (const Slot& s : trace) {
                if (!s.recorded) continue;
                INFO(to_string(kind), " n=", n);
                if (prev) REQUIRE(*s.recorded >= *prev);
                prev = s.recorded;
            }
        }
    }
}

TEST_CASE("property: transmitters are driven by feedback alone") {
    Rng rng(404);
    ScenarioSpec churn;
    churn.kind = ScenarioKind::churn;
    churn.p_add = 0.02;
    churn.p_remove = 0.02;
    for (bool with_churn : {false, true}) {
        for (AlgorithmKind kind : {AlgorithmKind::dbsa, AlgorithmKind::dqesa, AlgorithmKind::dqesa_e,
                                   AlgorithmKind::hybrid, AlgorithmKind::one_bit_random,
                                   AlgorithmKind::biorarsa2}) {
            CAPTURE(with_churn);
            INFO(to_string(kind));
            ChannelState c = rayleigh(12, rng);
            const ChannelState c0 = c;
            const PhaseVector start = random_phases(rng, 12);
            AlgorithmParams p = params_for(kind);
            p.feedback = FeedbackResolution::quantized(3);
            const std::uint64_t seed = 1234;
            auto bf = make_beamformer(p, c, start, seed);
            Rng churn_rng(9);
            const auto trace = drive(*bf, c, 1500, with_churn ? &churn : nullptr, &churn_rng);

            DqesaParams dq = p.dqesa;
            dq.feedback = p.feedback;
            const std::vector<NodeId>& ids = c0.node_ids;
            switch (kind) {
            case AlgorithmKind::dbsa:
                replay(DbsaTransmitters(ids, start, p.dbsa), trace);
                break;
            case AlgorithmKind::dqesa:
            case AlgorithmKind::dqesa_e:
                replay(DqesaTransmitters(ids, start, dq.sign_mode), trace);
                break;
            case AlgorithmKind::hybrid:
                replay(HybridTransmitters(ids, start, HybridParams{dq, p.biorarsa}, Rng(seed)), trace);
                break;
            case AlgorithmKind::one_bit_random:
                replay(OneBitTransmitters(ids, start, p.one_bit, Rng(seed)), trace);
                break;
            case AlgorithmKind::biorarsa2:
                replay(BiorarsaTransmitters(ids, start, p.biorarsa, Rng(seed)), trace);
                break;
            }
        }
    }
}

TEST_CASE("names round-trip") {
    for (AlgorithmKind k : {AlgorithmKind::dbsa, AlgorithmKind::dqesa, AlgorithmKind::dqesa_e,
                            AlgorithmKind::hybrid, AlgorithmKind::one_bit_random,
                            AlgorithmKind::biorarsa2}) {
        CHECK(algorithm_from_string(to_string(k)) == k);
    }
    for (SignMode m : {SignMode::probe, SignMode::optimistic, SignMode::deferred}) {
        CHECK(sign_mode_from_string(to_string(m)) == m);
    }
    CHECK_FALSE(algorithm_from_string("bogus").has_value());
}
