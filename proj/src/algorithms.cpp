#include "beamsim/algorithms.hpp"

#include <array>
#include <utility>

namespace beamsim {

namespace {

constexpr std::array<std::pair<AlgorithmKind, std::string_view>, 6> kAlgorithmNames{{
    {AlgorithmKind::dbsa, "dbsa"},
    {AlgorithmKind::dqesa, "dqesa"},
    {AlgorithmKind::dqesa_e, "dqesa_e"},
    {AlgorithmKind::hybrid, "hybrid"},
    {AlgorithmKind::one_bit_random, "one_bit_random"},
    {AlgorithmKind::biorarsa2, "biorarsa2"},
}};

constexpr std::array<std::pair<SignMode, std::string_view>, 3> kSignModeNames{{
    {SignMode::probe, "probe"},
    {SignMode::optimistic, "optimistic"},
    {SignMode::deferred, "deferred"},
}};

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
    for (const auto& [k, name] : kAlgorithmNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

std::optional<AlgorithmKind> algorithm_from_string(std::string_view name) {
    for (const auto& [k, n] : kAlgorithmNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::string_view to_string(SignMode mode) {
    for (const auto& [m, name] : kSignModeNames) {
        if (m == mode) {
            return name;
        }
    }
    return "unknown";
}

std::optional<SignMode> sign_mode_from_string(std::string_view name) {
    for (const auto& [m, n] : kSignModeNames) {
        if (n == name) {
            return m;
        }
    }
    return std::nullopt;
}

std::unique_ptr<Beamformer> make_beamformer(const AlgorithmParams& params,
                                            const ChannelState& channel,
                                            const PhaseVector& initial, std::uint64_t tx_seed) {
    if (initial.size() != channel.size()) {
        throw ContractViolation("initial phases do not match the channel");
    }
    const std::vector<NodeId>& ids = channel.node_ids;
    DqesaParams dq = params.dqesa;
    dq.feedback = params.feedback;

    switch (params.kind) {
    case AlgorithmKind::dbsa:
        return std::make_unique<DbsaBeamformer>(
            "dbsa", DbsaReceiver(ids, params.dbsa), DbsaTransmitters(ids, initial, params.dbsa));
    case AlgorithmKind::dqesa:
    case AlgorithmKind::dqesa_e: {
        dq.shared_gain = params.kind == AlgorithmKind::dqesa_e;
        return std::make_unique<DqesaBeamformer>(
            to_string(params.kind), DqesaReceiver(ids, dq, channel.tx_power),
            DqesaTransmitters(ids, initial, dq.sign_mode));
    }
    case AlgorithmKind::hybrid: {
        dq.shared_gain = false;
        const HybridParams hp{dq, params.biorarsa};
        return std::make_unique<HybridBeamformer>(
            "hybrid", HybridReceiver(ids, hp, channel.tx_power),
            HybridTransmitters(ids, initial, hp, Rng(tx_seed)));
    }
    case AlgorithmKind::one_bit_random:
        return std::make_unique<OneBitBeamformer>(
            "one_bit_random", OneBitReceiver(ids.size()),
            OneBitTransmitters(ids, initial, params.one_bit, Rng(tx_seed)));
    case AlgorithmKind::biorarsa2:
        return std::make_unique<BiorarsaBeamformer>(
            "biorarsa2", BiorarsaReceiver(ids.size(), params.biorarsa),
            BiorarsaTransmitters(ids, initial, params.biorarsa, Rng(tx_seed)));
    }
    throw ContractViolation("unknown algorithm");
}

}  // namespace beamsim
