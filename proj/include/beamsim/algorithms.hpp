#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "beamsim/dbsa.hpp"
#include "beamsim/dqesa.hpp"
#include "beamsim/hybrid.hpp"
#include "beamsim/random_search.hpp"

namespace beamsim {

enum class AlgorithmKind { dbsa, dqesa, dqesa_e, hybrid, one_bit_random, biorarsa2 };

std::string_view to_string(AlgorithmKind kind);
std::optional<AlgorithmKind> algorithm_from_string(std::string_view name);
std::string_view to_string(SignMode mode);
std::optional<SignMode> sign_mode_from_string(std::string_view name);

/// Everything an algorithm can be tuned with. `dqesa` also configures the
/// first phase of the hybrid; `feedback` overrides dqesa.feedback.
struct AlgorithmParams {
    AlgorithmKind kind = AlgorithmKind::dqesa;
    FeedbackResolution feedback;
    DbsaParams dbsa;
    DqesaParams dqesa;
    BiorarsaParams biorarsa;
    OneBitParams one_bit;
};

/// Builds a fresh algorithm for `channel` starting from `initial` phases.
/// `tx_seed` seeds the transmitters' own perturbation stream.
std::unique_ptr<Beamformer> make_beamformer(const AlgorithmParams& params,
                                            const ChannelState& channel,
                                            const PhaseVector& initial, std::uint64_t tx_seed);

}  // namespace beamsim
