#pragma once

#include <optional>
#include <string>

namespace beamsim {

/// Width of the receiver-to-transmitter angle feedback: K bits, or exact.
struct FeedbackResolution {
    std::optional<int> bits;  // nullopt = exact angle

    bool exact() const { return !bits.has_value(); }
    std::string label() const;  // "exact" or "<K>bit"
    static FeedbackResolution exact_angle() { return {}; }
    static FeedbackResolution quantized(int k) { return {k}; }
};

enum class AngleKind { none, quantized, exact };

/// What the receiver broadcasts after one slot. A slot may carry the one-bit
/// comparison flag, an angle, both, or nothing.
struct FeedbackMessage {
    std::optional<bool> bit;
    AngleKind angle_kind = AngleKind::none;
    double angle = 0.0;
    int angle_bits = 0;  // K for quantized angles
    bool quarter_probe = false;  // adjusted node transmits at +pi/2 next slot

    bool empty() const {
        return !bit.has_value() && angle_kind == AngleKind::none && !quarter_probe;
    }
    bool has_angle() const { return angle_kind != AngleKind::none; }

    static FeedbackMessage none() { return {}; }
    static FeedbackMessage one_bit(bool b) {
        FeedbackMessage m;
        m.bit = b;
        return m;
    }

    bool operator==(const FeedbackMessage&) const = default;
};

struct Quantized {
    std::optional<double> value;  // nullopt inside the dead zone
    bool clamped = false;         // input was outside [-pi/2, pi/2]
};

/// Uniform K-bit midpoint quantizer on [-pi/2, pi/2]. 2^K equal cells; values
/// with |beta| below dead_zone_factor * (cell width / 2) produce no feedback.
Quantized quantize_beta(double beta, int bits, double dead_zone_factor = 0.25);

double dead_zone_width(int bits, double dead_zone_factor);

/// Encodes an angle for the configured resolution. Exact feedback still
/// suppresses angles below `exact_dead_zone`.
class AngleCoder {
public:
    AngleCoder(FeedbackResolution resolution, double dead_zone_factor, double exact_dead_zone);

    /// Message carrying `beta`, or an empty message inside the dead zone.
    FeedbackMessage encode(double beta) const;
    double dead_zone() const;
    const FeedbackResolution& resolution() const { return resolution_; }

private:
    FeedbackResolution resolution_;
    double dead_zone_factor_;
    double exact_dead_zone_;
};

}  // namespace beamsim
