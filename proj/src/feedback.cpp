#include "beamsim/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "beamsim/core_model.hpp"

namespace beamsim {

std::string FeedbackResolution::label() const {
    return bits ? std::to_string(*bits) + "bit" : std::string("exact");
}

double dead_zone_width(int bits, double dead_zone_factor) {
    const double cell = kPi / std::ldexp(1.0, bits);
    return dead_zone_factor * 0.5 * cell;
}

Quantized quantize_beta(double beta, int bits, double dead_zone_factor) {
    if (bits < 1 || bits > 30) {
        throw ContractViolation("quantize_beta: bits must be in [1, 30]");
    }
    if (!std::isfinite(beta)) {
        throw ContractViolation("quantize_beta: non-finite angle");
    }
    Quantized out;
    constexpr double half_range = kPi / 2.0;
    if (beta < -half_range || beta > half_range) {
        out.clamped = true;
        beta = std::clamp(beta, -half_range, half_range);
    }
    if (std::abs(beta) < dead_zone_width(bits, dead_zone_factor)) {
        return out;
    }
    const double cells = std::ldexp(1.0, bits);
    const double width = kPi / cells;
    // Cell index in [0, 2^K); the upper endpoint belongs to the last cell.
    const double index = std::min(std::floor((beta + half_range) / width), cells - 1.0);
    out.value = -half_range + (index + 0.5) * width;
    return out;
}

AngleCoder::AngleCoder(FeedbackResolution resolution, double dead_zone_factor, double exact_dead_zone)
    : resolution_(resolution), dead_zone_factor_(dead_zone_factor), exact_dead_zone_(exact_dead_zone) {
    if (resolution_.bits && (*resolution_.bits < 1 || *resolution_.bits > 30)) {
        throw ContractViolation("feedback bits must be in [1, 30]");
    }
}

double AngleCoder::dead_zone() const {
    return resolution_.bits ? dead_zone_width(*resolution_.bits, dead_zone_factor_) : exact_dead_zone_;
}

FeedbackMessage AngleCoder::encode(double beta) const {
    FeedbackMessage msg;
    if (resolution_.exact()) {
        if (std::abs(beta) < exact_dead_zone_) {
            return msg;
        }
        msg.angle_kind = AngleKind::exact;
        msg.angle = beta;
        return msg;
    }
    const Quantized q = quantize_beta(beta, *resolution_.bits, dead_zone_factor_);
    if (!q.value) {
        return msg;
    }
    msg.angle_kind = AngleKind::quantized;
    msg.angle = *q.value;
    msg.angle_bits = *resolution_.bits;
    return msg;
}

}  // namespace beamsim
