#include "beamsim/receiver_math.hpp"

#include <algorithm>
#include <cmath>

#include "beamsim/core_model.hpp"

namespace beamsim {

namespace {

constexpr double kDegenerate = 1e-12;

// Roots {lo, hi} of z^2 - sum z + prod^2 = 0 in the squared magnitudes,
// i.e. the pair with lo^2 + hi^2 = sum and lo * hi = prod.
void split_pair(double sum, double prod, double& lo, double& hi) {
    sum = std::max(sum, 0.0);
    const double disc = std::sqrt(std::max(sum * sum - 4.0 * prod * prod, 0.0));
    const double big = 0.5 * (sum + disc);
    hi = std::sqrt(big);
    // sum - disc loses everything when prod << sum; use the product form.
    lo = big > 0.0 ? std::sqrt(prod * prod / big) : 0.0;
}

}  // namespace

ThreeSolve solve_three(double m1, double m2, double m3, double tx_power) {
    if (!(m1 >= 0.0 && m2 >= 0.0 && m3 >= 0.0) || !(tx_power > 0.0)) {
        throw ContractViolation("solve_three: measurements must be >= 0 and power > 0");
    }
    const double x = 0.5 * (m1 * m1 + m2 * m2);
    const double cos_part = x - m2 * m2;  //  2P|r||t| cos(beta)
    const double sin_part = x - m3 * m3;  //  2P|r||t| sin(beta)
    ThreeSolve out;
    const double scale = std::max(1.0, x);
    if (std::abs(cos_part) < kDegenerate * scale && std::abs(sin_part) < kDegenerate * scale) {
        out.beta = 0.0;
        out.t_mag = std::sqrt(std::max(x, 0.0) / (2.0 * tx_power));
        out.r_mag = out.t_mag;
        out.degenerate = true;
        return out;
    }
    out.beta = std::atan2(sin_part, cos_part);
    // (m2^2 - x)^2 / cos^2(beta) == cos_part^2 + sin_part^2 because cos(beta)
    // comes from the same atan2; this form stays finite at beta = +-pi/2.
    const double prod = std::hypot(cos_part, sin_part) / (2.0 * tx_power);  // |r||t|
    split_pair(x / tx_power, prod, out.t_mag, out.r_mag);
    return out;
}

TwoSolve solve_two(double m1, double m2, double t_mag, double tx_power) {
    if (!(m1 >= 0.0 && m2 >= 0.0) || !(tx_power > 0.0) || !(t_mag >= 0.0)) {
        throw ContractViolation("solve_two: measurements and |t| must be >= 0, power > 0");
    }
    TwoSolve out;
    const double m1s = m1 * m1;
    const double m2s = m2 * m2;
    double radicand = 2.0 * (m1s + m2s) * tx_power - 4.0 * t_mag * t_mag * tx_power * tx_power;
    if (radicand < 0.0) {
        radicand = 0.0;
        out.clamped = true;
    }
    const double denom = 2.0 * t_mag * std::sqrt(radicand);
    if (denom < kDegenerate) {
        out.degenerate = true;
        return out;
    }
    out.cos_argument = (m1s - m2s) / denom;
    if (out.cos_argument > 1.0 || out.cos_argument < -1.0) {
        out.clamped = true;
    }
    out.beta_magnitude = std::acos(std::clamp(out.cos_argument, -1.0, 1.0));
    return out;
}

double solve_two_beta(double m1, double m2, double t_mag, double tx_power) {
    return solve_two(m1, m2, t_mag, tx_power).beta_magnitude;
}

OffsetSolve solve_with_offset(double m_kept, double m_other, double m_probe, double offset,
                              double tx_power) {
    OffsetSolve out;
    const double x = 0.5 * (m_kept * m_kept + m_other * m_other);
    const double cos_part = 0.5 * (m_kept * m_kept - m_other * m_other);
    const double s = std::sin(offset);
    out.sum_sq = x / tx_power;
    if (std::abs(s) < 1e-9) {
        out.degenerate = true;
        out.product2 = std::abs(cos_part) / tx_power;
        split_pair(out.sum_sq, 0.5 * out.product2, out.lo, out.hi);
        return out;
    }
    const double sin_part = (x + cos_part * std::cos(offset) - m_probe * m_probe) / s;
    out.beta = std::atan2(sin_part, cos_part);
    out.product2 = std::hypot(cos_part, sin_part) / tx_power;
    split_pair(out.sum_sq, 0.5 * out.product2, out.lo, out.hi);
    return out;
}

double predicted_rss(double sum_sq, double product2, double beta_after, double tx_power) {
    return std::sqrt(tx_power * std::max(sum_sq + product2 * std::cos(beta_after), 0.0));
}

}  // namespace beamsim
