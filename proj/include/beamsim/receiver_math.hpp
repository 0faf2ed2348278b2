#pragma once

// Closed-form receiver computations for the quadratic-equation search.
//
// Split the received phasor into r (every other node) and t (the node being
// adjusted), with beta = arg(t) - arg(r). Rotating the node by an offset d
// gives the measurement
//
//     M(d)^2 = P (|r|^2 + |t|^2 + 2 |r| |t| cos(beta + d)).
//
// Measurements at d = 0, pi and pi/2 determine beta and the unordered pair
// {|r|, |t|}; the rotation that aligns the node with r is -beta.

#include <optional>

namespace beamsim {

struct ThreeSolve {
    double beta = 0.0;   // in [-pi/2, pi/2] when m1 >= m2
    double t_mag = 0.0;  // min(|r|, |t|); the equations are symmetric in r and t
    double r_mag = 0.0;  // the companion root
    bool degenerate = false;
};

/// m1 at the kept phase, m2 at kept + pi, m3 at kept + pi/2.
ThreeSolve solve_three(double m1, double m2, double m3, double tx_power);

struct TwoSolve {
    double beta_magnitude = 0.0;  // |beta| in [0, pi]; the sign is not observable
    bool degenerate = false;
    bool clamped = false;  // radicand or arccos argument pushed out of domain
    double cos_argument = 0.0;  // arccos argument before clamping
};

/// |beta| from m1 (kept phase) and m2 (kept + pi) given a known |t|.
TwoSolve solve_two(double m1, double m2, double t_mag, double tx_power);

double solve_two_beta(double m1, double m2, double t_mag, double tx_power);

struct OffsetSolve {
    double beta = 0.0;    // angle at the kept phase, in (-pi, pi]
    double sum_sq = 0.0;  // |r|^2 + |t|^2
    double product2 = 0.0;  // 2 |r| |t|
    double lo = 0.0;      // min(|r|, |t|)
    double hi = 0.0;      // max(|r|, |t|)
    bool degenerate = false;
};

/// General three-point solve: m_kept at offset 0, m_other at pi, m_probe at `offset`.
OffsetSolve solve_with_offset(double m_kept, double m_other, double m_probe, double offset,
                              double tx_power);

/// RSS predicted when the node sits at angle `beta_after` from r, given the
/// pair sums from an earlier solve.
double predicted_rss(double sum_sq, double product2, double beta_after, double tx_power);

}  // namespace beamsim
