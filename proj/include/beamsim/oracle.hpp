#pragma once

// Brute-force reference answers for checking the closed-form receiver math
// and convergence claims on small instances. Grid search plus iterated
// step-halving; no formula is shared with the code under test.

#include "beamsim/core_model.hpp"

namespace beamsim::oracle {

struct GridSpec {
    int resolution = 200;         // points per dimension, >= 2
    double magnitude_bound = 0.0;  // upper bound for |r|, |t|; 0 = max(m)/sqrt(P)
    int refinements = 20;          // step halvings after the grid scan
};

struct BruteSolve {
    double beta = 0.0;
    double r_mag = 0.0;
    double t_mag = 0.0;  // the smaller magnitude; the equations cannot tell r from t
    double residual = 0.0;
};

/// Minimizes the squared residuals of the measurement equations at rotations
/// 0, pi and pi/2 over beta in [-pi/2, pi/2] and magnitudes in (0, bound].
BruteSolve brute_force_solve(double m1, double m2, double m3, double tx_power,
                             const GridSpec& grid = {});

struct SinglePhaseOptimum {
    double theta = 0.0;  // best commanded phase for the node
    double rss = 0.0;
};

/// Scans one node's phase over (-pi, pi] with everything else fixed.
SinglePhaseOptimum best_single_phase(const ChannelState& channel, const PhaseVector& phases,
                                     NodeId node, int resolution = 360);

/// sqrt(P) * sum of gains, by plain summation.
double global_optimum(const ChannelState& channel);

}  // namespace beamsim::oracle
