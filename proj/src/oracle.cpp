#include "beamsim/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace beamsim::oracle {

namespace {

struct Point {
    double beta, r, t;
};

double residual(const Point& p, const std::array<double, 3>& target, double power) {
    static constexpr std::array<double, 3> kRotations{0.0, kPi, kPi / 2.0};
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double model =
            power * (p.r * p.r + p.t * p.t + 2.0 * p.r * p.t * std::cos(p.beta + kRotations[k]));
        const double e = model - target[k];
        sum += e * e;
    }
    return sum;
}

}  // namespace

BruteSolve brute_force_solve(double m1, double m2, double m3, double tx_power,
                             const GridSpec& grid) {
    if (grid.resolution < 2) {
        throw ContractViolation("grid resolution must be >= 2");
    }
    if (!(tx_power > 0.0) || m1 < 0.0 || m2 < 0.0 || m3 < 0.0) {
        throw ContractViolation("brute_force_solve: bad inputs");
    }
    const std::array<double, 3> target{m1 * m1, m2 * m2, m3 * m3};
    double bound = grid.magnitude_bound;
    if (bound <= 0.0) {
        bound = std::max({m1, m2, m3}) / std::sqrt(tx_power);
    }
    if (bound <= 0.0) {
        return {};
    }

    const int n = grid.resolution;
    const double beta_lo = -kPi / 2.0;
    const double beta_step = kPi / (n - 1);
    const double mag_step = bound / n;

    Point best{0.0, bound, bound};
    double best_err = residual(best, target, tx_power);
    for (int i = 0; i < n; ++i) {
        const double beta = beta_lo + i * beta_step;
        // The rotations are 0, pi and pi/2, so cos(beta + rotation) is one of
        // these three for every magnitude pair on this row.
        const std::array<double, 3> c{std::cos(beta), -std::cos(beta), -std::sin(beta)};
        for (int j = 1; j <= n; ++j) {
            const double r = j * mag_step;
            // r and t are interchangeable, so scan t <= r only.
            for (int k = 1; k <= j; ++k) {
                const double t = k * mag_step;
                const double base = r * r + t * t;
                const double cross = 2.0 * r * t;
                double e = 0.0;
                for (std::size_t q = 0; q < 3; ++q) {
                    const double d = tx_power * (base + cross * c[q]) - target[q];
                    e += d * d;
                }
                if (e < best_err) {
                    best_err = e;
                    best = Point{beta, r, t};
                }
            }
        }
    }

    // Pattern search over the 26 neighbours, halving the step when stuck.
    double hb = beta_step;
    double hm = mag_step;
    for (int level = 0; level <= grid.refinements; ++level) {
        bool moved = true;
        while (moved) {
            moved = false;
            const Point centre = best;
            for (int db = -1; db <= 1; ++db) {
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dt = -1; dt <= 1; ++dt) {
                        if (db == 0 && dr == 0 && dt == 0) {
                            continue;
                        }
                        Point p{std::clamp(centre.beta + db * hb, -kPi / 2.0, kPi / 2.0),
                                std::clamp(centre.r + dr * hm, 0.0, bound),
                                std::clamp(centre.t + dt * hm, 0.0, bound)};
                        const double e = residual(p, target, tx_power);
                        if (e < best_err) {
                            best_err = e;
                            best = p;
                            moved = true;
                        }
                    }
                }
            }
        }
        hb *= 0.5;
        hm *= 0.5;
    }

    BruteSolve out;
    out.beta = best.beta;
    out.r_mag = std::max(best.r, best.t);
    out.t_mag = std::min(best.r, best.t);
    out.residual = best_err;
    return out;
}

SinglePhaseOptimum best_single_phase(const ChannelState& channel, const PhaseVector& phases,
                                     NodeId node, int resolution) {
    if (resolution < 2) {
        throw ContractViolation("grid resolution must be >= 2");
    }
    const std::size_t idx = channel.index_of(node);
    if (idx >= channel.size()) {
        throw ContractViolation("best_single_phase: node not present");
    }
    PhaseVector trial = phases;
    auto rss_at = [&](double theta) {
        trial.psi[idx] = theta;
        return evaluate_rss(channel, trial);
    };

    const double step = kTwoPi / resolution;
    SinglePhaseOptimum best{kPi, rss_at(kPi)};
    for (int k = 1; k < resolution; ++k) {
        const double theta = -kPi + k * step;
        const double v = rss_at(theta);
        if (v > best.rss) {
            best = {theta, v};
        }
    }
    double h = step;
    for (int level = 0; level <= 20; ++level) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (double dir : {-1.0, 1.0}) {
                const double theta = best.theta + dir * h;
                const double v = rss_at(theta);
                if (v > best.rss) {
                    best = {theta, v};
                    moved = true;
                }
            }
        }
        h *= 0.5;
    }
    best.theta = canonical_phase(best.theta);
    return best;
}

double global_optimum(const ChannelState& channel) {
    double sum = 0.0;
    for (double a : channel.gains) {
        sum += a;
    }
    return std::sqrt(channel.tx_power) * sum;
}

}  // namespace beamsim::oracle
