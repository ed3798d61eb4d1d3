#pragma once

#include "mvbsc/types.hpp"

namespace mvbsc {

// B_h(W): zero every entry whose prior distance exceeds h. The diagonal
// always survives (d_ii = 0).
SymMatrix band(const SymMatrix& w, const DistanceModel& dm, double h);

enum class BandwidthVariant {
    theorem34,   // h = 2*delta + d0 * (L * n_max / (2 sqrt(log n)))^(2/(2 alpha + 1))
    simulation,  // same with the factor 2 dropped
};

// Closed-form bandwidth; natural logarithm. delta and d0 must be set on dm.
double select_bandwidth(const DistanceModel& dm, int n_max, double alpha, double L,
                        int n, BandwidthVariant variant);

}  // namespace mvbsc
