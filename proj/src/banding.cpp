#include "mvbsc/banding.hpp"

#include <cmath>

namespace mvbsc {

SymMatrix band(const SymMatrix& w, const DistanceModel& dm, double h) {
    if (w.rows() != dm.n || w.cols() != dm.n)
        throw InputError("band: similarity and distance dimensions differ");
    if (h < 0.0) throw ConfigError("band: bandwidth must be >= 0");
    SymMatrix out(w.rows(), w.cols());
    for (int i = 0; i < dm.n; ++i)
        for (int j = 0; j < dm.n; ++j)
            out(i, j) = dm.d(i, j) <= h ? w(i, j) : 0.0;
    return out;
}

double select_bandwidth(const DistanceModel& dm, int n_max, double alpha, double L,
                        int n, BandwidthVariant variant) {
    if (!dm.delta.has_value()) throw ConfigError("select_bandwidth: delta unset on distance model");
    if (!(dm.d0 > 0.0)) throw ConfigError("select_bandwidth: d0 unset on distance model");
    if (n < 3) throw ConfigError("select_bandwidth: need n >= 3");
    if (n_max < 1) throw ConfigError("select_bandwidth: n_max must be >= 1");
    if (alpha < 0.0) throw ConfigError("select_bandwidth: alpha must be >= 0");

    const double c = variant == BandwidthVariant::theorem34 ? 2.0 : 1.0;
    const double base = L * n_max / (c * std::sqrt(std::log(static_cast<double>(n))));
    const double exponent = 2.0 / (2.0 * alpha + 1.0);
    return 2.0 * *dm.delta + dm.d0 * std::pow(base, exponent);
}

}  // namespace mvbsc
