#pragma once

// Seeded instance generators. Densities are quantized to multiples of
// 2^-12 so that measure sums, prefix tables and cube means evaluate
// without rounding and certificate comparisons are exact.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grid.hpp"

namespace onesided {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double u01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    long long below(long long n) {
        return n <= 1 ? 0 : static_cast<long long>(eng() % static_cast<std::uint64_t>(n));
    }
    bool chance(double pr) { return u01() < pr; }
};

inline double quantize_density(double x, int bits = 12) {
    if (!(x > 0)) return 0.0;
    double q = std::round(std::ldexp(x, bits));
    if (q < 1.0) q = 1.0;  // keep generated densities strictly positive
    if (q > std::ldexp(1.0, bits + 8)) q = std::ldexp(1.0, bits + 8);
    return std::ldexp(q, -bits);
}

inline WeightField gen_weight(const GridDomain& d, const std::string& name, Rng& rng) {
    WeightField f(d, 1.0);
    if (name == "ones") return f;
    if (name == "loguniform") {
        for (auto& x : f.density) x = quantize_density(std::exp2(rng.uniform(-5.0, 5.0)));
        return f;
    }
    if (name == "powerlaw") {
        auto c0 = d.coords(static_cast<std::size_t>(rng.below(static_cast<long long>(d.ncells))));
        double alpha = rng.uniform(-1.5, 1.5);
        for (std::size_t i = 0; i < d.ncells; ++i) {
            auto c = d.coords(i);
            double dist = 0.0;
            for (int a = 0; a < d.dim; ++a) {
                double del = static_cast<double>(c[a] - c0[a]) / static_cast<double>(d.cells_axis);
                dist += del * del;
            }
            dist = std::sqrt(dist) + 1.0 / static_cast<double>(d.cells_axis);
            f.density[i] = quantize_density(std::pow(dist, alpha));
        }
        return f;
    }
    if (name == "steps") {
        long long pivot = 1 + rng.below(d.cells_axis - 1);
        double hi = std::ldexp(1.0, 4), lo = std::ldexp(1.0, -4);
        for (std::size_t i = 0; i < d.ncells; ++i)
            f.density[i] = d.coords(i)[0] < pivot ? hi : lo;
        return f;
    }
    if (name == "blocks") {
        long long span = std::max<long long>(1, d.cells_axis / 4);
        std::array<long long, 3> b0{};
        for (int a = 0; a < d.dim; ++a) b0[a] = rng.below(d.cells_axis - span + 1);
        double amp = quantize_density(std::exp2(rng.uniform(1.0, 5.0)));
        for (std::size_t i = 0; i < d.ncells; ++i) {
            auto c = d.coords(i);
            bool in = true;
            for (int a = 0; a < d.dim; ++a)
                if (c[a] < b0[a] || c[a] >= b0[a] + span) in = false;
            f.density[i] = in ? amp : 1.0;
        }
        return f;
    }
    throw std::invalid_argument("gen_weight: unknown generator '" + name + "'");
}

/// Pair generators: "steps" puts large w strictly left of small v, the
/// natural extremal shape for one-sided classes.
inline WeightPair gen_pair(const GridDomain& d, const std::string& name, Rng& rng, double p) {
    if (name == "ones") return {WeightField(d, 1.0), WeightField(d, 1.0), p};
    if (name == "steps") {
        long long pivot = 1 + rng.below(d.cells_axis - 1);
        WeightField w(d, 1.0), v(d, 1.0);
        double amp = std::ldexp(1.0, 4), eps = std::ldexp(1.0, -4);
        for (std::size_t i = 0; i < d.ncells; ++i) {
            bool left = d.coords(i)[0] < pivot;
            w.density[i] = left ? amp : 1.0;
            v.density[i] = left ? 1.0 : eps;
        }
        return {std::move(w), std::move(v), p};
    }
    return {gen_weight(d, name, rng), gen_weight(d, name, rng), p};
}

inline CellSet gen_set(const GridDomain& d, const std::string& name, Rng& rng,
                       double density = 0.25) {
    CellSet e(d);
    if (name == "empty") return e;
    if (name == "full") {
        for (auto& m : e.mask) m = 1;
        return e;
    }
    if (name == "random") {
        for (auto& m : e.mask) m = rng.chance(density) ? 1 : 0;
        return e;
    }
    if (name == "block") {
        long long span = std::max<long long>(1, d.cells_axis / 4);
        std::array<long long, 3> b0{};
        for (int a = 0; a < d.dim; ++a) b0[a] = rng.below(d.cells_axis - span + 1);
        for (std::size_t i = 0; i < d.ncells; ++i) {
            auto c = d.coords(i);
            bool in = true;
            for (int a = 0; a < d.dim; ++a)
                if (c[a] < b0[a] || c[a] >= b0[a] + span) in = false;
            if (in) e.mask[i] = 1;
        }
        return e;
    }
    throw std::invalid_argument("gen_set: unknown generator '" + name + "'");
}

/// Default t sweep: dyadic thresholds 2^-depth .. 1/2.
inline std::vector<double> default_t_sweep(const GridDomain& d) {
    std::vector<double> ts;
    for (int k = d.depth; k >= 1; --k) ts.push_back(std::ldexp(1.0, -k));
    if (ts.empty()) ts.push_back(0.5);
    return ts;
}

}  // namespace onesided
