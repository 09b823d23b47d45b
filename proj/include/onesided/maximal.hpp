#pragma once

// One-sided maximal operators on dyadic grids, cell-exact.
//
// Dyadic flavors take the supremum over grid-dyadic cubes containing the
// cell and average |f| over the plus- (or minus-) neighbor with denominator
// |Q|; anchored flavors average over squares [x, x+h)^n whose lower-left
// corner is the cell anchor, for dyadic sizes h. Mass outside the extent
// counts as zero while denominators keep the full cube volume. Every fast
// path has an independent brute-force oracle.

#include <climits>
#include <cstdint>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "parallel.hpp"

namespace onesided {

struct CubeWitness {
    int level = INT_MIN;              // dyadic: cube level; anchored: size exponent
    std::array<long long, 3> anchor{};  // dyadic: cube anchor; anchored: cell coords
    bool valid() const { return level != INT_MIN; }
};

struct MaximalResult {
    GridDomain dom;
    std::vector<double> value;
    std::vector<CubeWitness> witness;  // empty unless requested

    bool has_witness() const { return !witness.empty(); }
};

struct MaximalOptions {
    int max_level = INT_MIN;  // finest dyadic cube level; default grid depth
    bool witnesses = false;
    int threads = 0;
};

namespace detail {

inline std::size_t flat_index(const std::array<long long, 3>& c, long long axis, int dim) {
    std::size_t idx = 0;
    for (int a = dim - 1; a >= 0; --a)
        idx = idx * static_cast<std::size_t>(axis) + static_cast<std::size_t>(c[a]);
    return idx;
}

inline std::array<long long, 3> unflatten(std::size_t idx, long long axis, int dim) {
    std::array<long long, 3> c{};
    for (int a = 0; a < dim; ++a) {
        c[a] = static_cast<long long>(idx % static_cast<std::size_t>(axis));
        idx /= static_cast<std::size_t>(axis);
    }
    return c;
}

/// Top-down sweep shared by the dyadic plus/minus fast paths. dir = +1
/// averages over Q^+, dir = -1 over Q^-.
inline MaximalResult dyadic_directional_maximal(const SummedTable& t, int dir,
                                                const MaximalOptions& opts) {
    const GridDomain& d = t.dom;
    int kmax = opts.max_level == INT_MIN ? d.depth : std::min(opts.max_level, d.depth);
    if (kmax < d.min_level()) throw std::invalid_argument("max_level below coarsest level");

    std::vector<double> best, cur;
    std::vector<std::int8_t> blev, clev;  // witness level per cube
    for (int k = d.min_level(); k <= kmax; ++k) {
        long long caxis = 1LL << (d.width_exp + k);
        long long span = d.cube_span(k);
        std::size_t ncubes = 1;
        for (int a = 0; a < d.dim; ++a) ncubes *= static_cast<std::size_t>(caxis);
        cur.assign(ncubes, 0.0);
        if (opts.witnesses) clev.assign(ncubes, static_cast<std::int8_t>(k));
        bool first = (k == d.min_level());
        double cell_count = 1.0;
        for (int a = 0; a < d.dim; ++a) cell_count *= static_cast<double>(span);

        parallel_for(ncubes, [&](std::size_t b, std::size_t e) {
            std::array<long long, 3> lo{}, hi{};
            for (std::size_t j = b; j < e; ++j) {
                auto c = unflatten(j, caxis, d.dim);
                bool inside = true;
                for (int a = 0; a < d.dim; ++a) {
                    long long nb = c[a] + dir;
                    if (nb < 0 || nb >= caxis) { inside = false; break; }
                    lo[a] = nb * span;
                    hi[a] = lo[a] + span;
                }
                double mean = inside ? t.cells_sum(lo, hi) / cell_count : 0.0;
                if (first) {
                    cur[j] = mean;
                    continue;
                }
                std::array<long long, 3> pc{};
                for (int a = 0; a < d.dim; ++a) pc[a] = c[a] >> 1;
                std::size_t pj = flat_index(pc, caxis >> 1, d.dim);
                if (mean >= best[pj]) {
                    cur[j] = mean;
                } else {
                    cur[j] = best[pj];
                    if (opts.witnesses) clev[j] = blev[pj];
                }
            }
        }, opts.threads);
        best.swap(cur);
        if (opts.witnesses) blev.swap(clev);
    }

    MaximalResult r;
    r.dom = d;
    r.value.resize(d.ncells);
    if (opts.witnesses) r.witness.resize(d.ncells);
    int shift = d.depth - kmax;
    parallel_for(d.ncells, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto c = d.coords(i);
            std::array<long long, 3> cc{};
            for (int a = 0; a < d.dim; ++a) cc[a] = c[a] >> shift;
            std::size_t j = flat_index(cc, 1LL << (d.width_exp + kmax), d.dim);
            r.value[i] = best[j];
            if (opts.witnesses) {
                int wl = blev[j];
                CubeWitness w;
                w.level = wl;
                auto cell = d.cell_cube(c);
                auto anc = cell.ancestor(wl);
                w.anchor = anc.anchor;
                r.witness[i] = w;
            }
        }
    }, opts.threads);
    return r;
}

inline std::vector<int> default_sizes(const GridDomain& d, int max_level) {
    int kmax = max_level == INT_MIN ? d.depth : std::min(max_level, d.depth);
    std::vector<int> s;
    for (int k = d.min_level(); k <= kmax; ++k) s.push_back(k);
    return s;
}

}  // namespace detail

inline MaximalResult dyadic_plus_maximal(const WeightField& f, MaximalOptions opts = {}) {
    f.check_nonnegative();
    SummedTable t(f);
    return detail::dyadic_directional_maximal(t, +1, opts);
}
inline MaximalResult dyadic_plus_maximal(const CellSet& e, MaximalOptions opts = {}) {
    SummedTable t(e);
    return detail::dyadic_directional_maximal(t, +1, opts);
}
inline MaximalResult dyadic_minus_maximal(const WeightField& f, MaximalOptions opts = {}) {
    f.check_nonnegative();
    SummedTable t(f);
    return detail::dyadic_directional_maximal(t, -1, opts);
}
inline MaximalResult dyadic_minus_maximal(const CellSet& e, MaximalOptions opts = {}) {
    SummedTable t(e);
    return detail::dyadic_directional_maximal(t, -1, opts);
}

/// Brute-force oracle: direct per-cell cube scan with naive summation.
inline MaximalResult dyadic_directional_maximal_oracle(const WeightField& f, int dir,
                                                       MaximalOptions opts = {}) {
    const GridDomain& d = f.dom;
    int kmax = opts.max_level == INT_MIN ? d.depth : std::min(opts.max_level, d.depth);
    MaximalResult r;
    r.dom = d;
    r.value.assign(d.ncells, 0.0);
    if (opts.witnesses) r.witness.resize(d.ncells);
    for (std::size_t i = 0; i < d.ncells; ++i) {
        auto c = d.coords(i);
        double bestv = 0.0;
        int bestk = d.min_level();
        for (int k = d.min_level(); k <= kmax; ++k) {
            long long span = d.cube_span(k);
            std::array<long long, 3> start{};
            bool inside = true;
            for (int a = 0; a < d.dim; ++a) {
                long long j = c[a] / span;  // cell coords are nonnegative
                start[a] = (j + dir) * span;
                if (start[a] < 0 || start[a] + span > d.cells_axis) inside = false;
            }
            double mean = 0.0;
            if (inside) {
                double sum = 0.0, cnt = 0.0;
                std::array<long long, 3> q{};
                for (long long z = 0; z < (d.dim > 2 ? span : 1); ++z)
                    for (long long y = 0; y < (d.dim > 1 ? span : 1); ++y)
                        for (long long x = 0; x < span; ++x) {
                            q[0] = start[0] + x;
                            if (d.dim > 1) q[1] = start[1] + y;
                            if (d.dim > 2) q[2] = start[2] + z;
                            sum += f.density[d.index(q)];
                            cnt += 1.0;
                        }
                mean = sum / cnt;
            }
            if (k == d.min_level() || mean >= bestv) { bestv = mean; bestk = k; }
        }
        r.value[i] = bestv;
        if (opts.witnesses) {
            CubeWitness w;
            w.level = bestk;
            w.anchor = d.cell_cube(c).ancestor(bestk).anchor;
            r.witness[i] = w;
        }
    }
    return r;
}

inline MaximalResult dyadic_plus_maximal_oracle(const WeightField& f, MaximalOptions o = {}) {
    return dyadic_directional_maximal_oracle(f, +1, o);
}
inline MaximalResult dyadic_minus_maximal_oracle(const WeightField& f, MaximalOptions o = {}) {
    return dyadic_directional_maximal_oracle(f, -1, o);
}

namespace detail {

/// Anchored sweep core: per cell, sizes processed large-to-small so ties go
/// to the smallest square. quarter = 0 averages the full square [x, x+h)^n
/// (dir = +1) or [x-h, x)^n (dir = -1); quarter in 1..3 averages the 2D
/// subsquare with denominator h^2/4.
inline MaximalResult anchored_maximal_core(const SummedTable& t, int dir, int quarter,
                                           std::vector<int> sizes, const MaximalOptions& opts) {
    const GridDomain& d = t.dom;
    std::sort(sizes.begin(), sizes.end());  // ascending s = descending h
    MaximalResult r;
    r.dom = d;
    r.value.assign(d.ncells, 0.0);
    if (opts.witnesses) r.witness.assign(d.ncells, CubeWitness{});

    parallel_for(d.ncells, [&](std::size_t b, std::size_t e) {
        std::array<long long, 3> lo{}, hi{};
        for (std::size_t i = b; i < e; ++i) {
            auto c = d.coords(i);
            double bestv = 0.0;
            int bests = INT_MIN;
            bool any = false;
            for (int s : sizes) {
                if (s > d.depth || d.depth - s > 40) continue;
                long long span = 1LL << (d.depth - s);
                double val;
                if (quarter == 0) {
                    double cells = 1.0;
                    for (int a = 0; a < d.dim; ++a) {
                        lo[a] = dir > 0 ? c[a] : c[a] - span;
                        hi[a] = lo[a] + span;
                        cells *= static_cast<double>(span);
                    }
                    val = t.cells_sum_clamped(lo, hi) / cells;
                } else if (span == 1) {
                    // every quarter of the cell-size square stays inside the cell
                    std::array<long long, 3> cc = c;
                    val = t.cells_sum({cc[0], cc[1], 0}, {cc[0] + 1, cc[1] + 1, 0});
                } else {
                    long long hspan = span / 2;
                    long long ox = (quarter == 1 || quarter == 2) ? hspan : 0;
                    long long oy = (quarter == 1 || quarter == 3) ? hspan : 0;
                    lo[0] = c[0] + ox; hi[0] = lo[0] + hspan;
                    lo[1] = c[1] + oy; hi[1] = lo[1] + hspan;
                    double cells = static_cast<double>(hspan) * static_cast<double>(hspan);
                    val = t.cells_sum_clamped(lo, hi) / cells;
                }
                if (!any || val >= bestv) { bestv = val; bests = s; any = true; }
            }
            r.value[i] = any ? bestv : 0.0;
            if (opts.witnesses && any) {
                CubeWitness w;
                w.level = bests;
                w.anchor = c;
                r.witness[i] = w;
            }
        }
    }, opts.threads);
    return r;
}

}  // namespace detail

/// Anchored one-sided maximal over squares of dyadic size with the cell
/// anchor as lower-left corner. `sizes` lists size exponents s (h = 2^-s);
/// default: every size fitting the extent.
inline MaximalResult anchored_plus_maximal(const WeightField& f, std::vector<int> sizes = {},
                                           MaximalOptions opts = {}) {
    f.check_nonnegative();
    if (sizes.empty()) sizes = detail::default_sizes(f.dom, opts.max_level);
    SummedTable t(f);
    return detail::anchored_maximal_core(t, +1, 0, std::move(sizes), opts);
}
inline MaximalResult anchored_plus_maximal(const CellSet& e, std::vector<int> sizes = {},
                                           MaximalOptions opts = {}) {
    if (sizes.empty()) sizes = detail::default_sizes(e.dom, opts.max_level);
    SummedTable t(e);
    return detail::anchored_maximal_core(t, +1, 0, std::move(sizes), opts);
}
inline MaximalResult anchored_minus_maximal(const WeightField& f, std::vector<int> sizes = {},
                                            MaximalOptions opts = {}) {
    f.check_nonnegative();
    if (sizes.empty()) sizes = detail::default_sizes(f.dom, opts.max_level);
    SummedTable t(f);
    return detail::anchored_maximal_core(t, -1, 0, std::move(sizes), opts);
}

/// 2D one-sided maximal over anchored squares of dyadic size.
inline MaximalResult onesided_maximal_2d(const WeightField& f, std::vector<int> sizes = {},
                                         MaximalOptions opts = {}) {
    if (f.dom.dim != 2) throw std::invalid_argument("onesided_maximal_2d: dim must be 2");
    return anchored_plus_maximal(f, std::move(sizes), opts);
}
inline MaximalResult onesided_maximal_2d(const CellSet& e, std::vector<int> sizes = {},
                                         MaximalOptions opts = {}) {
    if (e.dom.dim != 2) throw std::invalid_argument("onesided_maximal_2d: dim must be 2");
    return anchored_plus_maximal(e, std::move(sizes), opts);
}

/// 2D subsquare maximal: averages |f| over the quarter Q^i of the anchored
/// square with denominator h^2/4. A truncation xi restricts to sizes h > xi.
inline MaximalResult subsquare_maximal_2d(const WeightField& f, int quarter,
                                          std::optional<Dyadic> xi = {},
                                          std::vector<int> sizes = {},
                                          MaximalOptions opts = {}) {
    if (f.dom.dim != 2) throw std::invalid_argument("subsquare_maximal_2d: dim must be 2");
    if (quarter < 1 || quarter > 3)
        throw std::invalid_argument("subsquare_maximal_2d: quarter in 1..3");
    f.check_nonnegative();
    if (sizes.empty()) sizes = detail::default_sizes(f.dom, opts.max_level);
    if (xi) {
        if (!(Dyadic(0) < *xi)) throw std::invalid_argument("subsquare_maximal_2d: xi must be positive");
        std::vector<int> kept;
        for (int s : sizes)
            if (*xi < level_side(s)) kept.push_back(s);
        sizes = kept;
    }
    SummedTable t(f);
    return detail::anchored_maximal_core(t, +1, quarter, std::move(sizes), opts);
}
inline MaximalResult subsquare_maximal_2d(const CellSet& e, int quarter,
                                          std::optional<Dyadic> xi = {},
                                          std::vector<int> sizes = {},
                                          MaximalOptions opts = {}) {
    WeightField ind(e.dom);
    for (std::size_t i = 0; i < e.mask.size(); ++i) ind.density[i] = e.mask[i] ? 1.0 : 0.0;
    return subsquare_maximal_2d(ind, quarter, xi, std::move(sizes), opts);
}

/// Oracle for the anchored flavors: per-cell, per-size direct measure()
/// evaluation over exact dyadic boxes, no tables.
inline MaximalResult anchored_maximal_oracle(const WeightField& f, int dir, int quarter,
                                             std::vector<int> sizes = {},
                                             std::optional<Dyadic> xi = {}) {
    const GridDomain& d = f.dom;
    if (sizes.empty()) sizes = detail::default_sizes(d, INT_MIN);
    if (xi) {
        std::vector<int> kept;
        for (int s : sizes)
            if (*xi < level_side(s)) kept.push_back(s);
        sizes = kept;
    }
    std::sort(sizes.begin(), sizes.end());
    MaximalResult r;
    r.dom = d;
    r.value.assign(d.ncells, 0.0);
    for (std::size_t i = 0; i < d.ncells; ++i) {
        auto c = d.coords(i);
        DyPoint x = d.cell_anchor(c);
        double bestv = 0.0;
        bool any = false;
        for (int s : sizes) {
            Dyadic h = level_side(s);
            Box b;
            b.dim = d.dim;
            for (int a = 0; a < d.dim; ++a) {
                b.lo[a] = dir > 0 ? x[a] : x[a] - h;
                b.hi[a] = dir > 0 ? x[a] + h : x[a];
            }
            double denom = 1.0;
            if (quarter >= 1) {
                b = subsquare(b, quarter);
                denom = (h * h).to_double() / 4.0;
            } else {
                for (int a = 0; a < d.dim; ++a) denom *= h.to_double();
            }
            double val = measure(f, b) / denom;
            if (!any || val >= bestv) { bestv = val; any = true; }
        }
        r.value[i] = any ? bestv : 0.0;
    }
    return r;
}

inline CellSet level_set(const MaximalResult& m, double t) {
    if (!(t > 0)) throw std::invalid_argument("level_set: t must be positive");
    CellSet s(m.dom);
    for (std::size_t i = 0; i < m.value.size(); ++i)
        if (m.value[i] > t) s.set(i);
    return s;
}

inline CellSet level_band(const MaximalResult& m, double t) {
    if (!(t > 0)) throw std::invalid_argument("level_band: t must be positive");
    CellSet s(m.dom);
    for (std::size_t i = 0; i < m.value.size(); ++i)
        if (m.value[i] > t && m.value[i] <= 2.0 * t) s.set(i);
    return s;
}

/// Omega set {a > t and b <= 2t} for two results on one domain.
inline CellSet level_omega(const MaximalResult& a, const MaximalResult& b, double t) {
    if (a.dom != b.dom) throw std::invalid_argument("level_omega: domain mismatch");
    if (!(t > 0)) throw std::invalid_argument("level_omega: t must be positive");
    CellSet s(a.dom);
    for (std::size_t i = 0; i < a.value.size(); ++i)
        if (a.value[i] > t && b.value[i] <= 2.0 * t) s.set(i);
    return s;
}

}  // namespace onesided
