#pragma once

// Restricted and Muckenhoupt-type one-sided weight class constants on
// finite grids, with extremal witnesses.
//
// The restricted constant is the supremum over qualifying cubes Q and
// measurable E inside Q^+ of (|E|/|Q|) * (w(Q)/v(E))^{1/p}. For a fixed
// cardinality |E| the ratio is maximized by the cells of smallest v-mass,
// so the inner supremum reduces to prefixes of the ascending v-sort; the
// scan visits every prefix. Qualifying cubes are the grid-dyadic cubes
// with Q^+ inside the extent (dyadic flavor) or every cell-anchored cube
// of dyadic size with Q^+ inside the extent (anchored flavor).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "grid.hpp"
#include "maximal.hpp"
#include "parallel.hpp"

namespace onesided {

enum class WeightFlavor { Dyadic, Anchored };

inline const char* flavor_name(WeightFlavor f) {
    return f == WeightFlavor::Dyadic ? "dyadic" : "anchored";
}

struct ClassWitness {
    Box cube;                        // qualifying cube
    bool grid_dyadic = false;
    DyadicCube dyadic{};             // valid when grid_dyadic
    std::vector<std::size_t> cells;  // witness set E (global cell indices)
};

struct ClassConstant {
    double value = 0.0;  // may be +infinity
    double p = 1.0;
    WeightFlavor flavor = WeightFlavor::Dyadic;
    std::string tag;
    bool has_witness = false;
    ClassWitness witness;

    bool finite() const { return std::isfinite(value); }
};

struct ClassOptions {
    int threads = 0;
    int max_level = std::numeric_limits<int>::min();  // finest cube level
};

namespace detail {

/// Qualifying cube in cell coordinates: Q spans [start, start+span),
/// Q^+ spans [start+span, start+2*span) per axis, both inside the extent.
struct QualCube {
    std::array<long long, 3> start{};
    long long span = 1;
    int level = 0;  // dyadic level / size exponent
    bool grid_dyadic = true;
};

template <class Fn>
void for_each_qualifying_cube(const GridDomain& d, WeightFlavor flavor, int max_level, Fn&& fn) {
    int kmax = max_level == std::numeric_limits<int>::min() ? d.depth
                                                            : std::min(max_level, d.depth);
    if (flavor == WeightFlavor::Dyadic) {
        for_each_dyadic_cube(d, CubeConstraint::PlusInside, [&](const DyadicCube& q) {
            QualCube c;
            c.start = d.cube_cell_start(q);
            c.span = d.cube_span(q.level);
            c.level = q.level;
            c.grid_dyadic = true;
            fn(c);
        }, kmax);
        return;
    }
    for (int s = d.min_level(); s <= kmax; ++s) {
        long long span = d.cube_span(s);
        if (2 * span > d.cells_axis) continue;
        long long amax = d.cells_axis - 2 * span;
        QualCube c;
        c.span = span;
        c.level = s;
        c.grid_dyadic = false;
        for (long long z = 0; z <= (d.dim > 2 ? amax : 0); ++z)
            for (long long y = 0; y <= (d.dim > 1 ? amax : 0); ++y)
                for (long long x = 0; x <= amax; ++x) {
                    c.start = {x, y, z};
                    fn(c);
                }
    }
}

inline long long origin_cell(const GridDomain& d, int axis) {
    return d.origin[axis] << d.depth;
}

inline Box qual_cube_box(const GridDomain& d, const QualCube& c) {
    Box b;
    b.dim = d.dim;
    for (int a = 0; a < d.dim; ++a) {
        b.lo[a] = Dyadic(origin_cell(d, a) + c.start[a], d.depth);
        b.hi[a] = Dyadic(origin_cell(d, a) + c.start[a] + c.span, d.depth);
    }
    return b;
}

/// Witness ordering key: (level, anchor..., |E| cells); the supremum keeps
/// the lexicographically smallest witness on exact value ties.
using WitnessKey = std::tuple<int, long long, long long, long long, long long>;

inline WitnessKey qual_key(const QualCube& c, long long m) {
    return {c.level, c.start[0], c.start[1], c.start[2], m};
}

inline void collect_plus_cells(const GridDomain& d, const QualCube& c,
                               std::vector<std::size_t>& out) {
    out.clear();
    std::array<long long, 3> q{};
    for (long long z = 0; z < (d.dim > 2 ? c.span : 1); ++z)
        for (long long y = 0; y < (d.dim > 1 ? c.span : 1); ++y)
            for (long long x = 0; x < c.span; ++x) {
                q[0] = c.start[0] + c.span + x;
                if (d.dim > 1) q[1] = c.start[1] + c.span + y;
                if (d.dim > 2) q[2] = c.start[2] + c.span + z;
                out.push_back(d.index(q));
            }
}

inline double cube_w_sum(const SummedTable& wt, const QualCube& c, int dim) {
    std::array<long long, 3> lo = c.start, hi{};
    for (int a = 0; a < dim; ++a) hi[a] = c.start[a] + c.span;
    return wt.cells_sum(lo, hi);
}

struct RunningBest {
    double value = -1.0;
    WitnessKey key{};
    QualCube cube;
    long long m = 0;
    bool any = false;

    void offer(double v, const WitnessKey& k, const QualCube& c, long long mm) {
        if (!any || v > value || (v == value && k < key)) {
            value = v;
            key = k;
            cube = c;
            m = mm;
            any = true;
        }
    }
    void merge(const RunningBest& o) {
        if (o.any) offer(o.value, o.key, o.cube, o.m);
    }
};

}  // namespace detail

/// Extremal prefix for one cube: best restricted ratio over E inside Q^+
/// together with the realizing prefix cells.
struct CubeExtremal {
    double ratio = 0.0;
    std::vector<std::size_t> cells;
};

namespace detail {

/// Shared per-cube scan. `wmean` is w(Q)/|Q| in density units; masses in
/// `vm` are v * cellvol for the Q^+ cells. At p = 1 the ratio is computed
/// as (wmean * m * cellvol) / vmass so that the single-cell prefix matches
/// the pointwise p = 1 check bit for bit.
inline void scan_prefixes(double p, double wmean, double vol_q, double cellvol,
                          std::vector<std::pair<double, std::size_t>>& vm,
                          double& best, long long& best_m) {
    std::sort(vm.begin(), vm.end());
    best = -1.0;
    best_m = 0;
    double vpref = 0.0;
    double wq = wmean * vol_q;
    for (std::size_t m = 1; m <= vm.size(); ++m) {
        vpref += vm[m - 1].first;
        double ratio;
        double mvol = static_cast<double>(m) * cellvol;
        if (vpref == 0.0) {
            ratio = wq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        } else if (p == 1.0) {
            ratio = (wmean * mvol) / vpref;
        } else {
            ratio = (mvol / vol_q) * std::pow(wq / vpref, 1.0 / p);
        }
        if (ratio > best) {
            best = ratio;
            best_m = static_cast<long long>(m);
        }
    }
}

}  // namespace detail

inline CubeExtremal restricted_cube_extremal(const WeightPair& pair, const SummedTable& wt,
                                             const detail::QualCube& c) {
    const GridDomain& d = pair.dom();
    double cellvol = d.cell_volume();
    std::vector<std::size_t> cells;
    detail::collect_plus_cells(d, c, cells);
    std::vector<std::pair<double, std::size_t>> vm;
    vm.reserve(cells.size());
    for (auto i : cells) vm.emplace_back(pair.v.density[i] * cellvol, i);
    double cnt = 1.0;
    for (int a = 0; a < d.dim; ++a) cnt *= static_cast<double>(c.span);
    double wmean = detail::cube_w_sum(wt, c, d.dim) / cnt;
    double vol_q = cnt * cellvol;
    if (wmean == 0.0) return {};

    double best;
    long long best_m;
    detail::scan_prefixes(pair.p, wmean, vol_q, cellvol, vm, best, best_m);
    CubeExtremal r;
    r.ratio = best < 0 ? 0.0 : best;
    for (long long m = 0; m < best_m; ++m) r.cells.push_back(vm[m].second);
    return r;
}

/// Restricted one-sided class constant with extremal witness.
inline ClassConstant restricted_constant(const WeightPair& pair, WeightFlavor flavor,
                                         ClassOptions opts = {}) {
    const GridDomain& d = pair.dom();
    pair.w.check_nonnegative();
    pair.v.check_nonnegative();
    SummedTable wt(pair.w);
    double cellvol = d.cell_volume();

    std::vector<detail::QualCube> cubes;
    detail::for_each_qualifying_cube(d, flavor, opts.max_level,
                                     [&](const detail::QualCube& c) { cubes.push_back(c); });

    std::vector<detail::RunningBest> parts;
    std::size_t nblocks = (cubes.size() + 4095) / 4096;
    parts.resize(std::max<std::size_t>(nblocks, 1));
    parallel_for(parts.size(), [&](std::size_t bb, std::size_t be) {
        std::vector<std::size_t> cells;
        std::vector<std::pair<double, std::size_t>> vm;
        for (std::size_t blk = bb; blk < be; ++blk) {
            detail::RunningBest& best = parts[blk];
            std::size_t lo = blk * 4096, hi = std::min(cubes.size(), lo + 4096);
            for (std::size_t ci = lo; ci < hi; ++ci) {
                const auto& c = cubes[ci];
                double cnt = 1.0;
                for (int a = 0; a < d.dim; ++a) cnt *= static_cast<double>(c.span);
                double wmean = detail::cube_w_sum(wt, c, d.dim) / cnt;
                if (wmean == 0.0) continue;
                detail::collect_plus_cells(d, c, cells);
                vm.clear();
                for (auto i : cells) vm.emplace_back(pair.v.density[i] * cellvol, i);
                double bestr;
                long long bestm;
                detail::scan_prefixes(pair.p, wmean, cnt * cellvol, cellvol, vm, bestr, bestm);
                if (bestr >= 0)
                    best.offer(bestr, detail::qual_key(c, bestm), c, bestm);
            }
        }
    }, opts.threads);

    detail::RunningBest best;
    for (const auto& pb : parts) best.merge(pb);

    ClassConstant out;
    out.p = pair.p;
    out.flavor = flavor;
    out.tag = std::string("restricted_") + flavor_name(flavor);
    if (!best.any) {
        out.value = 0.0;  // no qualifying cube: empty supremum
        return out;
    }
    out.value = best.value;
    out.has_witness = true;
    out.witness.cube = detail::qual_cube_box(d, best.cube);
    out.witness.grid_dyadic = best.cube.grid_dyadic;
    if (best.cube.grid_dyadic) {
        DyadicCube q{d.dim, best.cube.level, {}};
        for (int a = 0; a < d.dim; ++a)
            q.anchor[a] = (detail::origin_cell(d, a) + best.cube.start[a]) >>
                          (d.depth - best.cube.level);
        out.witness.dyadic = q;
    }
    // rebuild the extremal prefix for the winning cube
    CubeExtremal ex = restricted_cube_extremal(pair, wt, best.cube);
    out.witness.cells = std::move(ex.cells);
    return out;
}

/// Muckenhoupt-type constant sup |Q|^{-p} w(Q) (int_{Q^+} v^{1-p'})^{p-1};
/// any v = 0 cell behind positive w-mass makes the constant infinite.
inline ClassConstant muckenhoupt_constant(const WeightPair& pair, WeightFlavor flavor,
                                          ClassOptions opts = {}) {
    if (!(pair.p > 1.0))
        throw std::invalid_argument("muckenhoupt_constant: requires p > 1 (use a1_pointwise_check)");
    const GridDomain& d = pair.dom();
    SummedTable wt(pair.w);
    double cellvol = d.cell_volume();
    double dual_exp = 1.0 - pair.dual_exponent();  // 1 - p' = -1/(p-1)

    detail::RunningBest best;
    std::vector<std::size_t> cells;
    detail::for_each_qualifying_cube(d, flavor, opts.max_level, [&](const detail::QualCube& c) {
        double cnt = 1.0;
        for (int a = 0; a < d.dim; ++a) cnt *= static_cast<double>(c.span);
        double wmean = detail::cube_w_sum(wt, c, d.dim) / cnt;
        if (wmean == 0.0) return;
        detail::collect_plus_cells(d, c, cells);
        bool dual_inf = false;
        KahanSum dual;
        for (auto i : cells) {
            double vc = pair.v.density[i];
            if (vc == 0.0) { dual_inf = true; break; }
            dual.add(std::pow(vc, dual_exp));
        }
        double val;
        if (dual_inf) {
            val = std::numeric_limits<double>::infinity();
        } else {
            double dual_mean = dual.value() / cnt;  // (1/|Q|) int_{Q^+} v^{1-p'}
            val = wmean * std::pow(dual_mean, pair.p - 1.0);
        }
        best.offer(val, detail::qual_key(c, 0), c, 0);
    });

    ClassConstant out;
    out.p = pair.p;
    out.flavor = flavor;
    out.tag = std::string("muckenhoupt_") + flavor_name(flavor);
    if (!best.any) return out;
    out.value = best.value;
    out.has_witness = true;
    out.witness.cube = detail::qual_cube_box(d, best.cube);
    out.witness.grid_dyadic = best.cube.grid_dyadic;
    if (best.cube.grid_dyadic) {
        DyadicCube q{d.dim, best.cube.level, {}};
        for (int a = 0; a < d.dim; ++a)
            q.anchor[a] = (detail::origin_cell(d, a) + best.cube.start[a]) >>
                          (d.depth - best.cube.level);
        out.witness.dyadic = q;
    }
    return out;
}

/// Pointwise p = 1 check: max over cells with v > 0 of (M^- w)/v, infinite
/// when some v = 0 cell sees positive minus-maximal mass. The minus-maximal
/// flavor matches the cube family of the restricted constant.
inline ClassConstant a1_pointwise_check(const WeightPair& pair, WeightFlavor flavor,
                                        ClassOptions opts = {}) {
    const GridDomain& d = pair.dom();
    MaximalOptions mo;
    mo.max_level = opts.max_level;
    mo.threads = opts.threads;
    MaximalResult minus = flavor == WeightFlavor::Dyadic
                              ? dyadic_minus_maximal(pair.w, mo)
                              : anchored_minus_maximal(pair.w, {}, mo);
    ClassConstant out;
    out.p = 1.0;
    out.flavor = flavor;
    out.tag = std::string("a1_pointwise_") + flavor_name(flavor);
    double best = -1.0;
    std::size_t best_cell = 0;
    bool any = false;
    for (std::size_t i = 0; i < d.ncells; ++i) {
        double vc = pair.v.density[i];
        double mv = minus.value[i];
        double atom;
        if (vc > 0.0) atom = mv / vc;
        else if (mv > 0.0) atom = std::numeric_limits<double>::infinity();
        else continue;
        if (!any || atom > best) {
            best = atom;
            best_cell = i;
            any = true;
        }
    }
    if (!any) return out;
    out.value = best;
    out.has_witness = true;
    out.witness.cube = d.cell_cube(d.coords(best_cell)).box();
    out.witness.grid_dyadic = true;
    out.witness.dyadic = d.cell_cube(d.coords(best_cell));
    out.witness.cells = {best_cell};
    return out;
}

enum class TruncateVariant { MaxMax, MinMax };

/// Cellwise truncation (max{w,a}, max{v,b}) or (min{w,a}, max{v,b}).
inline WeightPair truncate_pair(const WeightPair& pair, double a, double b,
                                TruncateVariant variant) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("truncate_pair: a, b must be positive");
    WeightPair out = pair;
    for (auto& x : out.w.density) x = variant == TruncateVariant::MaxMax ? std::max(x, a)
                                                                         : std::min(x, a);
    for (auto& x : out.v.density) x = std::max(x, b);
    return out;
}

/// Reflection through the extent center: cell c -> N-1-c per axis. The
/// minus-sided classes are the plus-sided classes of the reflected pair,
/// so the minus entry points below delegate through this map.
inline WeightField reflect_field(const WeightField& f) {
    WeightField g(f.dom);
    const GridDomain& d = f.dom;
    for (std::size_t i = 0; i < d.ncells; ++i) {
        auto c = d.coords(i);
        for (int a = 0; a < d.dim; ++a) c[a] = d.cells_axis - 1 - c[a];
        g.density[d.index(c)] = f.density[i];
    }
    return g;
}

inline WeightPair reflect_pair(const WeightPair& pair) {
    return {reflect_field(pair.w), reflect_field(pair.v), pair.p};
}

namespace detail {

inline Box reflect_box(const GridDomain& d, const Box& b) {
    Box r = b;
    for (int a = 0; a < d.dim && a < 3; ++a) {
        Dyadic lo = Dyadic(d.origin[a]), hi = Dyadic(d.origin[a] + (1LL << d.width_exp));
        r.lo[a] = lo + hi - b.hi[a];
        r.hi[a] = lo + hi - b.lo[a];
    }
    return r;
}

inline ClassConstant reflect_witness(const GridDomain& d, ClassConstant c) {
    if (!c.has_witness) return c;
    c.witness.cube = reflect_box(d, c.witness.cube);
    c.witness.grid_dyadic = false;  // anchors no longer canonical after the flip
    for (auto& idx : c.witness.cells) {
        auto cc = d.coords(idx);
        for (int a = 0; a < d.dim; ++a) cc[a] = d.cells_axis - 1 - cc[a];
        idx = d.index(cc);
    }
    return c;
}

}  // namespace detail

/// Minus-sided restricted constant: E ranges inside Q^- instead of Q^+.
inline ClassConstant restricted_constant_minus(const WeightPair& pair, WeightFlavor flavor,
                                               ClassOptions opts = {}) {
    ClassConstant c = restricted_constant(reflect_pair(pair), flavor, opts);
    c.tag = std::string("restricted_minus_") + flavor_name(flavor);
    return detail::reflect_witness(pair.dom(), std::move(c));
}

inline ClassConstant muckenhoupt_constant_minus(const WeightPair& pair, WeightFlavor flavor,
                                                ClassOptions opts = {}) {
    ClassConstant c = muckenhoupt_constant(reflect_pair(pair), flavor, opts);
    c.tag = std::string("muckenhoupt_minus_") + flavor_name(flavor);
    return detail::reflect_witness(pair.dom(), std::move(c));
}

/// p = 1 minus-sided check: M^+ w <= C v pointwise.
inline ClassConstant a1_pointwise_check_minus(const WeightPair& pair, WeightFlavor flavor,
                                              ClassOptions opts = {}) {
    ClassConstant c = a1_pointwise_check(reflect_pair(pair), flavor, opts);
    c.tag = std::string("a1_pointwise_minus_") + flavor_name(flavor);
    return detail::reflect_witness(pair.dom(), std::move(c));
}

/// Independent re-evaluation of a witness (direct measures, no tables).
inline double replay_class_witness(const WeightPair& pair, const ClassConstant& cc) {
    if (!cc.has_witness) return 0.0;
    const GridDomain& d = pair.dom();
    double cellvol = d.cell_volume();
    if (cc.tag.rfind("restricted", 0) == 0) {
        double wq = measure(pair.w, cc.witness.cube, false);
        double vol_q = cc.witness.cube.volume();
        KahanSum ve;
        for (auto i : cc.witness.cells) ve.add(pair.v.density[i]);
        double vmass = ve.value() * cellvol;
        double evol = static_cast<double>(cc.witness.cells.size()) * cellvol;
        if (vmass == 0.0)
            return wq > 0.0 && evol > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        if (cc.p == 1.0) return ((wq / vol_q) * evol) / vmass;
        return (evol / vol_q) * std::pow(wq / vmass, 1.0 / cc.p);
    }
    if (cc.tag.rfind("muckenhoupt", 0) == 0) {
        double wq = measure(pair.w, cc.witness.cube, false);
        double vol_q = cc.witness.cube.volume();
        Box plus = plus_neighbor(cc.witness.cube);
        double dual_exp = 1.0 - pair.dual_exponent();
        WeightField dual(d);
        bool inf = false;
        Box pe = intersect(plus, d.extent());
        for (std::size_t i = 0; i < d.ncells; ++i) {
            double vc = pair.v.density[i];
            auto cb = d.cell_cube(d.coords(i)).box();
            if (intersect(cb, pe).is_empty()) continue;
            if (vc == 0.0) { inf = true; break; }
            dual.density[i] = std::pow(vc, dual_exp);
        }
        if (inf) return wq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        double dualsum = measure(dual, plus, false);
        return (wq / vol_q) * std::pow(dualsum / vol_q, pair.p - 1.0);
    }
    // a1 pointwise: witness is one cell
    std::size_t i = cc.witness.cells.at(0);
    MaximalResult minus = cc.flavor == WeightFlavor::Dyadic
                              ? dyadic_minus_maximal_oracle(pair.w)
                              : anchored_maximal_oracle(pair.w, -1, 0);
    double vc = pair.v.density[i];
    if (vc > 0.0) return minus.value[i] / vc;
    return minus.value[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace onesided
