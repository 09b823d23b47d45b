#pragma once

// Finite dyadic grids: a depth-L mesh over a box extent, cell sets as bit
// masks, nonnegative cell-constant weight fields, exact measure queries and
// summed-area tables for O(1) box sums.

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"

namespace onesided {

struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

/// Depth-L dyadic grid over [origin, origin + 2^width_exp)^dim.
/// Cells have side 2^-depth; origin coordinates are integers aligned to the
/// extent width so that every coarse dyadic cube tiles the extent exactly.
struct GridDomain {
    int dim = 1;
    int depth = 0;
    int width_exp = 0;
    std::array<long long, 3> origin{};

    long long cells_axis = 1;
    std::size_t ncells = 1;

    GridDomain() = default;
    GridDomain(int dim_, int depth_, int width_exp_ = 0,
               std::array<long long, 3> origin_ = {0, 0, 0})
        : dim(dim_), depth(depth_), width_exp(width_exp_), origin(origin_) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("GridDomain: dim must be 1..3");
        if (depth < 0 || width_exp < 0 || depth + width_exp > 24)
            throw std::invalid_argument("GridDomain: bad depth/width");
        long long align = 1LL << width_exp;
        for (int a = 0; a < dim; ++a)
            if (origin[a] % align != 0)
                throw std::invalid_argument("GridDomain: origin must align to the extent width");
        cells_axis = 1LL << (depth + width_exp);
        ncells = 1;
        for (int a = 0; a < dim; ++a) ncells *= static_cast<std::size_t>(cells_axis);
        if (ncells > (std::size_t{1} << 27))
            throw std::invalid_argument("GridDomain: too many cells");
    }

    bool operator==(const GridDomain& o) const {
        return dim == o.dim && depth == o.depth && width_exp == o.width_exp && origin == o.origin;
    }
    bool operator!=(const GridDomain& o) const { return !(*this == o); }

    double cell_volume() const { return std::ldexp(1.0, -dim * depth); }
    Dyadic cell_side() const { return level_side(depth); }
    int min_level() const { return -width_exp; }

    Box extent() const {
        Box b;
        b.dim = dim;
        for (int a = 0; a < dim; ++a) {
            b.lo[a] = Dyadic(origin[a]);
            b.hi[a] = Dyadic(origin[a] + (1LL << width_exp));
        }
        return b;
    }

    std::size_t index(const std::array<long long, 3>& c) const {
        std::size_t idx = 0;
        for (int a = dim - 1; a >= 0; --a) {
            assert(c[a] >= 0 && c[a] < cells_axis);
            idx = idx * static_cast<std::size_t>(cells_axis) + static_cast<std::size_t>(c[a]);
        }
        return idx;  // first coordinate fastest
    }
    std::array<long long, 3> coords(std::size_t idx) const {
        std::array<long long, 3> c{};
        for (int a = 0; a < dim; ++a) {
            c[a] = static_cast<long long>(idx % static_cast<std::size_t>(cells_axis));
            idx /= static_cast<std::size_t>(cells_axis);
        }
        return c;
    }

    /// The grid cell as a depth-level dyadic cube.
    DyadicCube cell_cube(const std::array<long long, 3>& c) const {
        DyadicCube q{dim, depth, {}};
        for (int a = 0; a < dim; ++a) q.anchor[a] = (origin[a] << depth) + c[a];
        return q;
    }
    DyPoint cell_anchor(const std::array<long long, 3>& c) const {
        DyPoint p{};
        for (int a = 0; a < dim; ++a) p[a] = Dyadic((origin[a] << depth) + c[a], depth);
        return p;
    }

    /// Coordinate -> cell units relative to the extent origin (x - o) * 2^depth.
    Dyadic to_cell_units(Dyadic x, int axis) const {
        return scale_pow2(x - Dyadic(origin[axis]), depth);
    }

    /// Cell span per axis of a level-k cube (k <= depth).
    long long cube_span(int level) const {
        assert(level <= depth && depth - level < 62);
        return 1LL << (depth - level);
    }

    /// Lower cell index of a grid-aligned cube; may be out of [0, cells_axis).
    std::array<long long, 3> cube_cell_start(const DyadicCube& q) const {
        assert(q.level >= min_level() && q.level <= depth);
        std::array<long long, 3> s{};
        for (int a = 0; a < dim; ++a)
            s[a] = (q.anchor[a] << (depth - q.level)) - (origin[a] << depth);
        return s;
    }

    bool cube_in_extent(const DyadicCube& q) const {
        if (q.level < min_level() || q.level > depth) return false;
        auto s = cube_cell_start(q);
        long long span = cube_span(q.level);
        for (int a = 0; a < dim; ++a)
            if (s[a] < 0 || s[a] + span > cells_axis) return false;
        return true;
    }
};

/// Measurable set as a cell-membership mask.
struct CellSet {
    GridDomain dom;
    std::vector<std::uint8_t> mask;

    CellSet() = default;
    explicit CellSet(const GridDomain& d) : dom(d), mask(d.ncells, 0) {}

    bool get(std::size_t i) const { return mask[i] != 0; }
    void set(std::size_t i, bool v = true) { mask[i] = v ? 1 : 0; }

    long long count() const {
        long long n = 0;
        for (auto m : mask) n += m;
        return n;
    }
    double volume() const { return static_cast<double>(count()) * dom.cell_volume(); }
    bool empty() const {
        for (auto m : mask)
            if (m) return false;
        return true;
    }

    /// Marks every cell of a grid-aligned cube inside the extent.
    void add_cube(const DyadicCube& q) {
        if (!dom.cube_in_extent(q)) throw std::invalid_argument("add_cube: cube leaves extent");
        auto s = dom.cube_cell_start(q);
        long long span = dom.cube_span(q.level);
        std::array<long long, 3> c{};
        for (long long z = 0; z < (dom.dim > 2 ? span : 1); ++z)
            for (long long y = 0; y < (dom.dim > 1 ? span : 1); ++y)
                for (long long x = 0; x < span; ++x) {
                    c[0] = s[0] + x;
                    if (dom.dim > 1) c[1] = s[1] + y;
                    if (dom.dim > 2) c[2] = s[2] + z;
                    set(dom.index(c));
                }
    }

    /// Marks the cells of a cell-aligned box (errors on misalignment).
    void add_box(const Box& b);
};

inline CellSet set_union(const CellSet& a, const CellSet& b) {
    if (a.dom != b.dom) throw std::invalid_argument("set_union: domain mismatch");
    CellSet r = a;
    for (std::size_t i = 0; i < r.mask.size(); ++i) r.mask[i] |= b.mask[i];
    return r;
}
inline CellSet set_intersect(const CellSet& a, const CellSet& b) {
    if (a.dom != b.dom) throw std::invalid_argument("set_intersect: domain mismatch");
    CellSet r = a;
    for (std::size_t i = 0; i < r.mask.size(); ++i) r.mask[i] &= b.mask[i];
    return r;
}
inline CellSet set_minus(const CellSet& a, const CellSet& b) {
    if (a.dom != b.dom) throw std::invalid_argument("set_minus: domain mismatch");
    CellSet r = a;
    for (std::size_t i = 0; i < r.mask.size(); ++i)
        if (b.mask[i]) r.mask[i] = 0;
    return r;
}
inline bool operator==(const CellSet& a, const CellSet& b) {
    return a.dom == b.dom && a.mask == b.mask;
}

/// Nonnegative cell-constant density.
struct WeightField {
    GridDomain dom;
    std::vector<double> density;

    WeightField() = default;
    explicit WeightField(const GridDomain& d, double value = 0.0)
        : dom(d), density(d.ncells, value) {
        if (value < 0) throw std::invalid_argument("WeightField: negative density");
    }

    void check_nonnegative() const {
        for (double v : density)
            if (!(v >= 0.0)) throw std::invalid_argument("WeightField: negative density");
    }
    double total_mass() const;
};

struct WeightPair {
    WeightField w;
    WeightField v;
    double p = 1.0;

    WeightPair() = default;
    WeightPair(WeightField w_, WeightField v_, double p_)
        : w(std::move(w_)), v(std::move(v_)), p(p_) {
        if (w.dom != v.dom) throw std::invalid_argument("WeightPair: domain mismatch");
        if (!(p >= 1.0)) throw std::invalid_argument("WeightPair: p must be >= 1");
    }
    const GridDomain& dom() const { return w.dom; }
    double dual_exponent() const { return p / (p - 1.0); }  // p', only for p > 1
};

/// w(E) = sum over set cells of density * cell volume (compensated).
inline double measure(const WeightField& f, const CellSet& e) {
    if (f.dom != e.dom) throw std::invalid_argument("measure: domain mismatch");
    KahanSum acc;
    for (std::size_t i = 0; i < f.density.size(); ++i)
        if (e.mask[i]) acc.add(f.density[i]);
    return acc.value() * f.dom.cell_volume();
}

inline double WeightField::total_mass() const {
    KahanSum acc;
    for (double v : density) acc.add(v);
    return acc.value() * dom.cell_volume();
}

namespace detail {

/// One axis segment of a fractional box: cells [lo, hi) weighted by `weight`
/// (overlap length in cell units; exact dyadic value).
struct AxisSegment {
    long long lo = 0, hi = 0;
    double weight = 1.0;
};

inline long long dy_floor(Dyadic x) {
    assert(x.num >= 0);
    return x.num >> x.exp2;
}
inline long long dy_ceil(Dyadic x) {
    assert(x.num >= 0);
    return (x.num + (1LL << x.exp2) - 1) >> x.exp2;
}

/// Splits the cell-unit range [xl, xr) (already clipped to [0, N]) into at
/// most three segments: partial low cell, full cell run, partial high cell.
inline int split_axis(Dyadic xl, Dyadic xr, AxisSegment out[3]) {
    if (!(xl < xr)) return 0;
    long long cl = dy_floor(xl);
    long long fr = dy_ceil(xl);
    long long fh = dy_floor(xr);
    int n = 0;
    if (fr > fh) {  // interior of a single cell
        out[n++] = {cl, cl + 1, (xr - xl).to_double()};
        return n;
    }
    if (fr > cl) out[n++] = {cl, cl + 1, (Dyadic(fr) - xl).to_double()};
    if (fh > fr) out[n++] = {fr, fh, 1.0};
    if (xr > Dyadic(fh)) out[n++] = {fh, fh + 1, (xr - Dyadic(fh)).to_double()};
    return n;
}

}  // namespace detail

/// Exact weighted volume of field over a dyadic box; boxes that leave the
/// extent measure only the intersection unless `strict`.
inline double measure(const WeightField& f, const Box& b, bool strict = false) {
    const GridDomain& d = f.dom;
    if (b.dim != d.dim) throw std::invalid_argument("measure: dimension mismatch");
    Box clipped = intersect(b, d.extent());
    if (strict && !(clipped == b))
        throw std::invalid_argument("measure: box leaves extent (strict)");
    if (clipped.is_empty()) return 0.0;

    detail::AxisSegment segs[3][3];
    int nseg[3] = {1, 1, 1};
    for (int a = 0; a < d.dim; ++a) {
        Dyadic xl = d.to_cell_units(clipped.lo[a], a);
        Dyadic xr = d.to_cell_units(clipped.hi[a], a);
        nseg[a] = detail::split_axis(xl, xr, segs[a]);
        if (nseg[a] == 0) return 0.0;
    }
    for (int a = d.dim; a < 3; ++a) segs[a][0] = {0, 1, 1.0};

    KahanSum acc;
    std::array<long long, 3> c{};
    for (int s2 = 0; s2 < (d.dim > 2 ? nseg[2] : 1); ++s2)
        for (int s1 = 0; s1 < (d.dim > 1 ? nseg[1] : 1); ++s1)
            for (int s0 = 0; s0 < nseg[0]; ++s0) {
                const auto& g0 = segs[0][s0];
                const auto& g1 = segs[1][s1];
                const auto& g2 = segs[2][s2];
                double wseg = g0.weight * g1.weight * g2.weight;
                for (long long z = g2.lo; z < (d.dim > 2 ? g2.hi : g2.lo + 1); ++z)
                    for (long long y = g1.lo; y < (d.dim > 1 ? g1.hi : g1.lo + 1); ++y)
                        for (long long x = g0.lo; x < g0.hi; ++x) {
                            c[0] = x;
                            if (d.dim > 1) c[1] = y;
                            if (d.dim > 2) c[2] = z;
                            acc.add(f.density[d.index(c)] * wseg);
                        }
            }
    return acc.value() * d.cell_volume();
}

/// Lebesgue measure of E intersected with a dyadic box (exact).
inline double measure(const CellSet& e, const Box& b) {
    WeightField ind(e.dom);
    for (std::size_t i = 0; i < e.mask.size(); ++i) ind.density[i] = e.mask[i] ? 1.0 : 0.0;
    return measure(ind, b);
}

inline void CellSet::add_box(const Box& b) {
    if (b.dim != dom.dim) throw std::invalid_argument("add_box: dimension mismatch");
    std::array<long long, 3> lo{}, hi{0, 0, 0};
    for (int a = 0; a < dom.dim; ++a) {
        Dyadic xl = dom.to_cell_units(b.lo[a], a);
        Dyadic xr = dom.to_cell_units(b.hi[a], a);
        if (!xl.is_integer() || !xr.is_integer())
            throw std::invalid_argument("add_box: box not cell-aligned");
        lo[a] = std::max(0LL, xl.num);
        hi[a] = std::min(dom.cells_axis, xr.num);
        if (lo[a] >= hi[a]) return;
    }
    std::array<long long, 3> c{};
    for (long long z = lo[2]; z < (dom.dim > 2 ? hi[2] : lo[2] + 1); ++z)
        for (long long y = lo[1]; y < (dom.dim > 1 ? hi[1] : lo[1] + 1); ++y)
            for (long long x = lo[0]; x < hi[0]; ++x) {
                c[0] = x;
                if (dom.dim > 1) c[1] = y;
                if (dom.dim > 2) c[2] = z;
                set(dom.index(c));
            }
}

/// Summed-area table over cell densities; box sums in O(2^dim).
struct SummedTable {
    GridDomain dom;
    std::vector<double> table;  // (N+1)^dim, first coordinate fastest

    SummedTable() = default;

    explicit SummedTable(const WeightField& f) { build(f.dom, f.density.data()); }
    explicit SummedTable(const CellSet& e) {
        std::vector<double> d(e.mask.size());
        for (std::size_t i = 0; i < e.mask.size(); ++i) d[i] = e.mask[i] ? 1.0 : 0.0;
        build(e.dom, d.data());
    }

    void build(const GridDomain& d, const double* cells) {
        dom = d;
        std::size_t np = static_cast<std::size_t>(d.cells_axis) + 1;
        std::size_t total = 1;
        for (int a = 0; a < d.dim; ++a) total *= np;
        table.assign(total, 0.0);

        std::size_t stride[3] = {1, np, np * np};
        // scatter cell values into the shifted positions
        std::array<long long, 3> c{};
        for (long long z = 0; z < (d.dim > 2 ? d.cells_axis : 1); ++z)
            for (long long y = 0; y < (d.dim > 1 ? d.cells_axis : 1); ++y)
                for (long long x = 0; x < d.cells_axis; ++x) {
                    c[0] = x; c[1] = y; c[2] = z;
                    std::size_t src = d.index(c);
                    std::size_t dst = (x + 1) * stride[0];
                    if (d.dim > 1) dst += (y + 1) * stride[1];
                    if (d.dim > 2) dst += (z + 1) * stride[2];
                    table[dst] = cells[src];
                }
        // cumulative sum along each axis in turn
        for (int a = 0; a < d.dim; ++a) {
            std::size_t lines = total / np;
            for (std::size_t line = 0; line < lines; ++line) {
                // decompose line index into the other-axis coordinates
                std::size_t rem = line, base = 0;
                for (int b = 0; b < d.dim; ++b) {
                    if (b == a) continue;
                    std::size_t cb = rem % np;
                    rem /= np;
                    base += cb * stride[b];
                }
                double run = 0.0;
                for (std::size_t i = 0; i < np; ++i) {
                    run += table[base + i * stride[a]];
                    table[base + i * stride[a]] = run;
                }
            }
        }
    }

    /// Sum of cell densities over [lo, hi) cell index ranges (unclamped; the
    /// caller guarantees 0 <= lo <= hi <= N).
    double cells_sum(const std::array<long long, 3>& lo,
                     const std::array<long long, 3>& hi) const {
        std::size_t np = static_cast<std::size_t>(dom.cells_axis) + 1;
        std::size_t stride[3] = {1, np, np * np};
        double acc = 0.0;
        int corners = 1 << dom.dim;
        for (int m = 0; m < corners; ++m) {
            std::size_t pos = 0;
            int sign = 1;
            for (int a = 0; a < dom.dim; ++a) {
                bool take_hi = (m >> a) & 1;
                long long v = take_hi ? hi[a] : lo[a];
                assert(v >= 0 && v <= dom.cells_axis);
                if (!take_hi) sign = -sign;
                pos += static_cast<std::size_t>(v) * stride[a];
            }
            acc += sign * table[pos];
        }
        return acc;
    }

    /// Same with clamping to the extent.
    double cells_sum_clamped(std::array<long long, 3> lo, std::array<long long, 3> hi) const {
        for (int a = 0; a < dom.dim; ++a) {
            lo[a] = std::clamp(lo[a], 0LL, dom.cells_axis);
            hi[a] = std::clamp(hi[a], 0LL, dom.cells_axis);
            if (lo[a] >= hi[a]) return 0.0;
        }
        return cells_sum(lo, hi);
    }

    /// Mass (density * volume) of a dyadic box clipped to the extent; exact
    /// for quantized densities, O(1) per query.
    double box_mass(const Box& b) const {
        Box clipped = intersect(b, dom.extent());
        if (clipped.is_empty()) return 0.0;
        detail::AxisSegment segs[3][3];
        int nseg[3] = {1, 1, 1};
        for (int a = 0; a < dom.dim; ++a) {
            Dyadic xl = dom.to_cell_units(clipped.lo[a], a);
            Dyadic xr = dom.to_cell_units(clipped.hi[a], a);
            nseg[a] = detail::split_axis(xl, xr, segs[a]);
            if (nseg[a] == 0) return 0.0;
        }
        double acc = 0.0;
        std::array<long long, 3> lo{}, hi{1, 1, 1};
        for (int s2 = 0; s2 < (dom.dim > 2 ? nseg[2] : 1); ++s2)
            for (int s1 = 0; s1 < (dom.dim > 1 ? nseg[1] : 1); ++s1)
                for (int s0 = 0; s0 < nseg[0]; ++s0) {
                    double w = segs[0][s0].weight;
                    lo[0] = segs[0][s0].lo; hi[0] = segs[0][s0].hi;
                    if (dom.dim > 1) {
                        w *= segs[1][s1].weight;
                        lo[1] = segs[1][s1].lo; hi[1] = segs[1][s1].hi;
                    }
                    if (dom.dim > 2) {
                        w *= segs[2][s2].weight;
                        lo[2] = segs[2][s2].lo; hi[2] = segs[2][s2].hi;
                    }
                    acc += w * cells_sum(lo, hi);
                }
        return acc * dom.cell_volume();
    }

    double total() const {
        std::array<long long, 3> lo{}, hi{};
        for (int a = 0; a < dom.dim; ++a) hi[a] = dom.cells_axis;
        for (int a = dom.dim; a < 3; ++a) hi[a] = 0;
        return cells_sum(lo, hi);
    }
};

/// Mean of the table's density over Q^+ with denominator |Q|; cubes whose
/// plus-neighbor leaves the extent contribute mass zero.
inline double cube_plus_mean(const SummedTable& t, const DyadicCube& q) {
    DyadicCube r = plus_neighbor(q);
    long long span = t.dom.cube_span(q.level);
    auto s = t.dom.cube_cell_start(r);
    std::array<long long, 3> hi{};
    for (int a = 0; a < t.dom.dim; ++a) {
        if (s[a] < 0 || s[a] + span > t.dom.cells_axis) return 0.0;
        hi[a] = s[a] + span;
    }
    double cells = 1.0;
    for (int a = 0; a < t.dom.dim; ++a) cells *= static_cast<double>(span);
    return t.cells_sum(s, hi) / cells;
}

inline double cube_minus_mean(const SummedTable& t, const DyadicCube& q) {
    DyadicCube r = minus_neighbor(q);
    long long span = t.dom.cube_span(q.level);
    auto s = t.dom.cube_cell_start(r);
    std::array<long long, 3> hi{};
    for (int a = 0; a < t.dom.dim; ++a) {
        if (s[a] < 0 || s[a] + span > t.dom.cells_axis) return 0.0;
        hi[a] = s[a] + span;
    }
    double cells = 1.0;
    for (int a = 0; a < t.dom.dim; ++a) cells *= static_cast<double>(span);
    return t.cells_sum(s, hi) / cells;
}

enum class CubeConstraint { Inside, PlusInside, MinusInside };

/// Visits every grid-dyadic cube of levels min_level..max_level satisfying
/// the constraint, exactly once, coarse levels first.
template <class Fn>
void for_each_dyadic_cube(const GridDomain& d, CubeConstraint cons, Fn&& fn,
                          int max_level = std::numeric_limits<int>::min()) {
    if (max_level == std::numeric_limits<int>::min()) max_level = d.depth;
    max_level = std::min(max_level, d.depth);
    for (int k = d.min_level(); k <= max_level; ++k) {
        long long cubes_axis = 1LL << (d.width_exp + k);
        std::array<long long, 3> base{};
        for (int a = 0; a < d.dim; ++a)
            base[a] = k >= 0 ? (d.origin[a] << k) : (d.origin[a] >> (-k));
        long long jlo = 0, jhi = cubes_axis;
        if (cons == CubeConstraint::PlusInside) jhi = cubes_axis - 1;
        if (cons == CubeConstraint::MinusInside) jlo = 1;
        if (jlo >= jhi) continue;
        std::array<long long, 3> j{};
        DyadicCube q{d.dim, k, {}};
        for (long long z = (d.dim > 2 ? jlo : 0); z < (d.dim > 2 ? jhi : 1); ++z)
            for (long long y = (d.dim > 1 ? jlo : 0); y < (d.dim > 1 ? jhi : 1); ++y)
                for (long long x = jlo; x < jhi; ++x) {
                    j[0] = x; j[1] = y; j[2] = z;
                    for (int a = 0; a < d.dim; ++a) q.anchor[a] = base[a] + j[a];
                    fn(q);
                }
    }
}

inline std::vector<DyadicCube> enumerate_dyadic_cubes(
    const GridDomain& d, CubeConstraint cons,
    int max_level = std::numeric_limits<int>::min()) {
    std::vector<DyadicCube> out;
    for_each_dyadic_cube(d, cons, [&](const DyadicCube& q) { out.push_back(q); }, max_level);
    return out;
}

}  // namespace onesided
