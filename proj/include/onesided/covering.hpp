#pragma once

// Constructive covering machinery: maximal level-set cube selection,
// geometric ratio bands, the depth decomposition of a disjoint cube family
// graded by strict containment of plus-neighbors, the per-band weighted
// mass bound certificate, and the 2D cover selection with half-side
// dilated squares and almost-disjoint mass carriers F_j.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "grid.hpp"
#include "maximal.hpp"
#include "weights.hpp"

namespace onesided {

struct QualifiedCube {
    DyadicCube cube;
    double plus_mass = 0.0;  // |E cap Q^+|
    double ratio = 0.0;      // |E cap Q^+| / |Q|
};

struct CubeFamily {
    GridDomain dom;
    double threshold = 0.0;  // selection t, or band mu
    std::vector<QualifiedCube> cubes;
    bool disjoint = true;
};

/// Maximal grid-dyadic cubes with |E cap Q^+|/|Q| > t, coarse-to-fine so the
/// selected cubes are pairwise disjoint and none has a qualifying ancestor.
inline CubeFamily select_level_set_cubes(const CellSet& e, double t) {
    if (!(t > 0)) throw std::invalid_argument("select_level_set_cubes: t must be positive");
    if (e.empty()) throw std::invalid_argument("select_level_set_cubes: empty set");
    const GridDomain& d = e.dom;
    SummedTable tab(e);

    CubeFamily fam;
    fam.dom = d;
    fam.threshold = t;

    std::function<void(const DyadicCube&)> visit = [&](const DyadicCube& q) {
        double mean = cube_plus_mean(tab, q);
        if (mean > t) {
            double cells = 1.0;
            for (int a = 0; a < d.dim; ++a) cells *= static_cast<double>(d.cube_span(q.level));
            fam.cubes.push_back({q, mean * cells * d.cell_volume(), mean});
            return;
        }
        if (q.level >= d.depth) return;
        if (d.dim == 1) {
            for (int i = 0; i < 2; ++i) {
                DyadicCube c{1, q.level + 1, {2 * q.anchor[0] + i}};
                visit(c);
            }
        } else if (d.dim == 2) {
            for (int i = 0; i < 4; ++i) visit(subsquare(q, i));
        } else {
            for (int i = 0; i < 8; ++i) {
                DyadicCube c{3, q.level + 1,
                             {2 * q.anchor[0] + (i & 1), 2 * q.anchor[1] + ((i >> 1) & 1),
                              2 * q.anchor[2] + ((i >> 2) & 1)}};
                visit(c);
            }
        }
    };

    // top-level cubes tile the extent at the coarsest representable level
    int k0 = d.min_level();
    long long caxis = 1LL << (d.width_exp + k0);
    std::array<long long, 3> base{};
    for (int a = 0; a < d.dim; ++a)
        base[a] = k0 >= 0 ? (d.origin[a] << k0) : (d.origin[a] >> (-k0));
    std::array<long long, 3> j{};
    for (long long z = 0; z < (d.dim > 2 ? caxis : 1); ++z)
        for (long long y = 0; y < (d.dim > 1 ? caxis : 1); ++y)
            for (long long x = 0; x < caxis; ++x) {
                j = {x, y, z};
                DyadicCube q{d.dim, k0, {}};
                for (int a = 0; a < d.dim; ++a) q.anchor[a] = base[a] + j[a];
                visit(q);
            }
    return fam;
}

/// Geometric bands C_k = {j : 2^k t < ratio_j <= 2^{k+1} t}, k >= 0; the
/// right endpoint is closed, so ratio exactly 2t lands in band 0.
inline std::vector<CubeFamily> band_partition(const CubeFamily& fam, double t) {
    std::vector<CubeFamily> bands;
    for (const auto& qc : fam.cubes) {
        if (!(qc.ratio > t))
            throw std::invalid_argument("band_partition: cube fails the threshold");
        int k = 0;
        while (qc.ratio > std::ldexp(t, k + 1)) ++k;
        if (static_cast<std::size_t>(k) >= bands.size()) {
            std::size_t old = bands.size();
            bands.resize(k + 1);
            for (std::size_t i = old; i < bands.size(); ++i) {
                bands[i].dom = fam.dom;
                bands[i].threshold = std::ldexp(t, static_cast<int>(i));
                bands[i].disjoint = fam.disjoint;
            }
        }
        bands[k].cubes.push_back(qc);
    }
    return bands;
}

/// Depth grading of a disjoint family: depth(j) counts the family members
/// whose plus-neighbor strictly contains Q_j^+. sigma_m unions the
/// plus-neighbors at depth m and F_m = E cap sigma_m.
struct DepthDecomposition {
    GridDomain dom;
    std::vector<QualifiedCube> cubes;
    std::vector<int> depth;
    std::vector<std::vector<std::size_t>> classes;  // index sets i_m
    std::vector<CellSet> sigma;
    std::vector<CellSet> fsets;
};

inline DepthDecomposition depth_decompose(const CubeFamily& fam, const CellSet& e) {
    if (!fam.disjoint) throw std::invalid_argument("depth_decompose: family must be disjoint");
    const GridDomain& d = fam.dom;
    DepthDecomposition dd;
    dd.dom = d;
    dd.cubes = fam.cubes;
    dd.depth.assign(fam.cubes.size(), 0);

    struct KeyHash {
        std::size_t operator()(const std::array<long long, 4>& k) const {
            std::size_t h = 1469598103934665603ull;
            for (long long v : k) {
                h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
                h *= 1099511628211ull;
            }
            return h;
        }
    };
    std::unordered_map<std::array<long long, 4>, std::size_t, KeyHash> plus_index;
    auto key_of = [](const DyadicCube& q) {
        return std::array<long long, 4>{q.level, q.anchor[0], q.anchor[1], q.anchor[2]};
    };
    for (std::size_t j = 0; j < fam.cubes.size(); ++j)
        plus_index[key_of(plus_neighbor(fam.cubes[j].cube))] = j;

    int maxdepth = 0;
    for (std::size_t j = 0; j < fam.cubes.size(); ++j) {
        DyadicCube pj = plus_neighbor(fam.cubes[j].cube);
        int cnt = 0;
        for (int k = pj.level - 1; k >= d.min_level(); --k)
            if (plus_index.count(key_of(pj.ancestor(k)))) ++cnt;
        dd.depth[j] = cnt;
        maxdepth = std::max(maxdepth, cnt);
    }

    dd.classes.assign(maxdepth + 1, {});
    for (std::size_t j = 0; j < fam.cubes.size(); ++j)
        dd.classes[dd.depth[j]].push_back(j);

    dd.sigma.reserve(dd.classes.size());
    dd.fsets.reserve(dd.classes.size());
    for (std::size_t m = 0; m < dd.classes.size(); ++m) {
        CellSet s(d);
        for (auto j : dd.classes[m]) s.add_cube(plus_neighbor(dd.cubes[j].cube));
        dd.fsets.push_back(set_intersect(s, e));
        dd.sigma.push_back(std::move(s));
    }
    return dd;
}

/// Per-band mass bound certificate. Step names:
///   containment  - for every j0, the deeper F-mass inside Q_{j0}^+ is at
///                  most 2^{n+1} |E cap Q_{j0}^+| (integer-exact),
///   thin_depth   - some depth m in (m0, m0 + 2^{n+2}] has
///                  |F_m cap Q_{j0}^+| < |E_{j0}^+| / 2,
///   survivor     - |Q_{j0}^+ minus F_{m0+2^{n+2}}| / |Q_{j0}| > mu/2,
///   mass_bound   - sum w(Q_j) <= 2^{n+p+2} B^p mu^{-p} v(E cap sigma_0).
struct BandCertificate {
    bool hypothesis_ok = true;
    bool step_containment = true;
    bool step_thin_depth = true;
    bool step_survivor = true;
    bool step_mass_bound = true;
    bool sigma0_is_union = true;
    double mu = 0.0, bracket = 0.0, p = 1.0;
    double lhs_w = 0.0, rhs_bound = 0.0;
    double worst_containment_slack = std::numeric_limits<double>::infinity();
    double worst_survivor_margin = std::numeric_limits<double>::infinity();
    std::string note;

    bool pass() const {
        return hypothesis_ok && step_containment && step_thin_depth && step_survivor &&
               step_mass_bound && sigma0_is_union;
    }
};

inline BandCertificate certify_band_mass_bound(const DepthDecomposition& dd, const CellSet& e,
                                               const WeightPair& pair, double mu,
                                               double bracket) {
    const GridDomain& d = dd.dom;
    BandCertificate cert;
    cert.mu = mu;
    cert.bracket = bracket;
    cert.p = pair.p;
    const int n = d.dim;
    const long long window = 1LL << (n + 2);  // 2^{n+2}
    const double cellvol = d.cell_volume();

    for (const auto& qc : dd.cubes)
        if (!(mu < qc.ratio && qc.ratio <= 2.0 * mu)) {
            cert.hypothesis_ok = false;
            cert.note = "hypothesis mu < ratio <= 2mu violated";
        }

    SummedTable etab(e);
    std::vector<SummedTable> ftabs;
    ftabs.reserve(dd.fsets.size());
    for (const auto& f : dd.fsets) ftabs.emplace_back(f);

    for (std::size_t j0 = 0; j0 < dd.cubes.size(); ++j0) {
        const DyadicCube plus = plus_neighbor(dd.cubes[j0].cube);
        auto lo = d.cube_cell_start(plus);
        long long span = d.cube_span(plus.level);
        std::array<long long, 3> hi{};
        for (int a = 0; a < n; ++a) hi[a] = lo[a] + span;
        double cube_cells = 1.0;
        for (int a = 0; a < n; ++a) cube_cells *= static_cast<double>(span);

        long long e_cnt = static_cast<long long>(etab.cells_sum(lo, hi));
        int m0 = dd.depth[j0];
        long long deep_sum = 0;
        for (std::size_t m = m0 + 1; m < dd.fsets.size(); ++m)
            deep_sum += static_cast<long long>(ftabs[m].cells_sum(lo, hi));

        long long rhs_cnt = (1LL << (n + 1)) * e_cnt;
        if (deep_sum > rhs_cnt) cert.step_containment = false;
        cert.worst_containment_slack =
            std::min(cert.worst_containment_slack, static_cast<double>(rhs_cnt - deep_sum) * cellvol);

        bool thin = false;
        for (long long m = m0 + 1; m <= m0 + window; ++m) {
            long long cnt = m < static_cast<long long>(dd.fsets.size())
                                ? static_cast<long long>(ftabs[m].cells_sum(lo, hi))
                                : 0;
            if (2 * cnt < e_cnt) { thin = true; break; }
        }
        if (!thin) cert.step_thin_depth = false;

        long long idx = m0 + window;
        long long fin_cnt = idx < static_cast<long long>(dd.fsets.size())
                                ? static_cast<long long>(ftabs[idx].cells_sum(lo, hi))
                                : 0;
        double survivor_ratio =
            static_cast<double>(static_cast<long long>(cube_cells) - fin_cnt) / cube_cells;
        if (!(survivor_ratio > mu / 2.0)) cert.step_survivor = false;
        cert.worst_survivor_margin =
            std::min(cert.worst_survivor_margin, survivor_ratio - mu / 2.0);
    }

    // final bound: sum of w(Q_j) against the band budget
    SummedTable wt(pair.w);
    KahanSum lhs;
    CellSet uni(d);
    for (const auto& qc : dd.cubes) {
        auto lo = d.cube_cell_start(qc.cube);
        long long span = d.cube_span(qc.cube.level);
        std::array<long long, 3> hi{};
        for (int a = 0; a < n; ++a) hi[a] = lo[a] + span;
        lhs.add(wt.cells_sum(lo, hi));
        uni.add_cube(plus_neighbor(qc.cube));
    }
    cert.lhs_w = lhs.value() * cellvol;
    if (!dd.sigma.empty()) cert.sigma0_is_union = (dd.sigma[0] == uni);
    double v_es0 = dd.sigma.empty() ? 0.0 : measure(pair.v, set_intersect(e, dd.sigma[0]));
    double factor = std::pow(2.0, n + pair.p + 2.0);
    cert.rhs_bound = factor * std::pow(bracket, pair.p) * std::pow(mu, -pair.p) * v_es0;
    if (!(cert.lhs_w <= cert.rhs_bound * (1.0 + 1e-12) ||
          cert.rhs_bound == std::numeric_limits<double>::infinity()))
        cert.step_mass_bound = false;
    return cert;
}

/// One admissible input to the 2D cover selection: a square of dyadic size
/// with `point` as its upper-right corner.
struct CoverInput {
    DyPoint point{};
    Box square;
};

struct CoverCertificate {
    bool inputs_ok = true;       // dyadic size, corner position, t/4 hypothesis
    bool coverage = true;        // every input point inside a selected dilation
    bool no_containment = true;  // selected dilations are pairwise incomparable
    bool tilde_plus_lower = true;  // t/4 < |E cap (Q~)^+| / |Q| on selection
    bool f_mass = true;            // t/8 < |E cap F_j| / |Q_j| where built
    int max_f_overlap = 0;
    int topped_up = 0;  // cells re-shared to keep the F mass bound
    std::map<int, int> same_size_overlap;  // size exponent -> max overlap
    std::string failure;

    bool pass() const {
        return inputs_ok && coverage && no_containment && tilde_plus_lower && f_mass;
    }
};

struct CoverPiece {
    std::size_t input;
    Box square, tilde, tilde_plus;
    int size_exp = 0;
    CellSet cover_cells;  // cells whose anchor lies in the closed dilation
    CellSet fset;
    bool has_fset = false;
    bool cap_ok = false;  // |E cap (Q~)^+| / |Q| <= 8t
    double e_tilde_plus = 0.0;
};

struct CoverSelection {
    std::vector<CoverPiece> chosen;
    CoverCertificate cert;
    double overlap_bound = 0.0;  // observed max of sum chi_{F_j}
};

namespace detail {

inline bool dyadic_size_square(const Box& b, int& size_exp) {
    if (!b.is_square()) return false;
    Dyadic s = b.side(0);
    if (s.num <= 0) return false;
    // normalized power of two: mantissa 1 (s = 2^-e) or 2^k (e = 0)
    if (s.num == 1) { size_exp = s.exp2; return true; }
    if (s.exp2 == 0 && (s.num & (s.num - 1)) == 0) {
        int k = 0;
        while ((1LL << k) < s.num) ++k;
        size_exp = -k;
        return true;
    }
    return false;
}

/// Cells whose anchor lies in the closure of `b`, as a cell set.
inline CellSet cells_with_anchor_in_closure(const GridDomain& d, const Box& b) {
    CellSet s(d);
    std::array<long long, 3> lo{}, hi{};
    for (int a = 0; a < d.dim; ++a) {
        Dyadic xl = d.to_cell_units(b.lo[a], a);
        Dyadic xr = d.to_cell_units(b.hi[a], a);
        long long cl = xl.num >= 0 ? ((xl.num + (1LL << xl.exp2) - 1) >> xl.exp2)
                                   : -((-xl.num) >> xl.exp2);
        long long cr = xr.num >= 0 ? (xr.num >> xr.exp2)
                                   : -(((-xr.num) + (1LL << xr.exp2) - 1) >> xr.exp2);
        lo[a] = std::max(0LL, cl);
        hi[a] = std::min(d.cells_axis - 1, cr);
        if (lo[a] > hi[a]) return s;
    }
    std::array<long long, 3> c{};
    for (long long y = lo[1]; y <= (d.dim > 1 ? hi[1] : lo[1]); ++y)
        for (long long x = lo[0]; x <= hi[0]; ++x) {
            c[0] = x;
            if (d.dim > 1) c[1] = y;
            s.set(d.index(c));
        }
    return s;
}

}  // namespace detail

/// Greedy 2D cover selection: inputs processed by decreasing side (ties by
/// anchor), a square is skipped when its point is already covered by a
/// selected dilation or its dilation sits inside a selected one. The mass
/// carriers F_j take unclaimed E-cells first, largest squares first, and
/// re-share already claimed cells only when the t/8 mass bound needs it.
inline CoverSelection select_cover_2d(const GridDomain& d, const std::vector<CoverInput>& inputs,
                                      const CellSet& e, double t, int quarter = 2) {
    if (d.dim != 2) throw std::invalid_argument("select_cover_2d: dim must be 2");
    if (quarter < 1 || quarter > 3) throw std::invalid_argument("select_cover_2d: quarter in 1..3");
    if (!(t > 0)) throw std::invalid_argument("select_cover_2d: t must be positive");

    CoverSelection sel;
    CoverCertificate& cert = sel.cert;

    // validate inputs
    std::vector<int> size_exp(inputs.size(), 0);
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        const auto& in = inputs[j];
        if (!detail::dyadic_size_square(in.square, size_exp[j])) {
            cert.inputs_ok = false;
            cert.failure = "input " + std::to_string(j) + ": not a dyadic-size square";
            continue;
        }
        if (in.square.hi[0] != in.point[0] || in.square.hi[1] != in.point[1]) {
            cert.inputs_ok = false;
            cert.failure = "input " + std::to_string(j) + ": point is not the upper-right corner";
            continue;
        }
        double hyp = measure(e, plus_quarter(in.square, quarter)) / in.square.volume();
        if (!(t / 4.0 < hyp)) {
            cert.inputs_ok = false;
            cert.failure = "input " + std::to_string(j) + ": t/4 hypothesis fails";
        }
    }

    std::vector<std::size_t> order(inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (size_exp[a] != size_exp[b]) return size_exp[a] < size_exp[b];  // larger side first
        for (int ax = 0; ax < 2; ++ax) {
            if (inputs[a].square.lo[ax] != inputs[b].square.lo[ax])
                return inputs[a].square.lo[ax] < inputs[b].square.lo[ax];
        }
        return a < b;
    });

    std::vector<Box> tildes;
    for (std::size_t j : order) {
        Box tj = cover_dilation(inputs[j].square, quarter);
        bool skip = false;
        for (std::size_t k = 0; k < sel.chosen.size() && !skip; ++k) {
            if (point_in_closed(sel.chosen[k].tilde, inputs[j].point)) skip = true;
            else if (contains(sel.chosen[k].tilde, tj)) skip = true;
        }
        if (skip) continue;
        CoverPiece piece;
        piece.input = j;
        piece.square = inputs[j].square;
        piece.tilde = tj;
        piece.tilde_plus = plus_neighbor(tj);
        piece.size_exp = size_exp[j];
        piece.cover_cells = detail::cells_with_anchor_in_closure(d, tj);
        sel.chosen.push_back(std::move(piece));
    }

    // conclusions
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        bool covered = false;
        for (const auto& piece : sel.chosen)
            if (point_in_closed(piece.tilde, inputs[j].point)) { covered = true; break; }
        if (!covered) {
            cert.coverage = false;
            cert.failure = "point " + std::to_string(j) + " uncovered";
        }
    }
    for (std::size_t a = 0; a < sel.chosen.size(); ++a)
        for (std::size_t b = 0; b < sel.chosen.size(); ++b)
            if (a != b && contains(sel.chosen[b].tilde, sel.chosen[a].tilde)) {
                cert.no_containment = false;
                cert.failure = "selected dilation contained in another";
            }

    for (auto& piece : sel.chosen) {
        piece.e_tilde_plus = measure(e, piece.tilde_plus);
        double q = piece.square.volume();
        if (!(t / 4.0 < piece.e_tilde_plus / q)) {
            cert.tilde_plus_lower = false;
            cert.failure = "t/4 bound on dilation plus-neighbor fails";
        }
        piece.cap_ok = piece.e_tilde_plus / q <= 8.0 * t;
    }

    // same-size overlap of the dilations, observed on cell anchors
    {
        std::map<int, std::vector<int>> counts;
        for (const auto& piece : sel.chosen) {
            auto& cnt = counts[piece.size_exp];
            if (cnt.empty()) cnt.assign(d.ncells, 0);
            for (std::size_t i = 0; i < d.ncells; ++i)
                if (piece.cover_cells.mask[i]) ++cnt[i];
        }
        for (auto& [s, cnt] : counts) {
            int mx = 0;
            for (int c : cnt) mx = std::max(mx, c);
            cert.same_size_overlap[s] = mx;
        }
    }

    // F_j construction: first-claim greedy in selection (size-descending)
    // order, re-sharing claimed cells only to restore the t/8 bound.
    std::vector<int> claims(d.ncells, 0);
    const double cellvol = d.cell_volume();
    for (auto& piece : sel.chosen) {
        if (!piece.cap_ok) continue;
        // the fset must be an exact cell union; sub-cell dilations are not
        // constructed (the harness truncates sizes so this cannot trigger)
        Dyadic cu0 = d.to_cell_units(piece.tilde_plus.lo[0], 0);
        Dyadic cu1 = d.to_cell_units(piece.tilde_plus.lo[1], 1);
        if (!cu0.is_integer() || !cu1.is_integer()) continue;

        piece.fset = CellSet(d);
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.ncells; ++i) {
            if (!e.mask[i]) continue;
            auto cb = d.cell_cube(d.coords(i)).box();
            if (contains(piece.tilde_plus, cb)) members.push_back(i);
        }
        double qvol = piece.square.volume();
        double need = t / 8.0 * qvol;
        double mass = 0.0;
        for (auto i : members)
            if (claims[i] == 0) { piece.fset.set(i); mass += cellvol; }
        if (!(mass > need)) {
            std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
                if (claims[x] != claims[y]) return claims[x] < claims[y];
                return x < y;
            });
            for (auto i : members) {
                if (mass > need) break;
                if (!piece.fset.get(i)) {
                    piece.fset.set(i);
                    mass += cellvol;
                    ++cert.topped_up;
                }
            }
        }
        piece.has_fset = true;
        for (std::size_t i = 0; i < d.ncells; ++i)
            if (piece.fset.mask[i]) ++claims[i];
        if (!(t / 8.0 < mass / qvol)) {
            cert.f_mass = false;
            cert.failure = "t/8 mass bound unreachable";
        }
    }
    int mx = 0;
    for (int c : claims) mx = std::max(mx, c);
    cert.max_f_overlap = mx;
    sel.overlap_bound = static_cast<double>(mx);
    return sel;
}

}  // namespace onesided
