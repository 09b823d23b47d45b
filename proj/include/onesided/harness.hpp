#pragma once

// End-to-end weak-type verification.
//
// The dyadic route checks the explicit bound
//     w({M^{+,d} chi_E > t}) <= 2^{n+p+2}/(1 - 2^-p) * B^p * t^-p * v(E)
// with B the dyadic restricted constant, and certifies every constructive
// step (maximal cube selection, ratio bands, depth decomposition, per-band
// mass bound) on the instance. The planar route drives the 2D anchored
// operators through the cover selection and assembles its bound from
// observed, per-instance factors; every factor is certified exactly before
// it enters the product.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "covering.hpp"
#include "generators.hpp"
#include "grid.hpp"
#include "maximal.hpp"
#include "weights.hpp"

namespace onesided {

struct HarnessOptions {
    int threads = 0;
    bool certify_bands = true;   // run the per-band certificates
    bool full_necessity = false; // sweep every qualifying cube, not just the extremal one
};

inline double weak_type_constant(int dim, double p) {
    return std::pow(2.0, dim + p + 2.0) / (1.0 - std::pow(2.0, -p));
}

struct WeakTypePoint {
    double t = 0;
    double lhs = 0, rhs = 0, ratio = 0;
    bool vacuous = false, pass = true;
    double family_w_sum = 0;
    std::size_t family_size = 0;
    int bands = 0;
    CubeFamily family;  // selected maximal cubes, kept for replay
};

struct DyadicWeakTypeReport {
    double p = 1;
    double constant_factor = 0;  // 2^{n+p+2}/(1-2^-p)
    ClassConstant bracket;
    std::vector<WeakTypePoint> points;
    std::vector<BandCertificate> certificates;
    bool union_matches_level_set = true;
    bool family_sum_matches = true;
    bool pass = true;
};

inline DyadicWeakTypeReport verify_dyadic_weak_type(const WeightPair& pair, const CellSet& e,
                                                    std::vector<double> ts = {},
                                                    HarnessOptions opts = {}) {
    const GridDomain& d = pair.dom();
    if (e.dom != d) throw std::invalid_argument("verify_dyadic_weak_type: domain mismatch");
    if (ts.empty()) ts = default_t_sweep(d);

    DyadicWeakTypeReport rep;
    rep.p = pair.p;
    rep.constant_factor = weak_type_constant(d.dim, pair.p);
    rep.bracket = restricted_constant(pair, WeightFlavor::Dyadic, {opts.threads});

    MaximalOptions mo;
    mo.threads = opts.threads;
    MaximalResult m = dyadic_plus_maximal(e, mo);
    double ve = measure(pair.v, e);

    for (double t : ts) {
        WeakTypePoint pt;
        pt.t = t;
        CellSet ls = level_set(m, t);
        pt.lhs = measure(pair.w, ls);
        if (!rep.bracket.finite()) {
            pt.vacuous = true;
            pt.rhs = std::numeric_limits<double>::infinity();
        } else {
            pt.rhs = rep.constant_factor * std::pow(rep.bracket.value, pair.p) *
                     std::pow(t, -pair.p) * ve;
            pt.ratio = pt.rhs > 0 ? pt.lhs / pt.rhs : (pt.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
            pt.pass = pt.lhs <= pt.rhs * (1.0 + 1e-12);
        }

        if (!e.empty() && !ls.empty()) {
            CubeFamily fam = select_level_set_cubes(e, t);
            pt.family_size = fam.cubes.size();
            CellSet uni(d);
            KahanSum wsum;
            SummedTable wt(pair.w);
            for (const auto& qc : fam.cubes) {
                uni.add_cube(qc.cube);
                auto lo = d.cube_cell_start(qc.cube);
                long long span = d.cube_span(qc.cube.level);
                std::array<long long, 3> hi{};
                for (int a = 0; a < d.dim; ++a) hi[a] = lo[a] + span;
                wsum.add(wt.cells_sum(lo, hi));
            }
            pt.family_w_sum = wsum.value() * d.cell_volume();
            if (!(uni == ls)) rep.union_matches_level_set = false;
            double scale = std::max(1.0, std::abs(pt.lhs));
            if (std::abs(pt.family_w_sum - pt.lhs) > 1e-12 * scale)
                rep.family_sum_matches = false;

            if (opts.certify_bands && rep.bracket.finite()) {
                auto bands = band_partition(fam, t);
                pt.bands = static_cast<int>(bands.size());
                for (std::size_t k = 0; k < bands.size(); ++k) {
                    if (bands[k].cubes.empty()) continue;
                    DepthDecomposition dd = depth_decompose(bands[k], e);
                    BandCertificate cert = certify_band_mass_bound(
                        dd, e, pair, std::ldexp(t, static_cast<int>(k)), rep.bracket.value);
                    if (!cert.pass()) rep.pass = false;
                    rep.certificates.push_back(std::move(cert));
                }
            }
            pt.family = std::move(fam);
        }
        if (!pt.pass) rep.pass = false;
        rep.points.push_back(pt);
    }
    if (!rep.union_matches_level_set || !rep.family_sum_matches) rep.pass = false;
    return rep;
}

struct NecessityReport {
    WeightFlavor flavor = WeightFlavor::Dyadic;
    double p = 1;
    double bracket = 0;
    bool bracket_infinite = false;
    double cweak = 0;      // best measured weak-type ratio lhs * t^p / v(E)
    double factor = 2;     // 2 for the dyadic family, 8 for anchored squares
    double bound = 0;      // factor * cweak^{1/p}
    bool containment_ok = true;
    std::size_t cubes_checked = 0;
    bool pass = true;
};

/// Quantitative necessity: the witness set of the restricted constant makes
/// the level set swallow its cube, so the bracket is bounded by
/// factor * cweak^{1/p} with cweak measured from actual level sets.
inline NecessityReport verify_necessity(const WeightPair& pair, WeightFlavor flavor,
                                        HarnessOptions opts = {}) {
    const GridDomain& d = pair.dom();
    NecessityReport rep;
    rep.flavor = flavor;
    rep.p = pair.p;
    rep.factor = flavor == WeightFlavor::Dyadic ? 2.0 : 8.0;

    ClassConstant b = restricted_constant(pair, flavor, {opts.threads});
    rep.bracket = b.value;
    if (!b.finite()) {
        // unbounded bracket: the witness pair itself exhibits an unbounded
        // weak-type ratio (v-mass zero behind positive w-mass)
        rep.bracket_infinite = true;
        rep.cweak = std::numeric_limits<double>::infinity();
        rep.bound = std::numeric_limits<double>::infinity();
        return rep;
    }
    if (!b.has_witness || b.witness.cells.empty()) {
        rep.cweak = 0;
        rep.bound = 0;
        rep.pass = b.value <= 0;
        return rep;
    }

    std::vector<int> plus_sizes;
    for (int s = d.min_level() - 1; s <= d.depth; ++s) plus_sizes.push_back(s);

    auto run_pair = [&](const Box& cube, const std::vector<std::size_t>& cells) -> double {
        CellSet eset(d);
        for (auto i : cells) eset.set(i);
        double evol = static_cast<double>(cells.size()) * d.cell_volume();
        double qvol = cube.volume();
        double t = evol / (rep.factor * qvol);
        MaximalOptions mo;
        mo.threads = opts.threads;
        MaximalResult m = flavor == WeightFlavor::Dyadic
                              ? dyadic_plus_maximal(eset, mo)
                              : anchored_plus_maximal(eset, plus_sizes, mo);
        CellSet ls = level_set(m, t);
        CellSet qcells(d);
        qcells.add_box(cube);
        for (std::size_t i = 0; i < d.ncells; ++i)
            if (qcells.mask[i] && !ls.mask[i]) rep.containment_ok = false;
        double ve = 0;
        for (auto i : cells) ve += pair.v.density[i];
        ve *= d.cell_volume();
        double lhs = measure(pair.w, ls);
        if (ve == 0) return lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        return lhs * std::pow(t, pair.p) / ve;
    };

    rep.cweak = run_pair(b.witness.cube, b.witness.cells);
    rep.cubes_checked = 1;

    if (opts.full_necessity && flavor == WeightFlavor::Dyadic && d.ncells <= 4096) {
        SummedTable wt(pair.w);
        detail::for_each_qualifying_cube(d, flavor, std::numeric_limits<int>::min(),
                                         [&](const detail::QualCube& c) {
            CubeExtremal ex = restricted_cube_extremal(pair, wt, c);
            if (ex.cells.empty()) return;
            rep.cweak = std::max(rep.cweak, run_pair(detail::qual_cube_box(d, c), ex.cells));
            ++rep.cubes_checked;
        });
    }

    rep.bound = rep.factor * std::pow(rep.cweak, 1.0 / pair.p);
    rep.pass = rep.containment_ok && rep.bracket <= rep.bound * (1.0 + 1e-9);
    return rep;
}

struct PlanarPiece {
    double t = 0;
    int quarter = 2;
    std::size_t omega_cells = 0;
    double lhs = 0;
    bool sandwich_ok = true;  // t/4 lower and 8t upper bounds on every cell
    CoverCertificate cover_cert;
    std::vector<CoverPiece> chosen;  // selected squares with their F sets
    std::size_t selected = 0;
    double overlap_const = 0;
    double geom_factor = 0;   // max (|T_j| / |Q_j|)^p over the cover
    double beta_tilde = 0;    // observed restricted ratio on the cover pairs
    double assembled_constant = 0;  // overlap * 8^p * geom
    double rhs = 0, ratio = 0;
    bool chain_ok = true;
    bool pass = true;
};

struct PlanarReport {
    double p = 1;
    Dyadic xi;  // size truncation (cell side)
    ClassConstant bracket_anchored;
    ClassConstant bracket_dyadic;
    std::vector<PlanarPiece> pieces;
    bool pass = true;
};

/// 2D weak-type verification through the cover selection. For each t and
/// each quarter the omega set {M_xi^{+i} > t, M^+ <= 2t} is built with the
/// anchored operator given one doubling beyond the extent so that every
/// witness square can double; each omega cell is certified against the t/4
/// and 8t sandwich; the greedy cover runs; and the final bound uses only
/// factors observed and certified on the instance.
inline PlanarReport verify_2d_weak_type(const WeightPair& pair, const CellSet& e,
                                        std::vector<double> ts = {}, HarnessOptions opts = {}) {
    const GridDomain& d = pair.dom();
    if (d.dim != 2) throw std::invalid_argument("verify_2d_weak_type: dim must be 2");
    if (e.dom != d) throw std::invalid_argument("verify_2d_weak_type: domain mismatch");
    if (ts.empty()) ts = default_t_sweep(d);

    PlanarReport rep;
    rep.p = pair.p;
    rep.xi = d.cell_side();
    rep.bracket_anchored = restricted_constant(pair, WeightFlavor::Anchored, {opts.threads});
    rep.bracket_dyadic = restricted_constant(pair, WeightFlavor::Dyadic, {opts.threads});

    std::vector<int> plus_sizes;
    for (int s = d.min_level() - 1; s <= d.depth; ++s) plus_sizes.push_back(s);

    MaximalOptions mo;
    mo.threads = opts.threads;
    MaximalResult mplus = anchored_plus_maximal(e, plus_sizes, mo);
    double ve = measure(pair.v, e);

    for (double t : ts) {
        for (int quarter = 1; quarter <= 3; ++quarter) {
            PlanarPiece piece;
            piece.t = t;
            piece.quarter = quarter;

            MaximalOptions wo = mo;
            wo.witnesses = true;
            MaximalResult msub = subsquare_maximal_2d(e, quarter, d.cell_side(), {}, wo);
            CellSet omega = level_omega(msub, mplus, t);
            piece.omega_cells = static_cast<std::size_t>(omega.count());
            piece.lhs = measure(pair.w, omega);
            if (omega.empty()) {
                rep.pieces.push_back(std::move(piece));
                continue;
            }

            std::vector<CoverInput> inputs;
            std::vector<std::size_t> omega_idx;
            for (std::size_t i = 0; i < d.ncells; ++i) {
                if (!omega.mask[i]) continue;
                const CubeWitness& w = msub.witness[i];
                Dyadic h = level_side(w.level);
                DyPoint x = d.cell_anchor(d.coords(i));
                Box q = make_box2(x[0] - h, x[1] - h, x[0], x[1]);
                // sandwich: the witness mean gives the t/4 lower bound and
                // the capped plus-operator the 8t upper bounds
                double qvol = q.volume();
                double r_low = measure(e, plus_quarter(q, quarter)) / qvol;
                Box tilde = cover_dilation(q, quarter);
                double r_qcap = measure(e, plus_quarter(tilde, quarter)) / qvol;
                double r_cap = measure(e, plus_neighbor(tilde)) / qvol;
                if (!(t / 4.0 < r_low) || !(r_qcap <= 8.0 * t) || !(r_cap <= 8.0 * t))
                    piece.sandwich_ok = false;
                inputs.push_back({x, q});
                omega_idx.push_back(i);
            }

            CoverSelection cover = select_cover_2d(d, inputs, e, t, quarter);
            piece.cover_cert = cover.cert;
            piece.selected = cover.chosen.size();
            piece.overlap_const = cover.overlap_bound;

            // assemble the bound from observed factors
            bool covered_ok = true;
            CellSet covered(d);
            for (const auto& cp : cover.chosen) covered = set_union(covered, cp.cover_cells);
            for (std::size_t i = 0; i < d.ncells; ++i)
                if (omega.mask[i] && !covered.mask[i]) covered_ok = false;
            if (!covered_ok) piece.chain_ok = false;

            double geom = 0.0, beta = 0.0;
            KahanSum wT_sum, vF_sum;
            CellSet funion(d);
            for (const auto& cp : cover.chosen) {
                double wT = measure(pair.w, cp.cover_cells);
                double Tvol = cp.cover_cells.volume();
                double qvol = cp.square.volume();
                wT_sum.add(wT);
                if (!cp.has_fset) { piece.chain_ok = false; continue; }
                double fvol = cp.fset.volume();
                double vF = measure(pair.v, cp.fset);
                vF_sum.add(vF);
                funion = set_union(funion, cp.fset);
                geom = std::max(geom, std::pow(Tvol / qvol, pair.p));
                double bj;
                if (vF == 0.0)
                    bj = fvol > 0 ? std::numeric_limits<double>::infinity() : 0.0;
                else
                    bj = (fvol / Tvol) * std::pow(wT / vF, 1.0 / pair.p);
                beta = std::max(beta, bj);
                if (!(t / 8.0 < fvol / qvol)) piece.chain_ok = false;
            }
            if (piece.lhs > wT_sum.value() * (1.0 + 1e-12)) piece.chain_ok = false;
            double v_funion = measure(pair.v, funion);
            if (vF_sum.value() > cover.overlap_bound * v_funion * (1.0 + 1e-12) &&
                std::isfinite(vF_sum.value()))
                piece.chain_ok = false;

            piece.geom_factor = geom;
            piece.beta_tilde = beta;
            piece.assembled_constant =
                cover.overlap_bound * std::pow(8.0, pair.p) * geom;
            piece.rhs = piece.assembled_constant * std::pow(beta, pair.p) *
                        std::pow(t, -pair.p) * ve;
            piece.ratio = piece.rhs > 0 ? piece.lhs / piece.rhs
                                        : (piece.lhs > 0 ? std::numeric_limits<double>::infinity()
                                                         : 0.0);
            if (!(piece.lhs <= piece.rhs * (1.0 + 1e-12))) piece.chain_ok = false;
            piece.chosen = std::move(cover.chosen);
            piece.pass = piece.sandwich_ok && piece.cover_cert.pass() && piece.chain_ok;
            if (!piece.pass) rep.pass = false;
            rep.pieces.push_back(std::move(piece));
        }
    }
    return rep;
}

struct SharpnessReport {
    std::uint64_t seed = 0;
    int budget = 0;
    double p = 1;
    double best_objective = 0;   // lhs * t^p / (B^p v(E))
    double best_normalized = 0;  // divided by the explicit constant
    double best_t = 0;
    double bracket_at_best = 0;
    std::vector<double> w_density, v_density;
    std::vector<std::uint8_t> e_mask;
    bool pass = true;  // every trial stayed below the proven bound
};

/// Randomized hill-climb over (w, v, E, t) for the largest weak-type ratio
/// relative to B^p t^-p v(E); deterministic for a fixed seed.
inline SharpnessReport sharpness_search(const GridDomain& d, double p, int budget,
                                        std::uint64_t seed) {
    if (budget < 1) throw std::invalid_argument("sharpness_search: budget >= 1");
    Rng rng(seed);
    SharpnessReport rep;
    rep.seed = seed;
    rep.budget = budget;
    rep.p = p;
    double kc = weak_type_constant(d.dim, p);
    std::vector<double> ts = default_t_sweep(d);

    WeightPair pair = gen_pair(d, "loguniform", rng, p);
    CellSet e = gen_set(d, "random", rng, 0.3);
    if (e.empty()) e.set(0);

    auto evaluate = [&](const WeightPair& pr, const CellSet& es, double& best_t) -> double {
        ClassConstant b = restricted_constant(pr, WeightFlavor::Dyadic);
        if (!b.finite() || b.value == 0.0) return -1.0;
        double venorm = measure(pr.v, es);
        if (venorm == 0.0) return -1.0;
        MaximalResult m = dyadic_plus_maximal(es);
        double best = -1.0;
        for (double t : ts) {
            double lhs = measure(pr.w, level_set(m, t));
            double obj = lhs * std::pow(t, p) / (std::pow(b.value, p) * venorm);
            if (obj > best) { best = obj; best_t = t; }
        }
        rep.bracket_at_best = b.value;
        return best;
    };

    double best_t = ts.front();
    double best = evaluate(pair, e, best_t);
    WeightPair cand = pair;
    CellSet ecand = e;
    for (int it = 0; it < budget; ++it) {
        cand = pair;
        ecand = e;
        int move = static_cast<int>(rng.below(3));
        std::size_t cell = static_cast<std::size_t>(rng.below(static_cast<long long>(d.ncells)));
        if (move == 0) {
            cand.w.density[cell] =
                rng.chance(0.5) ? cand.w.density[cell] * 2.0 : cand.w.density[cell] * 0.5;
            cand.w.density[cell] = quantize_density(cand.w.density[cell]);
        } else if (move == 1) {
            cand.v.density[cell] =
                rng.chance(0.5) ? cand.v.density[cell] * 2.0 : cand.v.density[cell] * 0.5;
            cand.v.density[cell] = quantize_density(cand.v.density[cell]);
        } else {
            ecand.mask[cell] ^= 1;
            if (ecand.empty()) ecand.mask[cell] = 1;
        }
        double tcand = best_t;
        double val = evaluate(cand, ecand, tcand);
        if (val > best) {
            best = val;
            best_t = tcand;
            pair = cand;
            e = ecand;
        }
    }
    best = evaluate(pair, e, best_t);  // refresh bracket_at_best for the winner
    rep.best_objective = best;
    rep.best_normalized = best / kc;
    rep.best_t = best_t;
    if (rep.best_normalized > 1.0) rep.pass = false;
    rep.w_density = pair.w.density;
    rep.v_density = pair.v.density;
    rep.e_mask = e.mask;
    return rep;
}

}  // namespace onesided
