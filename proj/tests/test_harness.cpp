#include <gtest/gtest.h>

#include "onesided/harness.hpp"

using namespace onesided;

namespace {

Dyadic dy(long long n, int e = 0) { return Dyadic(n, e); }

}  // namespace

TEST(Harness, DyadicWorkedExample) {
    GridDomain d(1, 2);
    CellSet e(d);
    e.add_box(make_box1(dy(1, 1), dy(3, 2)));  // [1/2, 3/4)
    WeightPair pair{WeightField(d, 1.0), WeightField(d, 1.0), 1.0};
    DyadicWeakTypeReport rep = verify_dyadic_weak_type(pair, e, {0.4});
    ASSERT_EQ(rep.points.size(), 1u);
    EXPECT_DOUBLE_EQ(rep.bracket.value, 1.0);
    EXPECT_DOUBLE_EQ(rep.constant_factor, 32.0);  // 2^{1+1+2} / (1 - 1/2)
    EXPECT_DOUBLE_EQ(rep.points[0].lhs, 0.5);
    EXPECT_DOUBLE_EQ(rep.points[0].rhs, 20.0);
    EXPECT_DOUBLE_EQ(rep.points[0].ratio, 0.025);
    EXPECT_TRUE(rep.points[0].pass);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.union_matches_level_set);
    EXPECT_TRUE(rep.family_sum_matches);
    EXPECT_FALSE(rep.certificates.empty());
}

TEST(Harness, DyadicEmptySet) {
    GridDomain d(2, 2);
    CellSet e(d);
    WeightPair pair{WeightField(d, 1.0), WeightField(d, 1.0), 2.0};
    DyadicWeakTypeReport rep = verify_dyadic_weak_type(pair, e);
    for (const auto& pt : rep.points) EXPECT_DOUBLE_EQ(pt.lhs, 0.0);
    EXPECT_TRUE(rep.pass);
}

TEST(Harness, DyadicRandomInstances) {
    Rng rng(1234);
    for (int rep_i = 0; rep_i < 25; ++rep_i) {
        int dim = 1 + rep_i % 3;
        GridDomain d(dim, dim == 1 ? 4 : 2);
        double p = rep_i % 2 == 0 ? 1.0 : 2.0;
        WeightPair pair = gen_pair(d, rep_i % 3 == 0 ? "loguniform" : "steps", rng, p);
        CellSet e = gen_set(d, "random", rng, 0.3);
        DyadicWeakTypeReport rep = verify_dyadic_weak_type(pair, e);
        EXPECT_TRUE(rep.pass);
        for (const auto& c : rep.certificates) {
            EXPECT_TRUE(c.pass());
            EXPECT_GE(c.worst_containment_slack, 0.0);
        }
    }
}

TEST(Harness, VacuousWhenBracketInfinite) {
    GridDomain d(1, 2);
    WeightField w(d, 1.0), v(d, 1.0);
    v.density[1] = 0.0;  // zero v behind w-mass: infinite bracket
    WeightPair pair{w, v, 1.0};
    CellSet e(d);
    e.set(1);
    DyadicWeakTypeReport rep = verify_dyadic_weak_type(pair, e, {0.25});
    EXPECT_FALSE(rep.bracket.finite());
    EXPECT_TRUE(rep.points[0].vacuous);
    EXPECT_TRUE(rep.pass);
}

TEST(Harness, ScalingCovariance) {
    Rng rng(77);
    GridDomain d(1, 3);
    WeightPair pair = gen_pair(d, "loguniform", rng, 2.0);
    CellSet e = gen_set(d, "random", rng, 0.4);
    DyadicWeakTypeReport base = verify_dyadic_weak_type(pair, e, {0.25, 0.5});

    WeightPair scaled = pair;
    for (auto& x : scaled.w.density) x *= 8.0;
    for (auto& x : scaled.v.density) x *= 8.0;
    DyadicWeakTypeReport sc = verify_dyadic_weak_type(scaled, e, {0.25, 0.5});

    EXPECT_DOUBLE_EQ(base.bracket.value, sc.bracket.value);
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        EXPECT_DOUBLE_EQ(sc.points[i].lhs, 8.0 * base.points[i].lhs);
        EXPECT_DOUBLE_EQ(sc.points[i].ratio, base.points[i].ratio);
    }
}

TEST(Harness, RefinementInvariance) {
    // same functions on a one-level-finer grid, cube family pinned
    Rng rng(88);
    GridDomain d(1, 3);
    WeightPair pair = gen_pair(d, "loguniform", rng, 1.0);
    CellSet e = gen_set(d, "random", rng, 0.4);

    GridDomain fine(1, 4);
    WeightPair fpair{WeightField(fine), WeightField(fine), 1.0};
    CellSet fe(fine);
    for (std::size_t i = 0; i < fine.ncells; ++i) {
        std::size_t ci = i / 2;
        fpair.w.density[i] = pair.w.density[ci];
        fpair.v.density[i] = pair.v.density[ci];
        fe.mask[i] = e.mask[ci];
    }
    ClassOptions co;
    co.max_level = d.depth;
    ClassConstant coarse_b = restricted_constant(pair, WeightFlavor::Dyadic);
    ClassConstant fine_b = restricted_constant(fpair, WeightFlavor::Dyadic, co);
    EXPECT_DOUBLE_EQ(coarse_b.value, fine_b.value);

    MaximalOptions mo;
    mo.max_level = d.depth;
    MaximalResult mc = dyadic_plus_maximal(e);
    MaximalResult mf = dyadic_plus_maximal(fe, mo);
    double t = 0.25;
    EXPECT_DOUBLE_EQ(measure(pair.w, level_set(mc, t)), measure(fpair.w, level_set(mf, t)));
}

TEST(Harness, NecessityConstantPair) {
    GridDomain d(2, 2);
    WeightPair pair{WeightField(d, 1.0), WeightField(d, 1.0), 1.0};
    HarnessOptions opts;
    opts.full_necessity = true;
    NecessityReport rep = verify_necessity(pair, WeightFlavor::Dyadic, opts);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.containment_ok);
    EXPECT_GT(rep.cubes_checked, 1u);
    EXPECT_LE(rep.bracket, rep.bound * (1 + 1e-9));
}

TEST(Harness, NecessityRandomPairs) {
    Rng rng(99);
    for (int i = 0; i < 20; ++i) {
        int dim = 1 + i % 2;
        GridDomain d(dim, dim == 1 ? 4 : 3);
        double p = i % 2 == 0 ? 1.0 : 2.0;
        WeightPair pair = gen_pair(d, "loguniform", rng, p);
        HarnessOptions opts;
        opts.full_necessity = true;
        NecessityReport rep = verify_necessity(pair, WeightFlavor::Dyadic, opts);
        EXPECT_TRUE(rep.pass) << "bracket " << rep.bracket << " bound " << rep.bound;
    }
    // anchored flavor with its own factor
    GridDomain d2(2, 3);
    WeightPair pair = gen_pair(d2, "loguniform", rng, 2.0);
    NecessityReport rep = verify_necessity(pair, WeightFlavor::Anchored);
    EXPECT_DOUBLE_EQ(rep.factor, 8.0);
    EXPECT_TRUE(rep.pass);
}

TEST(Harness, NecessityUnboundedPair) {
    GridDomain d(1, 2);
    WeightField w(d, 1.0), v(d, 1.0);
    v.density[1] = 0.0;
    WeightPair pair{w, v, 1.0};
    NecessityReport rep = verify_necessity(pair, WeightFlavor::Dyadic);
    EXPECT_TRUE(rep.bracket_infinite);
    EXPECT_TRUE(std::isinf(rep.cweak));
    EXPECT_TRUE(rep.pass);
}

TEST(Harness, PlanarEmptyAndFull) {
    GridDomain d(2, 3);
    WeightPair pair{WeightField(d, 1.0), WeightField(d, 1.0), 1.0};
    CellSet empty(d);
    PlanarReport rep = verify_2d_weak_type(pair, empty, {0.25});
    for (const auto& pc : rep.pieces) {
        EXPECT_EQ(pc.omega_cells, 0u);
        EXPECT_DOUBLE_EQ(pc.lhs, 0.0);
    }
    EXPECT_TRUE(rep.pass);

    CellSet full(d);
    full.mask.assign(d.ncells, 1);
    PlanarReport rep2 = verify_2d_weak_type(pair, full, {1.0});
    for (const auto& pc : rep2.pieces) EXPECT_EQ(pc.omega_cells, 0u);  // means never exceed 1
    EXPECT_TRUE(rep2.pass);
}

TEST(Harness, PlanarRandomInstances) {
    Rng rng(555);
    for (int i = 0; i < 12; ++i) {
        GridDomain d(2, 4);  // 16x16
        double p = i % 2 == 0 ? 1.0 : 2.0;
        WeightPair pair = gen_pair(d, i % 3 == 0 ? "steps" : "loguniform", rng, p);
        CellSet e = gen_set(d, "random", rng, 0.15);
        PlanarReport rep = verify_2d_weak_type(pair, e, {0.125, 0.25, 0.5});
        EXPECT_TRUE(rep.pass);
        for (const auto& pc : rep.pieces) {
            EXPECT_TRUE(pc.sandwich_ok);
            EXPECT_TRUE(pc.cover_cert.pass()) << pc.cover_cert.failure;
            if (pc.omega_cells > 0) {
                EXPECT_LE(pc.ratio, 1.0 + 1e-12);
                EXPECT_GE(pc.geom_factor, std::pow(2.25, pc.quarter > 0 ? rep.p : 1.0) - 1e-9);
            }
        }
    }
}

TEST(Harness, PlanarRejectsNon2D) {
    GridDomain d(1, 3);
    WeightPair pair{WeightField(d, 1.0), WeightField(d, 1.0), 1.0};
    CellSet e(d);
    e.set(0);
    EXPECT_THROW(verify_2d_weak_type(pair, e), std::invalid_argument);
}

TEST(Harness, SharpnessDeterminism) {
    GridDomain d(1, 3);
    SharpnessReport a = sharpness_search(d, 1.0, 25, 4242);
    SharpnessReport b = sharpness_search(d, 1.0, 25, 4242);
    EXPECT_EQ(a.best_objective, b.best_objective);
    EXPECT_EQ(a.best_t, b.best_t);
    EXPECT_EQ(a.w_density, b.w_density);
    EXPECT_EQ(a.v_density, b.v_density);
    EXPECT_EQ(a.e_mask, b.e_mask);

    SharpnessReport c = sharpness_search(d, 1.0, 1, 7);
    SharpnessReport c2 = sharpness_search(d, 1.0, 1, 7);
    EXPECT_EQ(c.best_objective, c2.best_objective);

    EXPECT_LE(a.best_normalized, 1.0);
    EXPECT_GT(a.best_objective, 0.0);
    EXPECT_TRUE(a.pass);
}

TEST(Harness, SharpnessImprovesOverBudget) {
    GridDomain d(1, 3);
    SharpnessReport small = sharpness_search(d, 2.0, 1, 99);
    SharpnessReport big = sharpness_search(d, 2.0, 60, 99);
    EXPECT_GE(big.best_objective, small.best_objective);
    EXPECT_LE(big.best_normalized, 1.0);
}
