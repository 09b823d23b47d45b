// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code = number of
// failing criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "onesided/covering.hpp"
#include "onesided/generators.hpp"
#include "onesided/harness.hpp"
#include "onesided/io.hpp"
#include "onesided/maximal.hpp"
#include "onesided/weights.hpp"

using namespace onesided;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

WeightField quantized_field(const GridDomain& d, Rng& rng) {
    WeightField f(d);
    for (auto& x : f.density)
        x = std::ldexp(static_cast<double>(rng.below(257)), -8);
    return f;
}

// ---------------------------------------------------------------- criterion 1
void criterion_oracle_maximal() {
    long long checked = 0, mismatched = 0;
    Rng rng(1001);

    auto compare = [&](const MaximalResult& a, const MaximalResult& b) {
        for (std::size_t i = 0; i < a.value.size(); ++i) {
            ++checked;
            if (a.value[i] != b.value[i]) ++mismatched;
        }
    };

    // dyadic plus / minus in dimensions 1..3, grids up to 4096 cells
    for (int dim = 1; dim <= 3; ++dim) {
        for (int inst = 0; inst < 100; ++inst) {
            int depth;
            if (dim == 1) depth = inst < 95 ? 2 + static_cast<int>(rng.below(8)) : 12;
            else if (dim == 2) depth = inst < 95 ? 1 + static_cast<int>(rng.below(5)) : 6;
            else depth = inst < 95 ? 1 + static_cast<int>(rng.below(3)) : 4;
            GridDomain d(dim, depth);
            WeightField f = quantized_field(d, rng);
            compare(dyadic_plus_maximal(f), dyadic_plus_maximal_oracle(f));
            compare(dyadic_minus_maximal(f), dyadic_minus_maximal_oracle(f));
        }
    }
    // anchored square and subsquare operators in 2D
    for (int inst = 0; inst < 100; ++inst) {
        int depth = inst < 98 ? 1 + static_cast<int>(rng.below(5)) : 6;
        GridDomain d(2, depth);
        WeightField f = quantized_field(d, rng);
        compare(anchored_plus_maximal(f), anchored_maximal_oracle(f, +1, 0));
        compare(anchored_minus_maximal(f), anchored_maximal_oracle(f, -1, 0));
        int quarter = 1 + static_cast<int>(rng.below(3));
        compare(subsquare_maximal_2d(f, quarter), anchored_maximal_oracle(f, +1, quarter));
    }

    std::ostringstream ss;
    ss << checked << " cell values compared exactly, " << mismatched << " mismatches";
    report(1, "oracle equivalence of maximal operators", mismatched == 0, ss.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_oracle_constants() {
    Rng rng(2002);
    long long pairs = 0, mismatched = 0;
    double ps[4] = {1.0, 1.5, 2.0, 3.0};
    for (int i = 0; i < 200; ++i) {
        double p = ps[i % 4];
        GridDomain d = (i % 3 == 0) ? GridDomain(2, 3)
                                    : (i % 3 == 1 ? GridDomain(1, 5) : GridDomain(3, 2));
        WeightField w = quantized_field(d, rng);
        WeightField v = quantized_field(d, rng);
        WeightPair pair{w, v, p};
        SummedTable wt(pair.w);
        double cellvol = d.cell_volume();

        double fast = restricted_constant(pair, WeightFlavor::Dyadic).value;
        double slow = 0.0;
        detail::for_each_qualifying_cube(d, WeightFlavor::Dyadic,
                                         std::numeric_limits<int>::min(),
                                         [&](const detail::QualCube& c) {
            std::vector<std::size_t> cells;
            detail::collect_plus_cells(d, c, cells);
            double cnt = 1.0;
            for (int a = 0; a < d.dim; ++a) cnt *= static_cast<double>(c.span);
            double wmean = detail::cube_w_sum(wt, c, d.dim) / cnt;
            if (wmean == 0.0) return;
            double volq = cnt * cellvol;
            for (std::size_t mask = 1; mask < (std::size_t{1} << cells.size()); ++mask) {
                double vmass = 0.0;
                long long m = 0;
                for (std::size_t b = 0; b < cells.size(); ++b)
                    if ((mask >> b) & 1u) {
                        vmass += pair.v.density[cells[b]] * cellvol;
                        ++m;
                    }
                double mvol = static_cast<double>(m) * cellvol;
                double ratio;
                if (vmass == 0.0) ratio = std::numeric_limits<double>::infinity();
                else if (p == 1.0) ratio = (wmean * mvol) / vmass;
                else ratio = (mvol / volq) * std::pow(wmean * volq / vmass, 1.0 / p);
                if (ratio > slow) slow = ratio;
            }
        });
        ++pairs;
        if (fast != slow) ++mismatched;
    }
    std::ostringstream ss;
    ss << pairs << " pairs, p in {1,1.5,2,3}, exact subset search, " << mismatched
       << " mismatches";
    report(2, "oracle equivalence of restricted constants", mismatched == 0, ss.str());
}

// ------------------------------------------------------- criteria 3, 4 and 5
void criterion_dyadic_weak_type() {
    Rng rng(3003);
    const char* gens[4] = {"loguniform", "steps", "powerlaw", "blocks"};
    long long points = 0, violations = 0;
    long long certs = 0, cert_failures = 0;
    long long necessity_checks = 0, necessity_failures = 0;

    for (int dim = 1; dim <= 3; ++dim) {
        for (double p : {1.0, 2.0}) {
            for (int inst = 0; inst < 1000; ++inst) {
                int depth = dim == 1 ? 2 + static_cast<int>(rng.below(3))
                                     : (dim == 2 ? 1 + static_cast<int>(rng.below(2)) : 1);
                GridDomain d(dim, depth);
                WeightPair pair = gen_pair(d, gens[inst % 4], rng, p);
                CellSet e = gen_set(d, inst % 5 == 0 ? "block" : "random", rng, 0.3);
                DyadicWeakTypeReport rep = verify_dyadic_weak_type(pair, e);
                for (const auto& pt : rep.points) {
                    ++points;
                    if (!pt.pass) ++violations;
                }
                for (const auto& c : rep.certificates) {
                    ++certs;
                    if (!c.pass()) ++cert_failures;
                }
                if (!rep.union_matches_level_set || !rep.family_sum_matches) ++violations;

                NecessityReport nec = verify_necessity(pair, WeightFlavor::Dyadic);
                ++necessity_checks;
                if (!nec.pass) ++necessity_failures;
            }
        }
    }

    {
        std::ostringstream ss;
        ss << points << " (w,v,E,t) instances across n in {1,2,3}, p in {1,2}, " << violations
           << " violations of the explicit bound";
        report(3, "dyadic weak type with explicit constant", points >= 10000 && violations == 0,
               ss.str());
    }
    {
        std::ostringstream ss;
        ss << certs << " band certificates, steps (i)-(iv) integer-exact where stated, "
           << cert_failures << " failures";
        report(4, "band mass bound step certification", certs > 0 && cert_failures == 0,
               ss.str());
    }
    {
        std::ostringstream ss;
        ss << necessity_checks << " pairs, bracket <= 2 * cweak^{1/p} at 1e-9 relative slack, "
           << necessity_failures << " failures";
        report(5, "necessity of the restricted condition", necessity_failures == 0, ss.str());
    }
}

// ---------------------------------------------------------------- criterion 6
void criterion_class_relations() {
    Rng rng(6006);
    long long holder_fail = 0, a1_fail = 0, trunc_fail = 0;
    for (int i = 0; i < 200; ++i) {
        int dim = 1 + i % 2;
        GridDomain d(dim, dim == 1 ? 4 : 2);
        WeightField w = quantized_field(d, rng);
        WeightField v = quantized_field(d, rng);
        for (auto& x : w.density) x = std::max(x, std::ldexp(1.0, -8));
        for (auto& x : v.density) x = std::max(x, std::ldexp(1.0, -8));

        for (double p : {1.5, 2.0, 3.0}) {
            WeightPair pair{w, v, p};
            double rc = restricted_constant(pair, WeightFlavor::Dyadic).value;
            double mc = muckenhoupt_constant(pair, WeightFlavor::Dyadic).value;
            if (!(rc <= std::pow(mc, 1.0 / p) * (1.0 + 1e-12))) ++holder_fail;
        }

        WeightPair p1{w, v, 1.0};
        double rc1 = restricted_constant(p1, WeightFlavor::Dyadic).value;
        double a1 = a1_pointwise_check(p1, WeightFlavor::Dyadic).value;
        if (rc1 != a1) ++a1_fail;

        double p_trunc = i % 2 == 0 ? 1.0 : 2.0;
        WeightPair pt{w, v, p_trunc};
        double base = restricted_constant(pt, WeightFlavor::Anchored).value;
        double a = std::ldexp(1.0, static_cast<int>(rng.below(7)) - 3);
        double b = a * std::ldexp(1.0, static_cast<int>(rng.below(3)));  // a <= b
        double b0 = restricted_constant(truncate_pair(pt, a, b, TruncateVariant::MaxMax),
                                        WeightFlavor::Anchored)
                        .value;
        double b1 = restricted_constant(truncate_pair(pt, a, b, TruncateVariant::MinMax),
                                        WeightFlavor::Anchored)
                        .value;
        if (!(b0 <= std::max(1.0, base))) ++trunc_fail;
        if (!(b1 <= base)) ++trunc_fail;
    }
    std::ostringstream ss;
    ss << "200 pairs: restricted<=muckenhoupt^{1/p} fails " << holder_fail
       << ", p=1 pointwise equality fails " << a1_fail << ", truncation bounds fail "
       << trunc_fail;
    report(6, "class inclusion, p=1 equality and truncation lemma",
           holder_fail == 0 && a1_fail == 0 && trunc_fail == 0, ss.str());
}

// ---------------------------------------------------------------- criterion 7
void criterion_geometry() {
    std::mt19937_64 rng(7007);
    std::uniform_int_distribution<int> lev(-3, 8);
    std::uniform_int_distribution<long long> anc(-512, 512);
    long long chain_fail = 0, partition_fail = 0;
    for (int i = 0; i < 1000; ++i) {
        DyadicCube q{2, lev(rng), {anc(rng), anc(rng)}};
        Box qb = q.box();
        Dyadic l = qb.side(0);
        Box doubled;
        doubled.dim = 2;
        for (int a = 0; a < 2; ++a) {
            doubled.lo[a] = qb.hi[a];
            doubled.hi[a] = qb.hi[a] + l + l;
        }
        for (int quarter : {1, 2, 3}) {
            Box tq = cover_dilation(qb, quarter);
            if (!contains(doubled, plus_quarter(tq, quarter))) ++chain_fail;
        }

        // exact reassembly of the four subsquares
        double vol = 0.0;
        bool inside = true, disjoint = true;
        Box pieces[4];
        for (int j = 0; j < 4; ++j) {
            pieces[j] = subsquare(q, j).box();
            vol += pieces[j].volume();
            inside = inside && contains(qb, pieces[j]);
        }
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                disjoint = disjoint && intersect(pieces[a], pieces[b]).is_empty();
        if (!(vol == qb.volume() && inside && disjoint)) ++partition_fail;
    }
    std::ostringstream ss;
    ss << "1000 random squares: dilation-quarter chain fails " << chain_fail
       << ", subsquare partition fails " << partition_fail;
    report(7, "dilation containment and subsquare partition", chain_fail == 0 && partition_fail == 0,
           ss.str());
}

// ---------------------------------------------------------------- criterion 8
void criterion_planar_pipeline() {
    Rng rng(8008);
    const char* gens[3] = {"loguniform", "steps", "blocks"};
    long long instances = 0, failures = 0, cert_findings = 0, pieces = 0;
    for (int inst = 0; inst < 500; ++inst) {
        GridDomain d(2, 5);  // 32x32
        double p = inst % 2 == 0 ? 1.0 : 2.0;
        WeightPair pair = gen_pair(d, gens[inst % 3], rng, p);
        double density = 0.05 + 0.2 * rng.u01();
        CellSet e = gen_set(d, "random", rng, density);
        PlanarReport rep = verify_2d_weak_type(pair, e, {0.125, 0.25, 0.5});
        ++instances;
        if (!rep.pass) ++failures;
        for (const auto& pc : rep.pieces) {
            ++pieces;
            if (!pc.cover_cert.pass()) ++cert_findings;
            if (!pc.sandwich_ok) ++failures;
        }
    }
    std::ostringstream ss;
    ss << instances << " random 32x32 instances, " << pieces << " (t,quarter) pieces, "
       << failures << " chain failures, " << cert_findings << " certificate findings";
    report(8, "planar weak type through the cover selection",
           failures == 0 && cert_findings == 0, ss.str());
}

// ---------------------------------------------------------------- criterion 9
void criterion_performance() {
    GridDomain d(2, 10);  // 2^20 cells
    Rng rng(9009);
    WeightField f(d);
    for (auto& x : f.density) x = rng.u01();

    auto time_run = [&](int threads) {
        MaximalOptions o;
        o.threads = threads;
        double best = 1e100;
        for (int rep = 0; rep < 3; ++rep) {
            auto t0 = std::chrono::steady_clock::now();
            MaximalResult r = dyadic_plus_maximal(f, o);
            double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
            best = std::min(best, dt);
            if (r.value[0] < 0) std::abort();  // keep the result alive
        }
        return best;
    };

    double t1 = time_run(1);
    double t8 = time_run(8);
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    double effective = std::min(8.0, static_cast<double>(hw));
    double ideal = t1 / effective;
    bool pass = t1 < 2.0 && t8 <= 2.0 * ideal;
    std::ostringstream ss;
    ss << "2^20 cells: single-thread " << t1 << " s (< 2 s), 8-thread " << t8
       << " s vs linear-on-" << hw << "-cores budget " << 2.0 * ideal << " s";
    report(9, "maximal operator performance and thread scaling", pass, ss.str());
}

// --------------------------------------------------------------- criterion 10
void criterion_determinism() {
    std::string cli = ONESIDED_CLI_PATH;
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto run = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " 2> /dev/null";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    bool pass = true;
    std::string base = "verify dyadic --dim 2 --depth 3 --gen 'loguniform(seed=11)' "
                       "--gen-set random --seed 11 --t 0.25 0.5";
    pass &= run(base + " --out /tmp/onesided_acc_a.json") == 0;
    pass &= run(base + " --out /tmp/onesided_acc_b.json") == 0;
    pass &= slurp("/tmp/onesided_acc_a.json") == slurp("/tmp/onesided_acc_b.json");
    pass &= !slurp("/tmp/onesided_acc_a.json").empty();

    std::string dump = "maximal --dim 2 --depth 4 --gen-set random --seed 13 --op anchored "
                       "--t 0.25 --dump-encoding binary";
    pass &= run(dump + " --dump /tmp/onesided_acc_a.grid --out /dev/null") == 0;
    pass &= run(dump + " --dump /tmp/onesided_acc_b.grid --out /dev/null") == 0;
    pass &= slurp("/tmp/onesided_acc_a.grid") == slurp("/tmp/onesided_acc_b.grid");
    pass &= !slurp("/tmp/onesided_acc_a.grid").empty();

    for (const char* f : {"/tmp/onesided_acc_a.json", "/tmp/onesided_acc_b.json",
                          "/tmp/onesided_acc_a.grid", "/tmp/onesided_acc_b.grid"})
        std::remove(f);
    report(10, "determinism of reports and binary payloads", pass,
           "identical (config, seed) reproduce byte-identical output");
}

}  // namespace

int main() {
    criterion_oracle_maximal();
    criterion_oracle_constants();
    criterion_dyadic_weak_type();
    criterion_class_relations();
    criterion_geometry();
    criterion_planar_pipeline();
    criterion_performance();
    criterion_determinism();
    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    else std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
