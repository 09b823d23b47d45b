#pragma once

// JSON report schema. Reports embed the full run configuration so any run
// can be replayed from its own output; wall-clock timing is opt-in so that
// identical (config, seed) runs produce byte-identical documents.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "covering.hpp"
#include "harness.hpp"
#include "weights.hpp"

namespace onesided {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

struct RunConfig {
    std::string command;
    int dim = 1, depth = 3, width_exp = 0;
    std::array<long long, 3> origin{};
    double p = 1.0;
    std::string pair_file;
    std::string pair_gen = "ones";
    std::string set_file;
    std::string set_gen = "random";
    double set_density = 0.25;
    std::vector<double> ts;
    std::string flavor = "dyadic";
    std::uint64_t seed = 0;
    bool oracle = false;
    bool strict = false;
    bool timing = false;
    int budget = 100;
    int threads = 0;
    std::string op = "plus";
    std::string out_path, dump_path, csv_path;
    std::string dump_encoding = "text";
};

inline json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["dim"] = c.dim;
    j["depth"] = c.depth;
    j["width_exp"] = c.width_exp;
    j["origin"] = std::vector<long long>(c.origin.begin(), c.origin.begin() + c.dim);
    j["p"] = c.p;
    j["pair"] = c.pair_file.empty() ? json{{"gen", c.pair_gen}} : json{{"file", c.pair_file}};
    j["set"] = c.set_file.empty()
                   ? json{{"gen", c.set_gen}, {"density", c.set_density}}
                   : json{{"file", c.set_file}};
    j["t"] = c.ts;
    j["flavor"] = c.flavor;
    j["seed"] = c.seed;
    j["oracle"] = c.oracle;
    j["strict"] = c.strict;
    j["budget"] = c.budget;
    j["threads"] = c.threads;
    j["op"] = c.op;
    return j;
}

inline json num_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

inline json to_json(const GridDomain& d) {
    json j;
    j["dim"] = d.dim;
    j["depth"] = d.depth;
    j["width_exp"] = d.width_exp;
    j["origin"] = std::vector<long long>(d.origin.begin(), d.origin.begin() + d.dim);
    j["cells"] = d.ncells;
    return j;
}

inline json to_json(const Box& b) {
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < b.dim; ++a) {
        lo.push_back(b.lo[a].to_double());
        hi.push_back(b.hi[a].to_double());
    }
    return json{{"lo", lo}, {"hi", hi}};
}

inline json to_json(const ClassConstant& c) {
    json j;
    j["tag"] = c.tag;
    j["p"] = c.p;
    j["value"] = num_or_inf(c.value);
    if (c.has_witness) {
        json w;
        w["cube"] = to_json(c.witness.cube);
        if (c.witness.grid_dyadic) {
            w["level"] = c.witness.dyadic.level;
            w["anchor"] = std::vector<long long>(c.witness.dyadic.anchor.begin(),
                                                 c.witness.dyadic.anchor.begin() +
                                                     c.witness.dyadic.dim);
        }
        w["cells"] = c.witness.cells;
        j["witness"] = w;
    }
    return j;
}

inline json cells_of(const CellSet& s) {
    json out = json::array();
    for (std::size_t i = 0; i < s.mask.size(); ++i)
        if (s.mask[i]) out.push_back(i);
    return out;
}

inline json to_json(const CubeFamily& f) {
    json j;
    j["threshold"] = f.threshold;
    j["disjoint"] = f.disjoint;
    json cubes = json::array();
    for (const auto& qc : f.cubes) {
        json q;
        q["level"] = qc.cube.level;
        q["anchor"] = std::vector<long long>(qc.cube.anchor.begin(),
                                             qc.cube.anchor.begin() + qc.cube.dim);
        q["plus_mass"] = qc.plus_mass;
        q["ratio"] = qc.ratio;
        cubes.push_back(q);
    }
    j["cubes"] = cubes;
    return j;
}

inline json to_json(const DepthDecomposition& dd) {
    json j;
    j["depth"] = dd.depth;
    j["classes"] = dd.classes;
    json sig = json::array(), fs = json::array();
    for (const auto& s : dd.sigma) sig.push_back(cells_of(s));
    for (const auto& f : dd.fsets) fs.push_back(cells_of(f));
    j["sigma_cells"] = sig;
    j["f_cells"] = fs;
    return j;
}

inline json to_json(const CoverPiece& cp) {
    json j;
    j["input"] = cp.input;
    j["square"] = to_json(cp.square);
    j["dilation"] = to_json(cp.tilde);
    j["size_exp"] = cp.size_exp;
    j["cap_ok"] = cp.cap_ok;
    j["e_dilation_plus"] = cp.e_tilde_plus;
    if (cp.has_fset) j["f_cells"] = cells_of(cp.fset);
    return j;
}

inline json to_json(const BandCertificate& c) {
    json j;
    j["mu"] = c.mu;
    j["bracket"] = num_or_inf(c.bracket);
    j["hypothesis_ok"] = c.hypothesis_ok;
    j["containment"] = c.step_containment;
    j["thin_depth"] = c.step_thin_depth;
    j["survivor"] = c.step_survivor;
    j["mass_bound"] = c.step_mass_bound;
    j["sigma0_is_union"] = c.sigma0_is_union;
    j["lhs_w"] = c.lhs_w;
    j["rhs_bound"] = num_or_inf(c.rhs_bound);
    j["containment_slack"] = num_or_inf(c.worst_containment_slack);
    j["survivor_margin"] = num_or_inf(c.worst_survivor_margin);
    j["pass"] = c.pass();
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline json to_json(const DyadicWeakTypeReport& r) {
    json j;
    j["p"] = r.p;
    j["constant_factor"] = r.constant_factor;
    j["bracket"] = to_json(r.bracket);
    json pts = json::array();
    for (const auto& pt : r.points) {
        json q;
        q["t"] = pt.t;
        q["lhs"] = pt.lhs;
        q["rhs"] = num_or_inf(pt.rhs);
        q["ratio"] = num_or_inf(pt.ratio);
        q["vacuous"] = pt.vacuous;
        q["family_size"] = pt.family_size;
        q["family_w_sum"] = pt.family_w_sum;
        q["bands"] = pt.bands;
        q["family"] = to_json(pt.family);
        q["pass"] = pt.pass;
        pts.push_back(q);
    }
    j["points"] = pts;
    json certs = json::array();
    for (const auto& c : r.certificates) certs.push_back(to_json(c));
    j["band_certificates"] = certs;
    j["union_matches_level_set"] = r.union_matches_level_set;
    j["family_sum_matches"] = r.family_sum_matches;
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const NecessityReport& r) {
    json j;
    j["flavor"] = r.flavor == WeightFlavor::Dyadic ? "dyadic" : "anchored";
    j["p"] = r.p;
    j["bracket"] = num_or_inf(r.bracket);
    j["bracket_infinite"] = r.bracket_infinite;
    j["cweak"] = num_or_inf(r.cweak);
    j["factor"] = r.factor;
    j["bound"] = num_or_inf(r.bound);
    j["containment_ok"] = r.containment_ok;
    j["cubes_checked"] = r.cubes_checked;
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const CoverCertificate& c) {
    json j;
    j["inputs_ok"] = c.inputs_ok;
    j["coverage"] = c.coverage;
    j["no_containment"] = c.no_containment;
    j["tilde_plus_lower"] = c.tilde_plus_lower;
    j["f_mass"] = c.f_mass;
    j["max_f_overlap"] = c.max_f_overlap;
    j["topped_up"] = c.topped_up;
    json ov = json::array();
    for (const auto& [s, m] : c.same_size_overlap)
        ov.push_back(json{{"size_exp", s}, {"max_overlap", m}});
    j["same_size_overlap"] = ov;
    j["pass"] = c.pass();
    if (!c.failure.empty()) j["failure"] = c.failure;
    return j;
}

inline json to_json(const PlanarReport& r) {
    json j;
    j["p"] = r.p;
    j["xi"] = r.xi.to_double();
    j["bracket_anchored"] = to_json(r.bracket_anchored);
    j["bracket_dyadic"] = to_json(r.bracket_dyadic);
    json pieces = json::array();
    for (const auto& pc : r.pieces) {
        json q;
        q["t"] = pc.t;
        q["quarter"] = pc.quarter;
        q["omega_cells"] = pc.omega_cells;
        q["lhs"] = pc.lhs;
        q["sandwich_ok"] = pc.sandwich_ok;
        q["cover"] = to_json(pc.cover_cert);
        json chosen = json::array();
        for (const auto& cp : pc.chosen) chosen.push_back(to_json(cp));
        q["chosen"] = chosen;
        q["selected"] = pc.selected;
        q["overlap_const"] = pc.overlap_const;
        q["geom_factor"] = pc.geom_factor;
        q["beta_tilde"] = num_or_inf(pc.beta_tilde);
        q["assembled_constant"] = num_or_inf(pc.assembled_constant);
        q["rhs"] = num_or_inf(pc.rhs);
        q["ratio"] = num_or_inf(pc.ratio);
        q["chain_ok"] = pc.chain_ok;
        q["pass"] = pc.pass;
        pieces.push_back(q);
    }
    j["pieces"] = pieces;
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const SharpnessReport& r) {
    json j;
    j["seed"] = r.seed;
    j["budget"] = r.budget;
    j["p"] = r.p;
    j["best_objective"] = r.best_objective;
    j["best_normalized"] = r.best_normalized;
    j["best_t"] = r.best_t;
    j["bracket_at_best"] = num_or_inf(r.bracket_at_best);
    j["w_density"] = r.w_density;
    j["v_density"] = r.v_density;
    j["e_mask"] = r.e_mask;
    j["pass"] = r.pass;
    return j;
}

/// Report envelope: schema version, config echo, results, pass flag.
inline json make_report(const RunConfig& cfg, json results, bool pass, double wall_ms) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = to_json(cfg);
    j["results"] = std::move(results);
    j["pass"] = pass;
    j["timing"] = cfg.timing ? json{{"wall_ms", wall_ms}} : json(nullptr);
    return j;
}

}  // namespace onesided
