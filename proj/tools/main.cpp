// Command-line front end: config ingestion, dispatch, report emission.
// Exit codes: 0 pass, 1 operational error, 2 mathematical-claim failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "folhodge/complex.hpp"
#include "folhodge/foliation.hpp"
#include "folhodge/hodge.hpp"
#include "folhodge/morse.hpp"
#include "folhodge/potential.hpp"
#include "folhodge/spectral.hpp"
#include "folhodge/witten.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace folhodge;

namespace {

// A mathematical claim checked by a command came out false.
struct ClaimFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!obj.is_object())
        throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
}

Eigen::VectorXd to_vector(const json& arr, const std::string& where) {
    if (!arr.is_array())
        throw std::invalid_argument("config: " + where + " must be an array of numbers");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

struct ToleranceTable {
    double residual = 1e-10;
    double orthogonality = 1e-10;
    double angle = 1e-8;
    double zero_block = 1e-8;  // relative to the conjugator norm
    double overflow_budget = 30.0;
    KernelPolicy kernel;
    MorseTolerances morse;

    json to_json() const {
        json k = {{"abs_floor_rel", kernel.abs_floor_rel},
                  {"window_rel", kernel.window_rel},
                  {"gap_requirement", kernel.gap_requirement},
                  {"probe_count", kernel.probe_count},
                  {"dense_cutoff", kernel.dense_cutoff}};
        json m = {{"newton_residual", morse.newton_residual},
                  {"nondegenerate_rel", morse.nondegenerate_rel},
                  {"cubic", morse.cubic},
                  {"dedup_radius", morse.dedup_radius},
                  {"newton_max_iter", morse.newton_max_iter}};
        return {{"residual", residual},         {"orthogonality", orthogonality},
                {"angle", angle},               {"zero_block", zero_block},
                {"overflow_budget", overflow_budget}, {"kernel", k},
                {"morse", m}};
    }
};

struct RunConfig {
    FoliationSpec model;
    std::string model_kind;
    std::vector<std::array<double, 2>> chart_bounds;            // chart_window only
    std::vector<Eigen::VectorXd> chart_samples;                 // chart_window only
    int leaf_dim = 1;
    int transversal_dim = 0;
    std::optional<TrigPotential> potential;
    std::vector<double> epsilons;
    std::vector<int> degrees;  // empty = all 0..p
    ToleranceTable tol;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    int seed_resolution = 16;
    bool corrupt_d = false;
};

Phase parse_phase(const json& j, const std::string& where) {
    const std::string s = j.get<std::string>();
    if (s == "cos") return Phase::Cos;
    if (s == "sin") return Phase::Sin;
    throw std::invalid_argument("config: " + where + " phase must be \"cos\" or \"sin\"");
}

std::vector<int> to_ints(const json& arr) {
    std::vector<int> out;
    for (const auto& x : arr) out.push_back(x.get<int>());
    return out;
}

std::vector<Phase> to_phases(const json& arr, const std::string& where) {
    std::vector<Phase> out;
    for (const auto& x : arr) out.push_back(parse_phase(x, where));
    return out;
}

// Seeded generic trig polynomial: frequencies <= 3, coefficients in [-1, 1].
void append_random_terms(std::vector<TrigTerm>& terms, int count, int p, int q,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(0, 3);
    std::uniform_int_distribution<int> ph(0, 1);
    for (int t = 0; t < count; ++t) {
        TrigTerm term;
        term.coeff = coeff(rng);
        for (int i = 0; i < p; ++i) {
            term.freq_h.push_back(freq(rng));
            term.phase_h.push_back(ph(rng) ? Phase::Sin : Phase::Cos);
        }
        for (int i = 0; i < q; ++i) {
            term.freq_v.push_back(freq(rng));
            term.phase_v.push_back(ph(rng) ? Phase::Sin : Phase::Cos);
        }
        terms.push_back(std::move(term));
    }
}

RunConfig parse_config(const json& root) {
    require_keys(root, {"model", "potential", "epsilons", "degrees", "tolerances", "seed",
                        "output_dir", "seed_resolution", "fault_injection"},
                 "top level");
    RunConfig cfg;

    if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
    if (root.contains("seed_resolution"))
        cfg.seed_resolution = root["seed_resolution"].get<int>();

    if (root.contains("tolerances")) {
        const json& t = root["tolerances"];
        require_keys(t, {"residual", "orthogonality", "angle", "zero_block",
                         "overflow_budget", "kernel", "morse"},
                     "tolerances");
        if (t.contains("residual")) cfg.tol.residual = t["residual"].get<double>();
        if (t.contains("orthogonality"))
            cfg.tol.orthogonality = t["orthogonality"].get<double>();
        if (t.contains("angle")) cfg.tol.angle = t["angle"].get<double>();
        if (t.contains("zero_block")) cfg.tol.zero_block = t["zero_block"].get<double>();
        if (t.contains("overflow_budget"))
            cfg.tol.overflow_budget = t["overflow_budget"].get<double>();
        if (t.contains("kernel")) {
            const json& k = t["kernel"];
            require_keys(k, {"abs_floor_rel", "window_rel", "gap_requirement",
                             "probe_count", "dense_cutoff"},
                         "tolerances.kernel");
            if (k.contains("abs_floor_rel"))
                cfg.tol.kernel.abs_floor_rel = k["abs_floor_rel"].get<double>();
            if (k.contains("window_rel"))
                cfg.tol.kernel.window_rel = k["window_rel"].get<double>();
            if (k.contains("gap_requirement"))
                cfg.tol.kernel.gap_requirement = k["gap_requirement"].get<double>();
            if (k.contains("probe_count"))
                cfg.tol.kernel.probe_count = k["probe_count"].get<int>();
            if (k.contains("dense_cutoff"))
                cfg.tol.kernel.dense_cutoff = k["dense_cutoff"].get<int>();
        }
        if (t.contains("morse")) {
            const json& m = t["morse"];
            require_keys(m, {"newton_residual", "nondegenerate_rel", "cubic",
                             "dedup_radius", "newton_max_iter"},
                         "tolerances.morse");
            if (m.contains("newton_residual"))
                cfg.tol.morse.newton_residual = m["newton_residual"].get<double>();
            if (m.contains("nondegenerate_rel"))
                cfg.tol.morse.nondegenerate_rel = m["nondegenerate_rel"].get<double>();
            if (m.contains("cubic")) cfg.tol.morse.cubic = m["cubic"].get<double>();
            if (m.contains("dedup_radius"))
                cfg.tol.morse.dedup_radius = m["dedup_radius"].get<double>();
            if (m.contains("newton_max_iter"))
                cfg.tol.morse.newton_max_iter = m["newton_max_iter"].get<int>();
        }
    }

    if (!root.contains("model")) throw std::invalid_argument("config: \"model\" is required");
    const json& m = root["model"];
    require_keys(m, {"kind", "leaf", "transversal_samples", "weights", "rotation",
                     "fiber_resolution", "transversal_count", "bounds", "alpha",
                     "alpha_rational", "resolution"},
                 "model");
    cfg.model_kind = m.at("kind").get<std::string>();
    if (m.contains("weights")) cfg.model.weights = m["weights"].get<std::vector<double>>();

    if (cfg.model_kind == "product") {
        ProductSpec prod;
        const json& leaf = m.at("leaf");
        require_keys(leaf, {"dim", "sizes", "spacings"}, "model.leaf");
        prod.leaf_dim = leaf.at("dim").get<int>();
        prod.sizes = leaf.at("sizes").get<std::vector<int>>();
        prod.spacings = leaf.at("spacings").get<std::vector<double>>();
        for (const auto& s : m.at("transversal_samples"))
            prod.transversal_samples.push_back(to_vector(s, "model.transversal_samples"));
        cfg.leaf_dim = prod.leaf_dim;
        cfg.transversal_dim = prod.transversal_samples.empty()
                                  ? 0
                                  : static_cast<int>(prod.transversal_samples[0].size());
        cfg.model.kind = std::move(prod);
    } else if (cfg.model_kind == "suspension") {
        SuspensionSpec susp;
        const auto rot = m.at("rotation").get<std::vector<long>>();
        if (rot.size() != 2)
            throw std::invalid_argument("config: model.rotation must be [num, den]");
        susp.rotation_num = rot[0];
        susp.rotation_den = rot[1];
        if (m.contains("fiber_resolution"))
            susp.fiber_resolution = m["fiber_resolution"].get<int>();
        if (m.contains("transversal_count"))
            susp.transversal_count = m["transversal_count"].get<int>();
        cfg.leaf_dim = 1;
        cfg.transversal_dim = 1;
        cfg.model.kind = susp;
    } else if (cfg.model_kind == "chart_window") {
        ChartWindowSpec cw;
        for (const auto& b : m.at("bounds")) {
            const auto pair = b.get<std::vector<double>>();
            if (pair.size() != 2)
                throw std::invalid_argument("config: model.bounds entries must be [lo, hi]");
            cw.h_bounds.push_back({pair[0], pair[1]});
        }
        for (const auto& s : m.at("transversal_samples"))
            cw.transversal_samples.push_back(to_vector(s, "model.transversal_samples"));
        cfg.chart_bounds = cw.h_bounds;
        cfg.chart_samples = cw.transversal_samples;
        cfg.leaf_dim = static_cast<int>(cw.h_bounds.size());
        cfg.transversal_dim = cw.transversal_samples.empty()
                                  ? 0
                                  : static_cast<int>(cw.transversal_samples[0].size());
        cfg.model.kind = std::move(cw);
    } else if (cfg.model_kind == "kronecker") {
        KroneckerSpec kr;
        if (m.contains("alpha")) kr.alpha = m["alpha"].get<double>();
        if (m.contains("alpha_rational")) {
            const auto pr = m["alpha_rational"].get<std::vector<long>>();
            if (pr.size() != 2)
                throw std::invalid_argument("config: model.alpha_rational must be [num, den]");
            kr.alpha_rational = std::make_pair(pr[0], pr[1]);
            kr.alpha = static_cast<double>(pr[0]) / static_cast<double>(pr[1]);
        }
        if (m.contains("resolution")) kr.resolution = m["resolution"].get<int>();
        cfg.model.kind = kr;
    } else {
        throw std::invalid_argument("config: unknown model.kind \"" + cfg.model_kind + "\"");
    }

    if (root.contains("potential")) {
        const json& pj = root["potential"];
        require_keys(pj, {"terms", "poly_terms", "random_terms"}, "potential");
        std::vector<TrigTerm> terms;
        std::vector<PolyTerm> poly;
        if (pj.contains("terms"))
            for (const auto& tj : pj["terms"]) {
                require_keys(tj, {"coeff", "freq_h", "freq_v", "phase_h", "phase_v"},
                             "potential.terms[]");
                TrigTerm term;
                term.coeff = tj.at("coeff").get<double>();
                term.freq_h = to_ints(tj.at("freq_h"));
                term.phase_h = to_phases(tj.at("phase_h"), "potential.terms[]");
                if (tj.contains("freq_v")) term.freq_v = to_ints(tj["freq_v"]);
                if (tj.contains("phase_v"))
                    term.phase_v = to_phases(tj["phase_v"], "potential.terms[]");
                terms.push_back(std::move(term));
            }
        if (pj.contains("poly_terms"))
            for (const auto& tj : pj["poly_terms"]) {
                require_keys(tj, {"coeff", "pow_h", "pow_v"}, "potential.poly_terms[]");
                PolyTerm term;
                term.coeff = tj.at("coeff").get<double>();
                term.pow_h = to_ints(tj.at("pow_h"));
                if (tj.contains("pow_v")) term.pow_v = to_ints(tj["pow_v"]);
                poly.push_back(std::move(term));
            }
        if (pj.contains("random_terms"))
            append_random_terms(terms, pj["random_terms"].get<int>(), cfg.leaf_dim,
                                cfg.transversal_dim, cfg.seed);
        cfg.potential.emplace(cfg.leaf_dim, cfg.transversal_dim, terms, poly);
    }

    if (root.contains("epsilons")) {
        cfg.epsilons = root["epsilons"].get<std::vector<double>>();
        for (size_t i = 0; i + 1 < cfg.epsilons.size(); ++i)
            if (!(cfg.epsilons[i] < cfg.epsilons[i + 1]))
                throw std::invalid_argument("config: epsilons must be strictly ascending");
        for (double e : cfg.epsilons)
            if (e < 0.0) throw std::invalid_argument("config: epsilons must be nonnegative");
    }
    if (root.contains("degrees")) {
        cfg.degrees = root["degrees"].get<std::vector<int>>();
        for (int k : cfg.degrees)
            if (k < 0 || k > cfg.leaf_dim)
                throw std::invalid_argument("config: degrees must lie in 0..p");
    }
    if (root.contains("fault_injection")) {
        const json& f = root["fault_injection"];
        require_keys(f, {"corrupt_d"}, "fault_injection");
        if (f.contains("corrupt_d")) cfg.corrupt_d = f["corrupt_d"].get<bool>();
    }
    return cfg;
}

std::vector<int> effective_degrees(const RunConfig& cfg) {
    if (!cfg.degrees.empty()) return cfg.degrees;
    std::vector<int> out;
    for (int k = 0; k <= cfg.leaf_dim; ++k) out.push_back(k);
    return out;
}

TrigPotential effective_potential(const RunConfig& cfg) {
    if (cfg.potential) return *cfg.potential;
    return TrigPotential(cfg.leaf_dim, cfg.transversal_dim, {});
}

// ---------------------------------------------------------------- reports

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

json vec_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json spectrum_json(int degree, const SpectrumReport& rep) {
    return {{"degree", degree},
            {"kernel_dim", rep.kernel_dim},
            {"threshold", rep.threshold},
            {"gap_ratio", finite_or_null(rep.gap_ratio)},
            {"ambiguous", rep.ambiguous},
            {"operator_norm", rep.operator_norm},
            {"eigenvalues", rep.eigenvalues}};
}

// ---------------------------------------------------------------- commands

int cmd_betti(const RunConfig& cfg, bool quiet) {
    json report;
    report["command"] = "betti";
    report["seed"] = cfg.seed;
    report["tolerances"] = cfg.tol.to_json();

    if (cfg.model_kind == "kronecker") {
        const auto& spec = std::get<KroneckerSpec>(cfg.model.kind);
        KroneckerReport kr = kronecker_tangential_complex(spec);
        report["model"] = "kronecker";
        report["kernel_dim"] = kr.kernel_dim;
        report["cokernel_dim"] = kr.cokernel_dim;
        report["min_nonzero_divisor"] = finite_or_null(kr.min_nonzero_divisor);
        report["pass"] = true;
        write_json(fs::path(cfg.output_dir) / "betti.json", report);
        if (!quiet) std::cout << "betti: pass (kronecker)\n";
        return 0;
    }

    LeafField field = instantiate_model(cfg.model);
    const std::vector<double> eps = cfg.epsilons.empty() ? std::vector<double>{0.0}
                                                         : cfg.epsilons;
    TrigPotential phi = effective_potential(cfg);
    const int p = field.leaves.front().grid.dim_p();

    json rows = json::array();
    std::vector<std::vector<double>> lambda_rows;
    for (double e : eps) {
        json row;
        row["epsilon"] = e;
        std::vector<double> lambda(p + 1, 0.0);
        json leaves = json::array();
        for (const auto& entry : field.leaves) {
            json leaf;
            leaf["v"] = vec_json(entry.v_coords);
            leaf["weight"] = entry.weight;
            std::optional<DeformationContext> ctx;
            if (e != 0.0)
                ctx.emplace(entry.grid, phi, entry.v_coords, e, cfg.tol.overflow_budget);
            json spectra = json::array();
            std::vector<int> betti;
            for (int k = 0; k <= p; ++k) {
                const LinearMap lap =
                    ctx ? witten_laplacian(*ctx, k) : laplacian(entry.grid, k);
                SpectrumReport rep = kernel_dimension(lap, cfg.tol.kernel);
                if (rep.ambiguous) throw AmbiguousKernelError(std::move(rep));
                betti.push_back(rep.kernel_dim);
                spectra.push_back(spectrum_json(k, rep));
            }
            for (int k = 0; k <= p; ++k) lambda[k] += entry.weight * betti[k];
            leaf["betti"] = betti;
            leaf["spectra"] = std::move(spectra);
            leaves.push_back(std::move(leaf));
        }
        row["lambda_dimensions"] = lambda;
        row["leaves"] = std::move(leaves);
        rows.push_back(std::move(row));
        lambda_rows.push_back(std::move(lambda));
    }
    bool invariant = true;
    for (const auto& lr : lambda_rows)
        if (lr != lambda_rows.front()) invariant = false;
    report["epsilons"] = eps;
    report["rows"] = std::move(rows);
    report["invariant"] = invariant;
    report["pass"] = invariant;
    write_json(fs::path(cfg.output_dir) / "betti.json", report);
    if (!quiet) std::cout << "betti: " << (invariant ? "pass" : "FAIL (invariance)") << "\n";
    return invariant ? 0 : 2;
}

int cmd_witten_sweep(const RunConfig& cfg, bool quiet) {
    if (cfg.epsilons.empty())
        throw std::invalid_argument("witten-sweep: epsilons must be a nonempty list");
    LeafField field = instantiate_model(cfg.model);
    const LeafEntry& entry = field.leaves.front();
    TrigPotential phi = effective_potential(cfg);
    const std::vector<int> degrees = effective_degrees(cfg);

    std::string csv = "epsilon,degree,eigenvalue_index,eigenvalue\r\n";
    json summary;
    summary["command"] = "witten-sweep";
    summary["seed"] = cfg.seed;
    summary["tolerances"] = cfg.tol.to_json();
    json rows = json::array();
    for (double e : cfg.epsilons) {
        json row;
        row["epsilon"] = e;
        json per_degree = json::array();
        for (int k : degrees) {
            SweepRow sw = spectral_flow(entry.grid, phi, entry.v_coords, {e}, k,
                                        cfg.tol.kernel, cfg.tol.overflow_budget)
                              .front();
            json d;
            d["degree"] = k;
            if (!sw.error.empty()) {
                d["error"] = sw.error;
            } else {
                d["kernel_dim"] = sw.report->kernel_dim;
                d["gap_ratio"] = finite_or_null(sw.report->gap_ratio);
                d["cluster_count"] = sw.cluster.cluster_count;
                d["cluster_gap_ratio"] = finite_or_null(sw.cluster.gap_ratio);
                for (size_t i = 0; i < sw.report->eigenvalues.size(); ++i)
                    csv += fmt_double(e) + "," + std::to_string(k) + "," +
                           std::to_string(i) + "," + fmt_double(sw.report->eigenvalues[i]) +
                           "\r\n";
            }
            per_degree.push_back(std::move(d));
        }
        row["per_degree"] = std::move(per_degree);
        rows.push_back(std::move(row));
    }
    summary["rows"] = std::move(rows);
    write_text(fs::path(cfg.output_dir) / "sweep.csv", csv);
    write_json(fs::path(cfg.output_dir) / "sweep_summary.json", summary);
    if (!quiet) std::cout << "witten-sweep: wrote sweep.csv, sweep_summary.json\n";
    return 0;
}

const char* class_name(SingularClass c) {
    switch (c) {
        case SingularClass::Morse: return "morse";
        case SingularClass::BirthDeath: return "birth_death";
        default: return "degenerate";
    }
}

const char* verdict_name(AuditVerdict v) {
    switch (v) {
        case AuditVerdict::Good: return "good";
        case AuditVerdict::GoodAlmostMorse: return "good_almost_morse";
        case AuditVerdict::Indeterminate: return "indeterminate";
        default: return "not_good";
    }
}

int cmd_morse_scan(const RunConfig& cfg, bool quiet) {
    if (!cfg.potential)
        throw std::invalid_argument("morse-scan: a potential is required");
    Chart chart = Chart::periodic_unit(cfg.leaf_dim);
    std::vector<Eigen::VectorXd> v_samples;
    std::optional<std::vector<int>> betti;
    if (cfg.model_kind == "chart_window") {
        chart = Chart::window(cfg.chart_bounds);
        v_samples = cfg.chart_samples;
    } else if (cfg.model_kind == "product") {
        const auto& prod = std::get<ProductSpec>(cfg.model.kind);
        v_samples = prod.transversal_samples;
        LeafField field = instantiate_model(cfg.model);
        betti = betti_numbers(field.leaves.front().grid, 0.0, nullptr, {}, cfg.tol.kernel);
    } else {
        throw std::invalid_argument("morse-scan: model must be product or chart_window");
    }
    if (v_samples.empty())
        throw std::invalid_argument("morse-scan: need at least one transversal sample");

    AlmostMorseAudit audit = almost_morse_audit(*cfg.potential, chart, v_samples,
                                                cfg.seed_resolution, cfg.tol.morse);

    json report;
    report["command"] = "morse-scan";
    report["seed"] = cfg.seed;
    report["tolerances"] = cfg.tol.to_json();
    json leaves = json::array();
    for (const auto& leaf : audit.report.leaves) {
        json lj;
        lj["v"] = vec_json(leaf.v_coords);
        json pts = json::array();
        for (const auto& pt : leaf.points) {
            json pj;
            pj["h"] = vec_json(pt.h_coords);
            pj["classification"] = class_name(pt.classification);
            pj["index"] = pt.index;
            pj["hessian_eigenvalues"] = vec_json(pt.hessian_eigenvalues);
            pj["newton_residual"] = pt.newton_residual;
            pj["third_derivative"] = pt.third_derivative;
            pj["transversality_sigma"] = pt.transversality_sigma;
            pj["transverse_escape"] = pt.transverse_escape;
            pts.push_back(std::move(pj));
        }
        lj["points"] = std::move(pts);
        lj["index_counts"] = leaf.index_counts;
        lj["all_morse"] = leaf.all_morse;
        lj["warnings"] = leaf.warnings;
        leaves.push_back(std::move(lj));
    }
    report["leaves"] = std::move(leaves);
    report["degenerate_leaf_fraction"] = audit.degenerate_leaf_fraction;
    report["flagged_samples"] = audit.flagged_samples;
    report["almost_morse_verdict"] = verdict_name(audit.verdict);

    bool pass = audit.verdict == AuditVerdict::Good ||
                audit.verdict == AuditVerdict::GoodAlmostMorse;
    if (betti) {
        report["betti"] = *betti;
        bool all_morse = true;
        for (const auto& leaf : audit.report.leaves)
            if (!leaf.all_morse) all_morse = false;
        if (all_morse) {
            MorseInequalityResult mi = morse_inequalities(audit.report, *betti);
            report["morse_inequalities"] = {{"pass", mi.pass},
                                            {"violated_degrees", mi.violated_degrees},
                                            {"euler_morse", mi.euler_morse},
                                            {"euler_betti", mi.euler_betti}};
            pass = pass && mi.pass;
        }
    }
    report["pass"] = pass;
    write_json(fs::path(cfg.output_dir) / "morse.json", report);
    if (!quiet)
        std::cout << "morse-scan: " << (pass ? "pass" : "FAIL") << " ("
                  << verdict_name(audit.verdict) << ")\n";
    return pass ? 0 : 2;
}

int cmd_hodge_check(const RunConfig& cfg, bool quiet) {
    LeafField field = instantiate_model(cfg.model);
    const LeafEntry& entry = field.leaves.front();
    const LeafGrid& grid = entry.grid;
    const int p = grid.dim_p();
    TrigPotential phi = effective_potential(cfg);
    const std::vector<double> eps = cfg.epsilons.empty() ? std::vector<double>{0.0}
                                                         : cfg.epsilons;
    const std::vector<int> degrees = effective_degrees(cfg);

    json report;
    report["command"] = "hodge-check";
    report["seed"] = cfg.seed;
    report["tolerances"] = cfg.tol.to_json();
    report["fault_injection"] = cfg.corrupt_d;
    json cases = json::array();
    bool all_pass = true;

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss;

    for (double e : eps) {
        std::optional<DeformationContext> ctx;
        if (e != 0.0) ctx.emplace(grid, phi, entry.v_coords, e, cfg.tol.overflow_budget);
        for (int k : degrees) {
            json cj;
            cj["epsilon"] = e;
            cj["degree"] = k;
            const Eigen::VectorXd mass = mass_vector(grid, k);

            Eigen::MatrixXd harm =
                ctx ? harmonic_basis(*ctx, k, cfg.tol.kernel)
                    : harmonic_basis(grid, k, cfg.tol.kernel);
            std::optional<LinearMap> d_below, d_here;
            if (k > 0)
                d_below = ctx ? deformed_differential(*ctx, k - 1)
                              : exterior_derivative(grid, k - 1);
            if (k < p)
                d_here = ctx ? deformed_differential(*ctx, k)
                             : exterior_derivative(grid, k);
            if (cfg.corrupt_d) {
                // test hook: a deliberate defect in d must surface as a
                // decomposition failure, not pass silently
                if (d_below) d_below->mat.coeffRef(0, 0) += 1e-2;
                if (d_here) d_here->mat.coeffRef(0, 0) += 1e-2;
            }

            const detail::DecompositionBases bases = detail::decomposition_bases(
                mass, harm, d_below ? &*d_below : nullptr, d_here ? &*d_here : nullptr,
                grid.cells(k));
            double residual_max = 0.0, ortho_max = 0.0;
            for (int trial = 0; trial < 20; ++trial) {
                Eigen::VectorXd omega(grid.cells(k));
                for (Eigen::Index i = 0; i < omega.size(); ++i) omega[i] = gauss(rng);
                HodgeSplit s = detail::decompose_with_bases(omega, k, bases);
                residual_max = std::max(residual_max, s.residual);
                const double n2 =
                    (omega.array() * mass.array() * omega.array()).sum();
                auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                    return std::abs((a.array() * mass.array() * b.array()).sum()) / n2;
                };
                ortho_max = std::max({ortho_max, ip(s.harmonic.values, s.exact.values),
                                      ip(s.harmonic.values, s.coexact.values),
                                      ip(s.exact.values, s.coexact.values)});
            }
            cj["residual_max"] = residual_max;
            cj["orthogonality_max"] = ortho_max;
            bool case_pass = residual_max <= cfg.tol.residual &&
                             ortho_max <= cfg.tol.orthogonality;

            if (ctx) {
                if (k < p) {
                    TransportResiduals tr = verify_transport_identities(*ctx, k);
                    cj["kernel_angle"] = tr.kernel_angle;
                    cj["image_angle"] = tr.image_angle;
                    case_pass = case_pass && tr.kernel_angle <= cfg.tol.angle &&
                                tr.image_angle <= cfg.tol.angle;
                }
                BlockReport br = verify_block_structure(*ctx, k, cfg.tol.kernel);
                // full singular value list of the harmonic corner U^k
                const Eigen::VectorXd& t = ctx->conjugator_diagonal(k);
                Eigen::MatrixXd harm_plain = harmonic_basis(grid, k, cfg.tol.kernel);
                Eigen::MatrixXd u =
                    harm.transpose() * mass.asDiagonal() * t.asDiagonal() * harm_plain;
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(u);
                cj["block"] = {{"zero_block_norm", br.zero_block_norm},
                               {"u_min_singular", br.u_min_singular},
                               {"b_min_singular", br.b_min_singular},
                               {"u_singular_values", vec_json(svd.singularValues())},
                               {"harmonic_dim", br.harmonic_dim},
                               {"exact_dim", br.exact_dim},
                               {"t_norm", br.t_norm}};
                case_pass = case_pass &&
                            br.zero_block_norm <= cfg.tol.zero_block * br.t_norm &&
                            (br.harmonic_dim == 0 || br.u_min_singular > 0.0) &&
                            (br.exact_dim == 0 || br.b_min_singular > 0.0);
            }
            cj["pass"] = case_pass;
            all_pass = all_pass && case_pass;
            cases.push_back(std::move(cj));
        }
    }
    report["cases"] = std::move(cases);
    report["pass"] = all_pass;
    write_json(fs::path(cfg.output_dir) / "hodge.json", report);
    if (!quiet) std::cout << "hodge-check: " << (all_pass ? "pass" : "FAIL") << "\n";
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leafwise Hodge-Witten numerics"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::int64_t seed_override = -1;
    bool quiet = false;
    for (const char* name : {"betti", "witten-sweep", "morse-scan", "hodge-check"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed_override, "seed (overrides config)");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    // Config / model errors are operational: exit 1 with structured JSON.
    auto fail = [&](const std::string& msg, int code) {
        json err = {{"error", msg}, {"command", cmd}};
        std::cerr << err.dump() << "\n";
        if (!out_dir.empty() || !cfg.output_dir.empty()) {
            std::error_code ec;
            const fs::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
            fs::create_directories(dir, ec);
            std::ofstream out(dir / "error.json", std::ios::binary);
            if (out) out << err.dump(2) << "\n";
        }
        return code;
    };

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read config file " + config_path);
        json root = json::parse(in);
        cfg = parse_config(root);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
            // a potential drawn from the seed must follow the override
            json root2 = root;
            root2["seed"] = cfg.seed;
            cfg = parse_config(root2);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
        }
        fs::create_directories(cfg.output_dir);

        if (cmd == "betti") return cmd_betti(cfg, quiet);
        if (cmd == "witten-sweep") return cmd_witten_sweep(cfg, quiet);
        if (cmd == "morse-scan") return cmd_morse_scan(cfg, quiet);
        return cmd_hodge_check(cfg, quiet);
    } catch (const ClaimFailure& e) {
        return fail(e.what(), 2);
    } catch (const std::exception& e) {
        return fail(e.what(), 1);
    }
}
