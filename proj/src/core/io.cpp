#include "io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "numkernel.hpp"

namespace lpt {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Grid parse_grid(const std::string& text) {
    Grid g;
    char tail = 0;
    int got = std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &g.lo, &g.hi, &g.n, &tail);
    if (got != 3) fail_domain("grid: expected lo:hi:n, got \"" + text + "\"");
    if (!std::isfinite(g.lo) || !std::isfinite(g.hi)) fail_domain("grid: endpoints must be finite");
    bool ok = (g.n >= 2 && g.hi > g.lo) || (g.n == 1 && g.hi == g.lo);
    if (!ok) fail_domain("grid: need hi > lo with n >= 2 (or hi == lo with n = 1)");
    return g;
}

std::vector<double> grid_points(const Grid& g) {
    std::vector<double> ts(static_cast<std::size_t>(g.n));
    for (long i = 0; i < g.n; ++i)
        ts[static_cast<std::size_t>(i)] =
            g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * double(i) / double(g.n - 1);
    return ts;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_domain("io: cannot open \"" + path + "\" for writing");
    out << content;
    if (!out) fail_domain("io: short write to \"" + path + "\"");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_domain("io: cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string boundary_csv(const Boundary& b, const std::vector<double>& ts) {
    std::string out = "t,f\n";
    for (double t : ts) out += format_g17(t) + "," + format_g17(b.f(t)) + "\n";
    return out;
}

std::string law_csv(const LastPassageLaw& law, const std::vector<double>& ts, bool with_cdf) {
    std::string out = with_cdf ? "t,density,cdf\n" : "t,density\n";
    for (double t : ts) {
        out += format_g17(t) + "," + format_g17(law.density(t));
        if (with_cdf) out += "," + format_g17(law.cdf(t));
        out += "\n";
    }
    return out;
}

std::string cdf_csv(const LastPassageLaw& law, const std::vector<double>& ts, bool by_projection) {
    std::string out = "t,cdf\n";
    for (double t : ts) {
        double v = by_projection ? law.cdf_by_projection(t) : law.cdf(t);
        out += format_g17(t) + "," + format_g17(v) + "\n";
    }
    return out;
}

std::string hitting_csv(const HittingLaw& law, const std::vector<double>& ts) {
    std::string out = "t,density\n";
    for (double t : ts) out += format_g17(t) + "," + format_g17(law.density(t)) + "\n";
    return out;
}

std::string samples_csv(const EmpiricalLaw& e) {
    std::string out = "sample\n";
    for (double s : e.samples) out += format_g17(s) + "\n";
    return out;
}

namespace {

const char* family_name(Family f) {
    switch (f) {
        case Family::bm_drift: return "bm_drift";
        case Family::reflected_bm: return "reflected_bm";
        case Family::bessel: return "bessel";
        case Family::bessel_drift: return "bessel_drift";
        case Family::radial_ou: return "radial_ou";
    }
    return "?";
}

json diffusion_json(const Diffusion& d) {
    json j;
    j["family"] = family_name(d.family);
    switch (d.family) {
        case Family::bm_drift: j["mu"] = d.mu; break;
        case Family::reflected_bm: break;
        case Family::bessel: j["nu"] = d.nu; break;
        case Family::bessel_drift:
            j["nu"] = d.nu;
            j["c"] = d.drift_c;
            break;
        case Family::radial_ou:
            j["nu"] = d.nu;
            j["gamma"] = d.gamma;
            break;
    }
    return j;
}

}  // namespace

std::string law_manifest_json(const LastPassageLaw& law, double normalization_residual) {
    json j;
    j["diffusion"] = diffusion_json(law.d);
    j["boundary"] = law.boundary.description;
    j["boundary_kind"] = law.boundary.kind == BoundaryKind::lower ? "lower" : "upper";
    j["zeta"] = std::isfinite(law.boundary.zeta) ? json(law.boundary.zeta) : json();
    j["case"] = law.surv.case_id;
    j["x"] = law.x;
    j["atom0"] = law.atom0;
    j["normalization_residual"] = normalization_residual;
    return j.dump(2) + "\n";
}

std::string compare_report_json(const CompareReport& r, std::uint64_t seed) {
    json j;
    j["ks"] = r.ks;
    j["n"] = r.n;
    j["atom_model"] = r.atom_model;
    j["atom_empirical"] = r.atom_empirical;
    j["atom_se"] = r.atom_se;
    j["never_model"] = r.never_model;
    j["never_empirical"] = r.never_empirical;
    json errs = json::array();
    for (const MomentCheck& m : r.moments) {
        errs.push_back({{"power", m.power},
                        {"model", m.model},
                        {"empirical", m.empirical},
                        {"se", m.se},
                        {"zscore", m.zscore}});
    }
    j["moment_errors"] = errs;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["diffusion"] = m.diffusion;
    j["boundary"] = m.boundary;
    j["x"] = m.x;
    j["grid"] = m.grid;
    j["seed"] = m.seed;
    j["abs_tol"] = m.abs_tol;
    j["rel_tol"] = m.rel_tol;
    j["outputs"] = m.outputs;
    j["residual_summary"] = m.residual_summary;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail_domain(std::string("manifest: parse failure: ") + e.what());
    }
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.diffusion = j.at("diffusion").get<std::string>();
        m.boundary = j.at("boundary").get<std::string>();
        m.x = j.at("x").get<double>();
        m.grid = j.at("grid").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.abs_tol = j.at("abs_tol").get<double>();
        m.rel_tol = j.at("rel_tol").get<double>();
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.residual_summary = j.at("residual_summary").get<std::string>();
    } catch (const json::exception& e) {
        fail_domain(std::string("manifest: missing or mistyped field: ") + e.what());
    }
    return m;
}

}  // namespace lpt
