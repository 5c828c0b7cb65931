// Serialization for the engine's outputs: CSV tables, law and simulation
// report JSON, and the run manifest that makes command invocations
// replayable.  All text uses LF line endings, doubles carry 17 significant
// digits, and nothing here embeds timestamps or locale state, so identical
// inputs produce byte-identical files.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mc.hpp"
#include "transforms.hpp"

namespace lpt {

// 17-significant-digit decimal, enough to round-trip any double exactly.
std::string format_g17(double v);

// Evenly spaced query grid parsed from "lo:hi:n", endpoints included.
struct Grid {
    double lo = 0.0;
    double hi = 0.0;
    long n = 0;
};
Grid parse_grid(const std::string& text);
std::vector<double> grid_points(const Grid& g);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV bodies with fixed headers per table kind.
std::string boundary_csv(const Boundary& b, const std::vector<double>& ts);   // t,f
std::string law_csv(const LastPassageLaw& law, const std::vector<double>& ts,
                    bool with_cdf);                                           // t,density[,cdf]
std::string cdf_csv(const LastPassageLaw& law, const std::vector<double>& ts,
                    bool by_projection);                                      // t,cdf
std::string hitting_csv(const HittingLaw& law, const std::vector<double>& ts);  // t,density
std::string samples_csv(const EmpiricalLaw& e);                               // sample per line

// Law description: family, parameters, boundary, start point, atom mass,
// and the normalization residual measured by the caller.
std::string law_manifest_json(const LastPassageLaw& law, double normalization_residual);

// Simulation comparison report.
std::string compare_report_json(const CompareReport& r, std::uint64_t seed);

// Everything needed to replay a run: the verbatim argument vector plus the
// resolved inputs and the files the run wrote.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;  // tokens after the program name, verbatim
    std::string diffusion;          // resolved family/parameter text
    std::string boundary;           // boundary grammar text
    double x = 0.0;
    std::string grid;  // "lo:hi:n" as given, empty when the run has no grid
    std::uint64_t seed = 0;
    double abs_tol = 0.0;
    double rel_tol = 0.0;
    std::vector<std::string> outputs;
    std::string residual_summary;

    bool operator==(const RunManifest&) const = default;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

}  // namespace lpt
