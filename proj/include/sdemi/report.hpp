#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdemi/classify.hpp"
#include "sdemi/config.hpp"
#include "sdemi/mmse_info.hpp"

namespace sdemi {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Fixed formatting keeps outputs byte-identical across runs and worker
// counts: %.17g round-trips doubles exactly.
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

// CSV emitters (RFC-4180-style, '.' decimal separator, LF line endings).
// Headers are part of the public schema:
//   mmse_surface.csv: t,s,r,cmmse,cmmse_se,ncmmse,ncmmse_se
//   info_curve.csv:   r,t,estimator,value,se
std::string render_mmse_surface_csv(const MmseSurface& surface);
std::string render_info_curve_csv(const InfoCurve& info);

nlohmann::json identity_report_json(const std::string& system_id, const SnrClassReport& verdict,
                                    const EnsembleResult& result,
                                    const IdentityResidualReport& report);

nlohmann::json class_report_json(const std::string& system_id, SnrClass expected,
                                 const SnrClassReport& report);

struct EmittedFile {
  std::string name;
  std::size_t bytes = 0;
  std::string digest;  // fnv1a64 of the content, hex
};

// Writes content to out_dir/name and records size and digest.
EmittedFile write_file(const std::string& out_dir, const std::string& name,
                       const std::string& content);

nlohmann::json manifest_json(const std::string& command, const ExperimentConfig& config,
                             const EnsembleResult& result,
                             const std::map<std::string, double>& timings_ms,
                             const std::vector<EmittedFile>& files);

// Plot-ready whitespace-separated series, re-emitted from the CSV strings so
// values match the CSVs bit for bit. Returns the files written; throws
// std::runtime_error when the inputs are missing.
std::vector<EmittedFile> emit_plotdata(const std::string& out_dir);

}  // namespace sdemi
