#include "sdemi/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sdemi {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing results: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(const std::string& data) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

std::string render_mmse_surface_csv(const MmseSurface& surface) {
  if (surface.smoothing != SmoothingMode::AllWindows)
    throw std::invalid_argument("surface CSV requires the full smoothing tensor");
  std::string out = "t,s,r,cmmse,cmmse_se,ncmmse,ncmmse_se\n";
  const int np = surface.n_points();
  for (std::size_t ri = 0; ri < surface.r_grid.size(); ++ri) {
    const std::string r = format_double(surface.r_grid[ri]);
    for (int k = 0; k < np; ++k) {
      const std::string t = format_double(surface.grid.time(k));
      const std::string cm = format_double(surface.cmmse_at(ri, k));
      const std::string cm_se = format_double(surface.cmmse_se_at(ri, k));
      for (int j = 0; j <= k; ++j) {
        out += t;
        out += ',';
        out += format_double(surface.grid.time(j));
        out += ',';
        out += r;
        out += ',';
        out += cm;
        out += ',';
        out += cm_se;
        out += ',';
        out += format_double(surface.ncmmse_at(ri, k, j));
        out += ',';
        out += format_double(surface.ncmmse_se_at(ri, k, j));
        out += '\n';
      }
    }
  }
  return out;
}

std::string render_info_curve_csv(const InfoCurve& info) {
  std::string out = "r,t,estimator,value,se\n";
  const int np = info.n_points();
  for (std::size_t ri = 0; ri < info.r_grid.size(); ++ri) {
    const std::string r = format_double(info.r_grid[ri]);
    for (const char* estimator : {"duncan", "direct"}) {
      const bool duncan = std::string(estimator) == "duncan";
      for (int k = 0; k < np; ++k) {
        const std::size_t i = ri * np + k;
        out += r;
        out += ',';
        out += format_double(info.grid.time(k));
        out += ',';
        out += estimator;
        out += ',';
        out += format_double(duncan ? info.ii_duncan[i] : info.ii_direct[i]);
        out += ',';
        out += format_double(duncan ? info.ii_duncan_se[i] : info.ii_direct_se[i]);
        out += '\n';
      }
    }
    if (info.gsv_available && !std::isnan(info.i_gsv[ri])) {
      out += r;
      out += ',';
      out += format_double(info.grid.horizon());
      out += ",gsv,";
      out += format_double(info.i_gsv[ri]);
      out += ',';
      out += format_double(info.i_gsv_se[ri]);
      out += '\n';
    }
  }
  return out;
}

namespace {

json entry_json(const ResidualEntry& e) {
  json out{{"r", e.r},         {"lhs", e.lhs},           {"rhs", e.rhs},
           {"residual", e.residual}, {"se", e.se},       {"tolerance", e.tolerance},
           {"pass", e.pass}};
  if (e.t) out["t"] = *e.t;
  return out;
}

}  // namespace

json identity_report_json(const std::string& system_id, const SnrClassReport& verdict,
                          const EnsembleResult& result, const IdentityResidualReport& report) {
  json families = json::array();
  for (const char* name : {"duncan", "gsv", "cor1", "d1_time", "d1_snr", "cor3_mixed"}) {
    std::vector<const ResidualEntry*> entries;
    for (const auto& e : report.entries)
      if (e.family == name) entries.push_back(&e);
    if (entries.empty()) continue;

    json fam;
    fam["name"] = name;
    fam["diagnostic"] = entries.front()->diagnostic;
    bool fam_pass = true;
    json rows = json::array();

    const bool per_t = entries.front()->t.has_value();
    if (!per_t) {
      for (const auto* e : entries) {
        rows.push_back(entry_json(*e));
        fam_pass = fam_pass && e->pass;
      }
    } else {
      // Summarize t-indexed families per r: the worst interior point plus
      // pass/fail counts.
      std::vector<double> r_seen;
      for (const auto* e : entries)
        if (std::find(r_seen.begin(), r_seen.end(), e->r) == r_seen.end())
          r_seen.push_back(e->r);
      for (double r : r_seen) {
        const ResidualEntry* worst = nullptr;
        int n_points = 0, n_failed = 0;
        for (const auto* e : entries) {
          if (e->r != r) continue;
          ++n_points;
          if (!e->pass) ++n_failed;
          if (!worst || e->residual - e->tolerance > worst->residual - worst->tolerance)
            worst = e;
        }
        json row = entry_json(*worst);
        row["n_points"] = n_points;
        row["n_failed"] = n_failed;
        row["pass"] = n_failed == 0;
        rows.push_back(row);
        fam_pass = fam_pass && n_failed == 0;
      }
    }
    fam["entries"] = rows;
    fam["pass"] = fam_pass;
    families.push_back(fam);
  }

  json out;
  out["system"] = system_id;
  out["verdict"] = to_string(verdict.verdict);
  out["replicates"] = {{"requested", result.spec.n_replicates},
                       {"effective", result.surface.n_effective},
                       {"aborted", result.surface.n_aborted}};
  out["families"] = families;
  out["skipped"] = report.skipped;
  out["overall_pass"] = report.all_applicable_pass;
  return out;
}

json class_report_json(const std::string& system_id, SnrClass expected,
                       const SnrClassReport& report) {
  json probes = json::array();
  for (const auto& p : report.evidence) {
    json pj{{"name", p.name}, {"n_probes", p.n_probes}, {"violations", p.violations}};
    if (p.first_witness) {
      pj["witness"] = {{"k", p.first_witness->k},
                       {"lhs", p.first_witness->lhs},
                       {"rhs", p.first_witness->rhs},
                       {"what", p.first_witness->what}};
    }
    probes.push_back(pj);
  }
  return json{{"system", system_id},
              {"expected_class", to_string(expected)},
              {"verdict", to_string(report.verdict)},
              {"probabilistic", report.probabilistic},
              {"probes", probes}};
}

EmittedFile write_file(const std::string& out_dir, const std::string& name,
                       const std::string& content) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = std::filesystem::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  return {name, content.size(), fnv1a64_hex(content)};
}

json manifest_json(const std::string& command, const ExperimentConfig& config,
                   const EnsembleResult& result, const std::map<std::string, double>& timings_ms,
                   const std::vector<EmittedFile>& files) {
  json file_list = json::array();
  for (const auto& f : files)
    file_list.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.digest}});
  return json{{"artifact_version", kArtifactVersion},
              {"command", command},
              {"config", config.echo},
              {"effective",
               {{"system", config.system_id},
                {"master_seed", config.master_seed},
                {"replicates", config.replicates},
                {"out_dir", config.out_dir}}},
              {"replicates",
               {{"requested", result.spec.n_replicates},
                {"effective", result.surface.n_effective},
                {"aborted", result.surface.n_aborted}}},
              {"timings_ms", timings_ms},
              {"files", file_list}};
}

std::vector<EmittedFile> emit_plotdata(const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto surface_lines = read_lines((fs::path(out_dir) / "mmse_surface.csv").string());
  const auto info_lines = read_lines((fs::path(out_dir) / "info_curve.csv").string());

  std::vector<EmittedFile> written;

  // cmmse vs t, one block per r, from the diagonal rows (s == t).
  {
    std::string out;
    std::string current_r;
    for (std::size_t i = 1; i < surface_lines.size(); ++i) {
      const auto f = split(surface_lines[i], ',');
      if (f.size() < 7 || f[0] != f[1]) continue;
      if (f[2] != current_r) {
        if (!current_r.empty()) out += "\n";
        current_r = f[2];
        out += "# r=" + current_r + "\n";
      }
      out += f[0] + " " + f[3] + "\n";
    }
    written.push_back(write_file(out_dir, "cmmse_vs_t.dat", out));
  }

  // I vs r, one block per estimator, taking the t = T row of each group.
  {
    std::vector<std::string> estimators;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> series;
    std::map<std::string, std::string> last;  // (estimator|r) -> value
    std::vector<std::pair<std::string, std::string>> order;
    for (std::size_t i = 1; i < info_lines.size(); ++i) {
      const auto f = split(info_lines[i], ',');
      if (f.size() < 5) continue;
      const std::string key = f[2] + "|" + f[0];
      if (!last.count(key)) order.emplace_back(f[2], f[0]);
      last[key] = f[3];
    }
    for (const auto& [estimator, r] : order) {
      if (std::find(estimators.begin(), estimators.end(), estimator) == estimators.end())
        estimators.push_back(estimator);
      series[estimator].emplace_back(r, last[estimator + "|" + r]);
    }
    std::string out;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      if (e > 0) out += "\n";
      out += "# estimator=" + estimators[e] + "\n";
      for (const auto& [r, v] : series[estimators[e]]) out += r + " " + v + "\n";
    }
    written.push_back(write_file(out_dir, "i_vs_r.dat", out));
  }

  // I_i vs t, one block per (r, estimator), duncan and direct only.
  {
    std::string out;
    std::string current;
    for (std::size_t i = 1; i < info_lines.size(); ++i) {
      const auto f = split(info_lines[i], ',');
      if (f.size() < 5 || (f[2] != "duncan" && f[2] != "direct")) continue;
      const std::string key = "# r=" + f[0] + " estimator=" + f[2];
      if (key != current) {
        if (!current.empty()) out += "\n";
        current = key;
        out += key + "\n";
      }
      out += f[1] + " " + f[3] + "\n";
    }
    written.push_back(write_file(out_dir, "ii_vs_t.dat", out));
  }

  // Residuals vs r, when a verification report is present.
  const fs::path report_path = fs::path(out_dir) / "identity_report.json";
  if (fs::exists(report_path)) {
    std::ifstream in(report_path);
    nlohmann::json report = nlohmann::json::parse(in);
    std::string out;
    bool first = true;
    for (const auto& fam : report.at("families")) {
      if (!first) out += "\n";
      first = false;
      out += "# family=" + fam.at("name").get<std::string>() + "\n";
      for (const auto& e : fam.at("entries"))
        out += format_double(e.at("r").get<double>()) + " " +
               format_double(e.at("residual").get<double>()) + "\n";
    }
    written.push_back(write_file(out_dir, "residuals_vs_r.dat", out));
  }

  return written;
}

}  // namespace sdemi
