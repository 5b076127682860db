#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "currseg/evaluate.hpp"

namespace currseg {

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string fixed9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

// Which prompt channels a scenario tag exercises, for the ablation table.
inline bool scenario_flags(const std::string& tag, bool& point, bool& box,
                           bool& mask) {
  const std::string base = tag.substr(0, tag.find('/'));
  if (base == "point-only") { point = true; box = false; mask = false; return true; }
  if (base == "box-only") { point = false; box = true; mask = false; return true; }
  if (base == "box-plus-mask") { point = false; box = true; mask = true; return true; }
  if (base == "point-plus-box-simultaneous") { point = true; box = true; mask = false; return true; }
  if (base == "full-curriculum") { point = true; box = true; mask = true; return true; }
  return false;
}

}  // namespace detail

// Writes report.csv (one row per image/scenario/stage) and summary.md (the
// per-scenario mean table plus the config fingerprint). Output depends only
// on the report content, never on wall-clock time.
inline void emit_report(const EvalReport& report,
                        const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw DataError("emit_report: cannot create " + out_dir.string() + ": " +
                    ec.message());

  {
    std::ofstream csv(out_dir / "report.csv", std::ios::trunc);
    if (!csv) throw DataError("emit_report: cannot write report.csv");
    csv << "id,scenario,stage,dice,iou,error_note\n";
    for (const auto& row : report.rows)
      csv << detail::csv_escape(row.id) << "," << detail::csv_escape(row.scenario)
          << "," << row.stage << "," << detail::fixed9(row.dice) << ","
          << detail::fixed9(row.iou) << "," << detail::csv_escape(row.error_note)
          << "\n";
    if (!csv) throw DataError("emit_report: write failed for report.csv");
  }

  {
    std::ofstream md(out_dir / "summary.md", std::ios::trunc);
    if (!md) throw DataError("emit_report: cannot write summary.md");
    md << "# Evaluation summary\n\n";
    md << "config fingerprint: `" << report.config_fingerprint << "`\n\n";
    md << "```\n";
    md << "| Point | BBox | Mask | scenario | mDice | mIoU | images |\n";
    md << "|-------|------|------|----------|-------|------|--------|\n";
    for (const auto& m : report.means) {
      bool point = false, box = false, mask = false;
      const bool known = detail::scenario_flags(m.scenario, point, box, mask);
      auto mark = [&](bool b) { return known ? (b ? "  x  " : "     ") : "  ?  "; };
      md << "| " << mark(point) << " | " << mark(box) << " | " << mark(mask)
         << " | " << m.scenario << " | " << detail::fixed9(m.mean_dice) << " | "
         << detail::fixed9(m.mean_iou) << " | " << m.images << " |\n";
    }
    md << "```\n";
    if (!md) throw DataError("emit_report: write failed for summary.md");
  }
}

}  // namespace currseg
