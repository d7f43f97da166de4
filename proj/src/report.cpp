#include "wpath/report.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace wpath {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string report_json(const SolveReport& rep) {
  nlohmann::ordered_json doc;
  doc["status"] = std::string(to_string(rep.status));
  doc["x_star"] = std::vector<double>(rep.x_star.data(), rep.x_star.data() + rep.x_star.size());
  doc["objective"] = number(rep.objective);
  doc["active_set"] = std::vector<long>(rep.active_set.begin(), rep.active_set.end());
  doc["iterations"] = rep.iterations;
  doc["linear_solves"] = rep.linear_solves;
  doc["audits"] = rep.audits;
  doc["rollbacks"] = rep.rollbacks;
  doc["duality_gap_bound"] = number(rep.duality_gap_bound);
  doc["wall_time"] = rep.wall_time;
  doc["mode"] = std::string(to_string(rep.mode));
  doc["bit_complexity"] = rep.bit_complexity;
  doc["notes"] = rep.notes;
  return doc.dump(2) + "\n";
}

std::string report_text(const SolveReport& rep) {
  std::ostringstream out;
  out.precision(12);
  out << "status:            " << to_string(rep.status) << "\n";
  if (rep.status == SolveStatus::Optimal) {
    out << "objective:         " << rep.objective << "\n";
    out << "x_star:           ";
    for (Index i = 0; i < rep.x_star.size(); ++i) out << ' ' << rep.x_star[i];
    out << "\nactive_set:       ";
    for (Index i : rep.active_set) out << ' ' << i;
    out << "\n";
  }
  out << "duality_gap_bound: " << rep.duality_gap_bound << "\n";
  out << "iterations:        " << rep.iterations << "\n";
  out << "linear_solves:     " << rep.linear_solves << "\n";
  out << "audits:            " << rep.audits << "\n";
  out << "rollbacks:         " << rep.rollbacks << "\n";
  out << "mode:              " << to_string(rep.mode) << "\n";
  out << "wall_time:         " << rep.wall_time << " ms\n";
  for (const std::string& note : rep.notes) out << "note: " << note << "\n";
  return out.str();
}

std::string trace_json(const TraceRecord& rec) {
  nlohmann::ordered_json doc;
  doc["iter"] = rec.iter;
  doc["t"] = number(rec.t);
  doc["delta"] = number(rec.delta);
  doc["phi"] = number(rec.phi);
  doc["wall_time"] = rec.wall_time * 1e3;
  return doc.dump();
}

}  // namespace wpath
