#include "fgff/cumulants.hpp"

namespace fgff {

std::string to_string(FieldKind k) {
  switch (k) {
    case FieldKind::NegX: return "negx";
    case FieldKind::Degree: return "degree";
    case FieldKind::XY: return "xy";
  }
  return "?";
}

std::string to_string(CumulantPath p) { return p == CumulantPath::ClosedForm ? "closed_form" : "partition_sum"; }

FieldKind field_kind_from_string(const std::string& s) {
  if (s == "negx") return FieldKind::NegX;
  if (s == "degree") return FieldKind::Degree;
  if (s == "xy") return FieldKind::XY;
  throw InvalidInput("unknown field kind: " + s);
}

nlohmann::json CumulantReport::to_json() const {
  nlohmann::json j;
  j["field"] = to_string(field);
  j["lattice"] = lattice;
  j["points"] = points;
  j["value"] = value;
  if (!exact.empty()) j["exact"] = exact;
  j["path"] = to_string(path);
  j["term_count"] = stats.term_count;
  j["max_term_magnitude"] = stats.max_term_magnitude;
  if (stats.moment_fallback) j["moment_fallback"] = true;
  return j;
}

}  // namespace fgff
