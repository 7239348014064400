#include "openq/report.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace openq {

Json to_json(const Report& report) {
  Json out = Json::object();
  out["command"] = report.command;
  out["params"] = report.params;
  out["backend"] = report.backend;
  out["results"] = report.results;
  out["residuals"] = report.residuals;
  out["timing"] = report.timing;
  return out;
}

std::string render_json(const Report& report) { return to_json(report).dump(2) + "\n"; }

namespace {

std::string csv_cell(const Json& v) {
  std::string text;
  if (v.is_string()) {
    text = v.get<std::string>();
  } else if (v.is_null()) {
    text = "";
  } else {
    text = v.dump();
  }
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string render_csv(const Report& report) {
  std::vector<std::string> columns;
  for (const auto& row : report.results) {
    if (!row.is_object()) continue;
    for (const auto& item : row.items()) {
      if (std::find(columns.begin(), columns.end(), item.key()) == columns.end()) columns.push_back(item.key());
    }
  }
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << csv_cell(Json(columns[c]));
  out << "\n";
  for (const auto& row : report.results) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ",";
      if (row.is_object() && row.contains(columns[c])) out << csv_cell(row.at(columns[c]));
    }
    out << "\n";
  }
  return out.str();
}

std::string format_real(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json residual_json(const ResidualReport& r) {
  Json out = Json::object();
  out["relation"] = std::string(relation_id(r.relation));
  out["backend"] = r.backend;
  out["x"] = r.x;
  out["y"] = r.y;
  out["p"] = r.p;
  out["q"] = r.q;
  out["sites"] = r.n_sites;
  out["twice_s"] = r.twice_s;
  out["cutoff"] = r.cutoff;
  if (is_truncated_sum(r.relation)) {
    out["i"] = r.i;
    out["j"] = r.j;
  }
  out["residual"] = format_real(r.residual);
  out["scale"] = format_real(r.scale);
  out["exact"] = r.exact;
  out["passed"] = r.passed;
  return out;
}

}  // namespace openq
