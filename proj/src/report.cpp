#include "shadowval/report.hpp"

#include <fstream>

#include "shadowval/error.hpp"

namespace shadowval {

std::string report_version() { return "shadowval 0.1.0"; }

nlohmann::json make_report(const std::string& command, const nlohmann::json& config) {
  nlohmann::json j;
  j["version"] = report_version();
  j["command"] = command;
  j["config"] = config;
  return j;
}

void finish_report(nlohmann::json& report, double seconds) { report["seconds"] = seconds; }

namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    std::size_t i = 0;
    for (const auto& v : j) flatten(v, prefix + "[" + std::to_string(i++) + "]", os);
  } else {
    os << prefix << "," << j.dump() << "\n";
  }
}

}  // namespace

void write_report(const nlohmann::json& report, const std::string& path) {
  {
    std::ofstream out(path);
    require(out.good(), ErrorKind::invalid_input, "cannot open report path: " + path);
    out << report.dump(2) << "\n";
  }
  std::string csv = path;
  if (csv.size() > 5 && csv.substr(csv.size() - 5) == ".json") csv = csv.substr(0, csv.size() - 5);
  csv += ".csv";
  std::ofstream out(csv);
  require(out.good(), ErrorKind::invalid_input, "cannot open report path: " + csv);
  out << "key,value\n";
  flatten(report, "", out);
}

}  // namespace shadowval
