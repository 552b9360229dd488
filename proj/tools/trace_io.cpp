#include "trace_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fixcalc/error.hpp"

namespace fixcalc::cli {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json point_json(const Point& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : p.coords()) arr.push_back(v);
  return arr;
}

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
  std::string out = "k,residual,step,dist_to_ref";
  const std::size_t dim = trace.rows.empty() ? 0 : trace.rows.front().x.dim();
  for (std::size_t i = 0; i < dim; ++i) out += ",x_" + std::to_string(i);
  out += '\n';
  for (const auto& row : trace.rows) {
    out += std::to_string(row.k);
    out += ',' + g17(row.residual);
    out += ',' + (row.step ? g17(*row.step) : std::string());
    out += ',' + (row.dist_to_ref ? g17(*row.dist_to_ref) : std::string());
    for (double v : row.x.coords()) out += ',' + g17(v);
    out += '\n';
  }
  return out;
}

nlohmann::json trace_json(const IterationTrace& trace, const std::string& method, const nlohmann::json& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : trace.rows) {
    rows.push_back({{"k", row.k},
                    {"residual", row.residual},
                    {"step", row.step ? nlohmann::json(*row.step) : nlohmann::json()},
                    {"dist_to_ref", row.dist_to_ref ? nlohmann::json(*row.dist_to_ref) : nlohmann::json()},
                    {"x", point_json(row.x)}});
  }
  nlohmann::json j{{"method", method},
                   {"status", std::string(to_string(trace.status))},
                   {"iterations", trace.iterations()},
                   {"final_residual", trace.last().residual},
                   {"fejer_monitored", trace.fejer_monitored},
                   {"rows", std::move(rows)},
                   {"config", config}};
  if (trace.fejer_monitored) j["worst_fejer_violation"] = trace.worst_fejer_violation;
  return j;
}

nlohmann::json report_json(const CheckReport& report) {
  nlohmann::json witnesses = nlohmann::json::array();
  for (const auto& w : report.witnesses) {
    nlohmann::json jw{{"index", w.index}, {"x", point_json(w.x)}, {"slack", w.slack}};
    if (w.y) jw["y"] = point_json(*w.y);
    if (w.z) jw["z"] = point_json(*w.z);
    witnesses.push_back(std::move(jw));
  }
  return {{"property", report.property},
          {"samples", report.samples},
          {"worst_slack", report.worst_slack},
          {"tol", report.tol},
          {"verdict", std::string(to_string(report.verdict))},
          {"witnesses", std::move(witnesses)}};
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory for '" + path + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::Io, "cannot rename into '" + path + "': " + ec.message());
  }
}

std::string expand_path(std::string templ, const std::string& method) {
  const std::string key = "{method}";
  for (std::size_t pos; (pos = templ.find(key)) != std::string::npos;) templ.replace(pos, key.size(), method);
  return templ;
}

}  // namespace fixcalc::cli
