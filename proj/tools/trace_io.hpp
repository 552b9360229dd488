#pragma once

#include <string>

#include <json.hpp>

#include "fixcalc/solver.hpp"
#include "fixcalc/verify.hpp"

namespace fixcalc::cli {

/// CSV with header k,residual,step,dist_to_ref,x_0..x_{n-1}; floats use 17
/// significant digits and absent values are empty fields.
std::string trace_csv(const IterationTrace& trace);

/// The trace rows plus method, status and the config echo.
nlohmann::json trace_json(const IterationTrace& trace, const std::string& method, const nlohmann::json& config);

nlohmann::json report_json(const CheckReport& report);

/// Writes to a temporary file beside `path` and renames it into place,
/// creating parent directories as needed.
void atomic_write(const std::string& path, const std::string& content);

/// Replaces every "{method}" in the template.
std::string expand_path(std::string templ, const std::string& method);

}  // namespace fixcalc::cli
