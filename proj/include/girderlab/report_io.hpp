#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "girderlab/metrics.hpp"

namespace girderlab {

/// 17-significant-digit decimal text; identical across runs and platforms.
std::string format_double(double v);

/// History as CSV: step, P_newtons, delta_meters, event.
void write_curve_csv(const ResponseHistory& history, const std::filesystem::path& path);

/// Events as CSV: event, step, load_newtons, displacement_meters, location.
void write_events_csv(const ResponseHistory& history, const std::filesystem::path& path);

/// Aligned plain-text table mirroring the benchmark's summary column order.
std::string format_comparison_table(const std::vector<PerformanceReport>& reports);

/// Structured report (same hierarchical format as the inputs).
std::string report_to_json(const PerformanceReport& report);
PerformanceReport report_from_json(const std::string& text);

void write_report_files(const std::vector<PerformanceReport>& reports,
                        const std::filesystem::path& directory);

}  // namespace girderlab
