#pragma once

#include <string>
#include <vector>

namespace mwtgc::svg {

/// Single-series line chart (e.g. loss curve).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<double>& ys);

/// Labeled bar chart (e.g. RMSE per horizon).
void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& labels, const std::vector<double>& values);

} // namespace mwtgc::svg
