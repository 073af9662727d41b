#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "insulab/geometry.hpp"
#include "insulab/heat_content.hpp"
#include "insulab/radial_exact.hpp"
#include "insulab/temp_decay.hpp"

namespace insulab::report {

using nlohmann::json;

inline constexpr const char* kSchema = "insulab-v1";
inline constexpr const char* kScanHeader = "m,lambda_m,vanish_measure,min_trace";

json domain_json(const DomainSpec& spec);
json m1_json(const heat::M1Report& r);
json m0_json(const decay::M0Report& r);
json ball_json(const radial::BallThresholds& b);
/// Boundary data of a minimiser: trace and optimal material density keyed by
/// vertex id, vanishing edges as vertex pairs, and the delta schedule.
json minimizer_json(const Discretization& disc, std::span<const double> u, double m, const heat::VanishingSet& vanishing,
                    const std::vector<double>& schedule);

/// CSV with kScanHeader; numbers in shortest round-trip form.
std::string scan_csv(const std::vector<decay::ScanRow>& rows);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> x_marks;  ///< dashed verticals
};

/// Standalone SVG document, one polyline per series.
std::string svg(const Plot& plot);

/// Pretty-printed JSON plus trailing newline.
std::string dump(const json& doc);

void write_text(const std::string& path, const std::string& text);

}  // namespace insulab::report
