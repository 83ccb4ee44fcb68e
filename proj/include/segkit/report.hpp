#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "segkit/metrics.hpp"

namespace segkit {

enum class ReportKind { segmentation, detection };

struct ReportRow {
    std::string name;
    MetricsReport report;
};

/// Table-style rendering of a set of metric reports: an aligned plain-text
/// table with ratios at 4 decimal places, plus machine-readable records
/// carrying the same values at full precision. Segmentation tables show
/// mDice/mIoU/ME; detection tables show Precision/Recall/F1/mAP@0.5/
/// mAP@0.5:0.95.
struct ReportDocument {
    std::string text;
    nlohmann::json records;
};

ReportDocument render_report(const std::vector<ReportRow>& rows, ReportKind kind);

} // namespace segkit
