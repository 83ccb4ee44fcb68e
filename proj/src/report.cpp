#include "segkit/report.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

namespace segkit {

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

} // namespace

ReportDocument render_report(const std::vector<ReportRow>& rows, ReportKind kind) {
    const std::vector<std::string> columns =
        kind == ReportKind::segmentation
            ? std::vector<std::string>{"mDice", "mIoU", "ME"}
            : std::vector<std::string>{"Precision", "Recall", "F1", "mAP@0.5", "mAP@0.5:0.95"};

    auto values_of = [&](const MetricsReport& r) {
        return kind == ReportKind::segmentation
                   ? std::vector<double>{r.mdice, r.miou, r.me}
                   : std::vector<double>{r.mean_precision, r.mean_recall, r.mean_f1, r.map50,
                                         r.map_50_95};
    };

    std::size_t name_width = std::string("Network").size();
    for (const ReportRow& row : rows) {
        name_width = std::max(name_width, row.name.size());
    }

    std::ostringstream text;
    text << pad("Network", name_width + 2);
    for (const std::string& c : columns) {
        text << pad(c, 14);
    }
    text << "\n";
    for (const ReportRow& row : rows) {
        text << pad(row.name, name_width + 2);
        for (double v : values_of(row.report)) {
            text << pad(fixed4(v), 14);
        }
        text << "\n";
    }

    nlohmann::json records;
    records["kind"] = kind == ReportKind::segmentation ? "segmentation" : "detection";
    records["columns"] = columns;
    records["rows"] = nlohmann::json::array();
    for (const ReportRow& row : rows) {
        nlohmann::json jr;
        jr["name"] = row.name;
        const auto vals = values_of(row.report);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            jr[columns[i]] = vals[i];
        }
        if (kind == ReportKind::segmentation) {
            jr["per_class_iou"] = row.report.iou;
            jr["per_class_dice"] = row.report.dice;
        } else {
            jr["per_class_precision"] = row.report.precision;
            jr["per_class_recall"] = row.report.recall;
        }
        records["rows"].push_back(jr);
    }
    return {text.str(), std::move(records)};
}

} // namespace segkit
