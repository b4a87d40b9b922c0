#include "girderlab/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace girderlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curve_csv(const ResponseHistory& history, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "step,P_newtons,delta_meters,event\n";
    for (size_t i = 0; i < history.steps.size(); ++i) {
        std::string events;
        for (const auto& e : history.events)
            if (e.step == (int)i + 1) {
                if (!events.empty()) events += ';';
                events += event_kind_name(e.kind);
            }
        out << (i + 1) << ',' << format_double(history.steps[i].load) << ','
            << format_double(history.steps[i].displacement) << ',' << events << '\n';
    }
    std::ofstream f(path);
    f << out.str();
}

void write_events_csv(const ResponseHistory& history, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "event,step,load_newtons,displacement_meters,location\n";
    for (const auto& e : history.events) {
        std::string loc = e.location;
        for (auto& c : loc)
            if (c == ',') c = ';';
        out << event_kind_name(e.kind) << ',' << e.step << ',' << format_double(e.load) << ','
            << format_double(e.displacement) << ',' << loc << '\n';
    }
    std::ofstream f(path);
    f << out.str();
}

namespace {

std::string fixed(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

}  // namespace

std::string format_comparison_table(const std::vector<PerformanceReport>& reports) {
    std::ostringstream out;
    const char* hdr[7] = {"Scenario",          "Design Capacity (kN)", "Ultimate Capacity (kN)",
                          "Reserve Capacity (kN)", "Reduction in System Redundancy (%)",
                          "System Ductility",  "Reduction in System Ductility (%)"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        std::vector<std::string> row(7);
        row[0] = r.scenario;
        row[1] = fixed(r.design_capacity / 1e3, 0);
        row[2] = fixed(r.ultimate_capacity / 1e3, 0);
        row[3] = fixed(r.reserve_capacity / 1e3, 0);
        row[4] = r.redundancy_reduction_pct ? fixed(*r.redundancy_reduction_pct, 1) : "-";
        row[5] = r.ductility > 0.0 ? fixed(r.ductility, 2) : "-";
        row[6] = r.ductility_reduction_pct ? fixed(*r.ductility_reduction_pct, 1) : "-";
        rows.push_back(std::move(row));
    }
    size_t width[7];
    for (int c = 0; c < 7; ++c) {
        width[c] = std::string(hdr[c]).size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    auto emit = [&](const std::vector<std::string>& row) {
        for (int c = 0; c < 7; ++c) {
            out << row[c];
            if (c + 1 < 7) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    };
    emit({hdr[0], hdr[1], hdr[2], hdr[3], hdr[4], hdr[5], hdr[6]});
    for (const auto& row : rows) emit(row);
    return out.str();
}

std::string report_to_json(const PerformanceReport& r) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["design_capacity_newtons"] = r.design_capacity;
    j["ultimate_capacity_newtons"] = r.ultimate_capacity;
    j["reserve_capacity_newtons"] = r.reserve_capacity;
    j["delta_u_meters"] = r.delta_u;
    j["delta_y_meters"] = r.delta_y;
    j["ductility"] = r.ductility;
    if (r.redundancy_reduction_pct) j["redundancy_reduction_pct"] = *r.redundancy_reduction_pct;
    if (r.ductility_reduction_pct) j["ductility_reduction_pct"] = *r.ductility_reduction_pct;
    j["reduction_convention"] = convention_name(r.convention);
    j["stages"]["elastic_end_newtons"] = r.stages.elastic_end;
    j["stages"]["cracking_end_newtons"] = r.stages.cracking_end;
    j["stages"]["yielding_end_newtons"] = r.stages.yielding_end;
    j["stages"]["failure_newtons"] = r.stages.failure;
    j["termination"] = r.termination_detail;
    return j.dump(2) + "\n";
}

PerformanceReport report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PerformanceReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.design_capacity = j.at("design_capacity_newtons").get<double>();
    r.ultimate_capacity = j.at("ultimate_capacity_newtons").get<double>();
    r.reserve_capacity = j.at("reserve_capacity_newtons").get<double>();
    r.delta_u = j.at("delta_u_meters").get<double>();
    r.delta_y = j.at("delta_y_meters").get<double>();
    r.ductility = j.at("ductility").get<double>();
    if (j.contains("redundancy_reduction_pct"))
        r.redundancy_reduction_pct = j.at("redundancy_reduction_pct").get<double>();
    if (j.contains("ductility_reduction_pct"))
        r.ductility_reduction_pct = j.at("ductility_reduction_pct").get<double>();
    r.convention = j.at("reduction_convention").get<std::string>() == "intact"
                       ? ReductionConvention::IntactDenominator
                       : ReductionConvention::DamagedDenominator;
    r.stages.elastic_end = j.at("stages").at("elastic_end_newtons").get<double>();
    r.stages.cracking_end = j.at("stages").at("cracking_end_newtons").get<double>();
    r.stages.yielding_end = j.at("stages").at("yielding_end_newtons").get<double>();
    r.stages.failure = j.at("stages").at("failure_newtons").get<double>();
    r.termination_detail = j.at("termination").get<std::string>();
    return r;
}

void write_report_files(const std::vector<PerformanceReport>& reports,
                        const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    {
        std::ofstream f(directory / "report.txt");
        f << format_comparison_table(reports);
    }
    for (const auto& r : reports) {
        std::ofstream f(directory / ("report_" + r.scenario + ".json"));
        f << report_to_json(r);
    }
}

}  // namespace girderlab
