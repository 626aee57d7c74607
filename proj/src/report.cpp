#include "deint/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "deint/common.hpp"

namespace deint::report {

std::vector<MethodSummary> summarize(const std::vector<trainer::EvalReport>& reports) {
    std::map<std::string, trainer::EvalReport> pooled;
    std::vector<std::string> order;
    for (const trainer::EvalReport& r : reports) {
        auto [it, inserted] = pooled.try_emplace(r.method);
        if (inserted) {
            it->second.method = r.method;
            order.push_back(r.method);
        }
        it->second.rows.insert(it->second.rows.end(), r.rows.begin(), r.rows.end());
    }
    std::vector<MethodSummary> out;
    for (const std::string& name : order) {
        const trainer::EvalReport& r = pooled[name];
        MethodSummary s;
        s.method = name;
        s.cp = r.cp();
        s.cnfr = r.cnfr();
        s.cdr = r.cdr();
        s.ari = r.ari();
        s.nmi = r.nmi();
        s.scenarios = static_cast<int>(r.rows.size());
        out.push_back(std::move(s));
    }
    return out;
}

void write_comparison_csv(const std::string& path, const std::vector<MethodSummary>& summaries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_comparison_csv: cannot open " + path);
    out << "method,metric,mean,std\n";
    char buf[256];
    for (const MethodSummary& s : summaries) {
        const std::pair<const char*, trainer::MetricStats> metrics[] = {
            {"cp", s.cp}, {"cnfr", s.cnfr}, {"cdr", s.cdr}, {"ari", s.ari}, {"nmi", s.nmi}};
        for (const auto& [name, st] : metrics) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g\n", s.method.c_str(), name,
                          st.mean, st.stddev);
            out << buf;
        }
    }
    if (!out) throw DataError("write_comparison_csv: write failed for " + path);
}

void write_metric_svg(const std::string& path, const std::string& metric,
                      const std::vector<MethodSummary>& summaries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_metric_svg: cannot open " + path);

    const int width = 640, height = 360;
    const int margin_left = 60, margin_bottom = 60, margin_top = 30;
    const int plot_w = width - margin_left - 20;
    const int plot_h = height - margin_top - margin_bottom;
    const int n = static_cast<int>(summaries.size());

    auto stats_for = [&](const MethodSummary& s) -> trainer::MetricStats {
        if (metric == "cp") return s.cp;
        if (metric == "cnfr") return s.cnfr;
        if (metric == "cdr") return s.cdr;
        if (metric == "ari") return s.ari;
        if (metric == "nmi") return s.nmi;
        throw DataError("write_metric_svg: unknown metric " + metric);
    };
    auto ypix = [&](double v) {
        const double clamped = std::clamp(v, 0.0, 1.0);
        return margin_top + plot_h * (1.0 - clamped);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"15\">"
        << metric << "</text>\n";
    // axes and gridlines
    for (int tick = 0; tick <= 5; ++tick) {
        const double v = tick / 5.0;
        out << "<line x1=\"" << margin_left << "\" y1=\"" << ypix(v) << "\" x2=\""
            << margin_left + plot_w << "\" y2=\"" << ypix(v)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << margin_left - 8 << "\" y=\"" << ypix(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << v << "</text>\n";
    }
    const char* colors[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c"};
    for (int i = 0; i < n; ++i) {
        const trainer::MetricStats st = stats_for(summaries[i]);
        const double slot = static_cast<double>(plot_w) / std::max(1, n);
        const double bar_w = slot * 0.6;
        const double x = margin_left + slot * i + (slot - bar_w) / 2.0;
        const double y = ypix(st.mean);
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\""
            << (margin_top + plot_h - y) << "\" fill=\"" << colors[i % 6] << "\"/>\n";
        // std whisker
        const double cx = x + bar_w / 2.0;
        out << "<line x1=\"" << cx << "\" y1=\"" << ypix(st.mean - st.stddev) << "\" x2=\"" << cx
            << "\" y2=\"" << ypix(st.mean + st.stddev)
            << "\" stroke=\"#333333\" stroke-width=\"2\"/>\n";
        char label[64];
        std::snprintf(label, sizeof(label), "%.3f", st.mean);
        out << "<text x=\"" << cx << "\" y=\"" << y - 6
            << "\" text-anchor=\"middle\" font-size=\"11\">" << label << "</text>\n";
        out << "<text x=\"" << cx << "\" y=\"" << margin_top + plot_h + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << summaries[i].method
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw DataError("write_metric_svg: write failed for " + path);
}

std::vector<std::string> find_eval_csvs(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    if (!fs::exists(dir)) throw DataError("report: input directory " + dir + " does not exist");
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        std::string header;
        if (std::getline(in, header) && header.rfind("scenario_id,method,", 0) == 0)
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

}  // namespace deint::report
