#pragma once

#include "medax/analysis.hpp"
#include "medax/extractor.hpp"
#include "medax/shapes.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace medax {

namespace io {

/// Doubles are printed with %.17g everywhere so that a fixed build writes
/// byte-identical files for identical runs.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_samples_csv(const std::string& path, const ExtractionResult& result, int n) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "index";
    for (int a = 0; a < n; ++a) out << ",x_" << a;
    out << ",d,k_max,residual,chart_id\n";
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        const MedialSample& s = result.samples[i];
        out << i;
        for (int a = 0; a < n; ++a) out << ',' << fmt(s.x[a]);
        out << ',' << fmt(s.d) << ',' << s.k_max << ',' << fmt(s.residual) << ',' << s.chart_id
            << '\n';
    }
}

inline void write_charts_csv(const std::string& path, const std::vector<ChartRecord>& charts,
                             int n) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "chart_id,dir_index";
    for (int a = 0; a < n; ++a) out << ",u_" << a;
    out << '\n';
    for (std::size_t c = 0; c < charts.size(); ++c) {
        const Configuration& a = charts[c].key.a;
        for (int i = 0; i < a.k(); ++i) {
            out << c << ',' << i;
            for (int ax = 0; ax < n; ++ax) out << ',' << fmt(a.dir(i)[ax]);
            out << '\n';
        }
    }
}

struct SampleRow {
    long index = 0;
    Vec x;
    double d = 0.0;
    int k_max = 0;
    double residual = 0.0;
    int chart_id = -1;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline std::vector<SampleRow> read_samples_csv(const std::string& path, int* dim_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty samples file: " + path);
    const auto header = split_csv_line(line);
    int n = 0;
    for (const auto& h : header) {
        if (h.rfind("x_", 0) == 0) ++n;
    }
    if (dim_out) *dim_out = n;
    std::vector<SampleRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != n + 5) {
            throw std::runtime_error("malformed samples row in " + path);
        }
        SampleRow row;
        row.index = std::stol(f[0]);
        row.x = Vec(n);
        for (int a = 0; a < n; ++a) row.x[a] = std::stod(f[static_cast<std::size_t>(1 + a)]);
        row.d = std::stod(f[static_cast<std::size_t>(n + 1)]);
        row.k_max = std::stoi(f[static_cast<std::size_t>(n + 2)]);
        row.residual = std::stod(f[static_cast<std::size_t>(n + 3)]);
        row.chart_id = std::stoi(f[static_cast<std::size_t>(n + 4)]);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Chart configurations from the sidecar, indexed by chart_id.
inline std::vector<std::vector<Vec>> read_charts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty charts file: " + path);
    const auto header = split_csv_line(line);
    int n = 0;
    for (const auto& h : header) {
        if (h.rfind("u_", 0) == 0) ++n;
    }
    std::vector<std::vector<Vec>> charts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != n + 2) {
            throw std::runtime_error("malformed charts row in " + path);
        }
        const std::size_t id = static_cast<std::size_t>(std::stol(f[0]));
        if (charts.size() <= id) charts.resize(id + 1);
        Vec u(n);
        for (int a = 0; a < n; ++a) u[a] = std::stod(f[static_cast<std::size_t>(2 + a)]);
        charts[id].push_back(std::move(u));
    }
    return charts;
}

inline nlohmann::json certificate_json(const Certificate& cert,
                                       const std::vector<Violation>& violations) {
    nlohmann::json j;
    j["a"] = nlohmann::json::array();
    for (const Vec& d : cert.a.dirs()) {
        nlohmann::json dir = nlohmann::json::array();
        for (int i = 0; i < d.size(); ++i) dir.push_back(d[i]);
        j["a"].push_back(dir);
    }
    j["d"] = cert.d;
    j["c"] = cert.c;
    j["eps"] = cert.eps;
    j["delta"] = cert.delta;
    j["t"] = cert.t;
    j["r"] = cert.r;
    j["violations"] = nlohmann::json::array();
    for (const Violation& v : violations) {
        j["violations"].push_back({{"i", v.i}, {"j", v.j}});
    }
    return j;
}

inline void write_dim_csv(const std::string& path,
                          const std::vector<std::pair<int, DimensionEstimate>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "k,value,fit_r2,n_points\n";
    for (const auto& [k, est] : rows) {
        out << k << ',' << fmt(est.value) << ',' << fmt(est.fit_r2) << ',' << est.n_points
            << '\n';
    }
}

inline nlohmann::json dimension_json(const DimensionEstimate& est) {
    nlohmann::json j;
    j["value"] = est.value;
    j["fit_r2"] = est.fit_r2;
    j["n_points"] = est.n_points;
    j["scales"] = est.scales;
    j["counts"] = est.counts;
    return j;
}

/// Scene plus strata overlay for 2D scenes: closed set in black/grey,
/// stratum samples colored by expected dimension i.
inline void write_report_svg(const std::string& path, const ClosedSetModel& model,
                             const Box& bbox, const StratumReport& report) {
    const double width = 800.0;
    SvgMapper m;
    m.scale = width / (bbox.hi[0] - bbox.lo[0]);
    m.x0 = bbox.lo[0];
    m.y1 = bbox.hi[1];
    const double height = (bbox.hi[1] - bbox.lo[1]) * m.scale;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    model.render_svg(out, m);
    static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    for (const auto& stratum : report.strata) {
        const char* color = palette[stratum.i % 6];
        for (const Vec& p : stratum.points) {
            out << "<circle cx=\"" << m.sx(p[0]) << "\" cy=\"" << m.sy(p[1])
                << "\" r=\"1.5\" fill=\"" << color << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace io

}  // namespace medax
