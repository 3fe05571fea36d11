#include "hrv/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace hrv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

void write_batch_csv(const std::string& path, const SampleBatch& batch) {
    std::ofstream out = open_out(path);
    const int d = batch.dim();
    for (int j = 0; j < d; ++j) out << "x" << (j + 1) << ",";
    out << "s";
    for (int j = 0; j < d; ++j) out << ",omega" << (j + 1);
    out << "\n";
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (int j = 0; j < d; ++j) out << format_double(batch.x(i, j)) << ",";
        out << format_double(batch.polar_s(i));
        for (int j = 0; j < d; ++j) out << "," << format_double(batch.omega(i, j));
        out << "\n";
    }
}

void write_batch_cache(const std::string& path, const SampleBatch& batch) {
    std::ofstream out = open_out(path, std::ios::binary);
    const char magic[4] = {'H', 'R', 'V', 'B'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::string fp = sha256_text_hex(batch.fingerprint());
    out.write(fp.data(), 64);
    const std::uint64_t seed = batch.config().seed;
    out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
    const std::uint64_t n = batch.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    const std::uint32_t d = static_cast<std::uint32_t>(batch.dim());
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(batch.data().data()),
              static_cast<std::streamsize>(batch.data().size() * sizeof(double)));
}

void write_scan_csv(const std::string& path, const ScanResult& scan) {
    std::ofstream out = open_out(path);
    out << "t,raw,stderr,scaled,estimator\n";
    for (const ScanRow& row : scan.rows)
        out << format_double(row.t) << "," << format_double(row.raw) << ","
            << format_double(row.stderr) << "," << format_double(row.scaled) << ","
            << scan.estimator << "\n";
}

void write_trace_csv(const std::string& path, const LevelSetTrace& trace) {
    std::ofstream out = open_out(path);
    out << "xi1,xi2,phi_residual,h\n";
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        const Vec2& p = trace.points[i];
        out << format_double(p[0]) << "," << format_double(p[1]) << ","
            << format_double(trace.residuals[i]) << "," << format_double(p[0] + p[1]) << "\n";
    }
}

void write_renewal_csv(const std::string& path, const RenewalEstimate& est) {
    std::ofstream out = open_out(path);
    out << "t,value,stderr,k\n";
    auto sign_label = [](const std::array<int, 2>& k) {
        std::string s;
        s += k[0] > 0 ? '+' : '-';
        s += k[1] > 0 ? '+' : '-';
        return s;
    };
    for (std::size_t j = 0; j < est.t_grid.size(); ++j)
        out << format_double(est.t_grid[j]) << "," << format_double(est.values[j].value) << ","
            << format_double(est.values[j].stderr) << ",*\n";
    for (std::size_t k = 0; k < est.group.size(); ++k)
        for (std::size_t j = 0; j < est.t_grid.size(); ++j)
            out << format_double(est.t_grid[j]) << ","
                << format_double(est.group_slices[k][j].value) << ","
                << format_double(est.group_slices[k][j].stderr) << "," << sign_label(est.group[k])
                << "\n";
}

namespace {

double axis_value(double v, bool log_axis) { return log_axis ? std::log10(v) : v; }

std::string tick_label(double v, bool log_axis) {
    char buf[32];
    if (log_axis)
        std::snprintf(buf, sizeof(buf), "1e%.3g", v);
    else
        std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool logx, bool logy) {
    const double width = 640, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double xv = axis_value(s.x[i], logx), yv = axis_value(s.y[i], logy);
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    auto px = [&](double x) { return ml + (axis_value(x, logx) - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) {
        return height - mb - (axis_value(y, logy) - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"monospace\" font-size=\"12\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
        << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 4.0;
        const double gx = ml + (width - ml - mr) * k / 4.0;
        out << "<line x1=\"" << gx << "\" y1=\"" << height - mb << "\" x2=\"" << gx << "\" y2=\""
            << height - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << gx << "\" y=\"" << height - mb + 20 << "\" text-anchor=\"middle\">"
            << tick_label(fx, logx) << "</text>\n";
        const double fy = ymin + (ymax - ymin) * k / 4.0;
        const double gy = height - mb - (height - mt - mb) * k / 4.0;
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\"" << gy
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
            << tick_label(fy, logy) << "</text>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (mt + height - mb) / 2
        << ")\">" << ylabel << "</text>\n";
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double xv = axis_value(s.x[i], logx), yv = axis_value(s.y[i], logy);
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

void RunManifest::add_output(const std::string& path) {
    outputs.emplace_back(path, sha256_file_hex(path));
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config_path;
    j["seed"] = manifest.seed;
    j["version"] = manifest.version;
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const auto& [p, digest] : manifest.outputs) {
        nlohmann::ordered_json o;
        o["path"] = p;
        o["sha256"] = digest;
        outs.push_back(o);
    }
    j["outputs"] = outs;
    nlohmann::ordered_json times = nlohmann::ordered_json::object();
    for (const auto& [stage, sec] : manifest.timings) times[stage] = sec;
    j["timings"] = times;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace hrv
