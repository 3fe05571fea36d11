#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hrv/levelset.hpp"
#include "hrv/mc.hpp"
#include "hrv/renewal.hpp"
#include "hrv/tails.hpp"

namespace hrv {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Shortest stable decimal rendering used by every data file.
std::string format_double(double v);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);
std::string sha256_text_hex(const std::string& text);

// Data files. Columns are part of the CLI contract.
void write_batch_csv(const std::string& path, const SampleBatch& batch);
void write_batch_cache(const std::string& path, const SampleBatch& batch);
void write_scan_csv(const std::string& path, const ScanResult& scan);
void write_trace_csv(const std::string& path, const LevelSetTrace& trace);
void write_renewal_csv(const std::string& path, const RenewalEstimate& est);

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6fb2";
};

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool logx = false, bool logy = false);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string version = kToolkitVersion;
    std::vector<std::pair<std::string, double>> timings;              // stage, seconds
    std::vector<std::pair<std::string, std::string>> outputs;          // path, sha256
    void add_output(const std::string& path);
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace hrv
