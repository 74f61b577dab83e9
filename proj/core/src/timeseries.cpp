#include "okflow/timeseries.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace okflow {

const char* const kTimeSeriesHeader =
    "step_index,attempt_index,time,dt,r,accepted,newton_iters,linear_iters,"
    "free_energy,mass";

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string format_record(const StepRecord& rec) {
    std::string line;
    line += std::to_string(rec.step_index);
    line += ',';
    line += std::to_string(rec.attempt_index);
    line += ',';
    line += fmt(rec.time);
    line += ',';
    line += fmt(rec.dt);
    line += ',';
    line += fmt(rec.r);
    line += ',';
    line += rec.accepted ? '1' : '0';
    line += ',';
    line += std::to_string(rec.newton_iters);
    line += ',';
    line += std::to_string(rec.linear_iters);
    line += ',';
    line += fmt(rec.free_energy);
    line += ',';
    line += fmt(rec.mass);
    return line;
}

void write_timeseries(const std::string& path, const std::vector<StepRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("timeseries: cannot open '" + path + "' for writing");
    out << kTimeSeriesHeader << '\n';
    for (const auto& rec : records) out << format_record(rec) << '\n';
    if (!out) throw std::runtime_error("timeseries: write failed for '" + path + "'");
}

TimeSeriesWriter::TimeSeriesWriter(const std::string& path)
    : out_(std::make_unique<std::ofstream>(path, std::ios::trunc)) {
    if (!*out_) throw std::runtime_error("timeseries: cannot open '" + path + "' for writing");
    *out_ << kTimeSeriesHeader << '\n';
}

void TimeSeriesWriter::append(const StepRecord& rec) {
    *out_ << format_record(rec) << '\n';
}

std::vector<StepRecord> read_timeseries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("timeseries: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTimeSeriesHeader)
        throw std::runtime_error("timeseries: unexpected header in '" + path + "'");

    std::vector<StepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 10)
            throw std::runtime_error("timeseries: malformed row in '" + path + "'");
        StepRecord rec;
        rec.step_index = std::strtol(cols[0].c_str(), nullptr, 10);
        rec.attempt_index = static_cast<int>(std::strtol(cols[1].c_str(), nullptr, 10));
        rec.time = std::strtod(cols[2].c_str(), nullptr);
        rec.dt = std::strtod(cols[3].c_str(), nullptr);
        rec.r = std::strtod(cols[4].c_str(), nullptr);
        rec.accepted = cols[5] == "1";
        rec.newton_iters = static_cast<int>(std::strtol(cols[6].c_str(), nullptr, 10));
        rec.linear_iters = std::strtol(cols[7].c_str(), nullptr, 10);
        rec.free_energy = std::strtod(cols[8].c_str(), nullptr);
        rec.mass = std::strtod(cols[9].c_str(), nullptr);
        records.push_back(rec);
    }
    return records;
}

}  // namespace okflow
