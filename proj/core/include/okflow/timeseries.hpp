// timeseries.hpp
// Per-attempt diagnostics as CSV, one row per solve attempt in execution
// order. Floats are printed with 17 significant digits so a rerun with the
// same seed reproduces the file byte for byte.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "okflow/driver.hpp"

namespace okflow {

extern const char* const kTimeSeriesHeader;

std::string format_record(const StepRecord& rec);

void write_timeseries(const std::string& path, const std::vector<StepRecord>& records);

/// Streaming writer used by the CLI observer; produces the same bytes as
/// write_timeseries.
class TimeSeriesWriter {
public:
    explicit TimeSeriesWriter(const std::string& path);
    void append(const StepRecord& rec);

private:
    std::unique_ptr<std::ofstream> out_;
};

std::vector<StepRecord> read_timeseries(const std::string& path);

}  // namespace okflow
