#pragma once

// Trace files: one JSON object per line (header, records, summary), plus
// CSV views. Every floating-point value is written with 17 significant digits.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lanefree/sim.hpp"

namespace lanefree {

/// "%.17g"-style rendering; non-finite values become "null".
std::string format_double(double v);

/// Minimal streaming JSON writer for single-line objects.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);
  JsonWriter& value(double v);
  JsonWriter& value(long long v);
  JsonWriter& value(unsigned long long v);
  JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
  JsonWriter& value(std::size_t v) { return value(static_cast<unsigned long long>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& raw(std::string_view json);
  JsonWriter& null();

  const std::string& str() const { return out_; }

 private:
  void separator();

  std::string out_;
  std::vector<bool> first_;
  bool after_key_ = false;
};

namespace trace_io {

std::string header_line(const sim::TraceHeader& header);
std::string record_line(const sim::TraceRecord& record);
std::string summary_line(const sim::SimTrace& trace, const sim::RunMetrics& metrics);

/// Header line, every record, then the summary line.
void write_trace(std::ostream& out, const sim::SimTrace& trace, const sim::RunMetrics& metrics);

/// Metrics summary as one pretty-printed JSON document.
std::string metrics_json(const sim::SimTrace& trace, const sim::RunMetrics& metrics);

/// Long-format per-vehicle time series: t,vehicle,x,y,theta,v,u,F,delta,k.
void write_vehicle_csv(std::ostream& out, const sim::SimTrace& trace);

/// A trace read back from JSONL; enough to regenerate plot data.
struct LoadedTrace {
  double t_end = 0.0;
  double v_star = 0.0;
  std::vector<sim::TraceRecord> records;
};

/// Throws std::runtime_error on malformed input or if no record lines exist.
LoadedTrace read_trace(std::istream& in);
LoadedTrace read_trace(const std::filesystem::path& path);

enum class ExportKind { speeds, accelerations, lateral, orientation, dmin, snapshots };

/// Throws std::invalid_argument for unknown names.
ExportKind parse_export_kind(std::string_view name);

/// Wide CSV with a time column and one column per vehicle (two for lateral
/// and orientation), or, for snapshots, per-vehicle rows at the record
/// closest to `at` (default: last record).
void export_csv(std::ostream& out, const LoadedTrace& trace, ExportKind kind,
                std::optional<double> at = std::nullopt);

}  // namespace trace_io
}  // namespace lanefree
