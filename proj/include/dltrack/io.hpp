#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dltrack/core_model.hpp"
#include "dltrack/dl_engine.hpp"
#include "dltrack/evaluation.hpp"
#include "dltrack/scenario.hpp"
#include "dltrack/track_manager.hpp"

namespace dltrack::io {

enum class Format { csv, json };
Format parse_format(std::string_view s);  // throws config_error
std::string_view format_extension(Format f);

// Shortest representation that round-trips; identical on every run.
std::string format_double(double v);

using Cell = std::variant<std::string, double, long long>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Provenance line written at the top of every output.
struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};
std::string provenance_comment(const Provenance& p);

void write_table(std::ostream& os, const Table& t, Format fmt, const Provenance& p);
// Writes atomically enough for our purposes; throws io_error when the path is unwritable.
void write_table_file(const std::string& path, const Table& t, Format fmt, const Provenance& p);

// Reads the `scan,t,x,y,amplitude,doppler` format. Lines starting with '#'
// are skipped; errors carry the 1-based file line.
std::vector<Measurement> read_batch_csv(std::istream& is);
std::vector<Measurement> read_batch_csv_file(const std::string& path);

Table batch_table(const Batch& batch);
Table truth_table(const GroundTruth& truth);
Table truth_mapping_table(const GroundTruth& truth);
Table detection_table(const DetectionReport& rep, const HypothesisSet& hs);
Table trace_table(const IterationTrace& trace);
Table trace_hypotheses_table(const IterationTrace& trace);
Table hypotheses_table(const HypothesisSet& hs);
Table association_table(const AssociationMatrix& f, const HypothesisSet& hs);
Table roc_table(int clutter_per_scan, const std::vector<RocPoint>& pts);
Table complexity_table(const ComplexityReport& rep);

}  // namespace dltrack::io
