#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "prpo/qa_types.hpp"
#include "prpo/run_report.hpp"

namespace prpo {

/// Flat `key = value` configuration; `#` starts a comment. Missing keys keep
/// their defaults. Throws ParseError, UnknownKey or InvalidValue.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Inverse of `parse_config`: every key, one per line.
std::string format_config(const RunConfig& cfg);

/// Reads line-delimited response records
/// `{"sample_id", "mos", "prompt_id", "response_text"}` (optional `mos_min` and
/// `mos_max` declare a native MOS scale to normalize from) and groups them by
/// sample in order of first appearance. Unparseable responses become malformed
/// generations. Throws IoError or RecordError.
std::vector<SampleGroup> ingest_responses(std::istream& in, TaskKind task_kind);
std::vector<SampleGroup> ingest_responses(const std::string& path, TaskKind task_kind);

/// Line-delimited run report: one config record, one record per step, one
/// final-metrics record. Wall time is not part of the file.
void write_run_report(std::ostream& out, const RunReport& report);
RunReport read_run_report(std::istream& in);

/// Step diagnostics as CSV with a header row.
void write_step_csv(std::ostream& out, const std::vector<StepRecord>& steps);

/// Entry point of the command-line tool. Exit code 0 on success, 1 on a
/// validation error, 2 on a runtime error.
int cli_main(int argc, char** argv);

}  // namespace prpo
