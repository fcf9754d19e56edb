#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/io.hpp"

namespace zzhd {

/// Destination ports at or above this value are dynamic/ephemeral and dropped.
inline constexpr int kEphemeralPortThreshold = 49152;

/// One filtered flow-log record.
struct FlowRecord {
  Timestamp timestamp = 0;
  std::string src_ip;
  int dst_port = 0;
  std::string image_path;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

enum class InputFormat { csv, jsonl };

/// Maps "csv"/"jsonl" to the enum; anything else is a ConfigError.
InputFormat parse_input_format(std::string_view name);

/// Guesses the format from a file extension (".jsonl"/".json" -> jsonl, otherwise csv).
InputFormat format_from_extension(std::string_view path);

enum class RejectReason { missing_field, localhost_src, ephemeral_port, malformed };

std::string_view to_string(RejectReason r);

struct ParseResult {
  std::vector<FlowRecord> records;
  std::map<RejectReason, std::size_t> rejects;
  /// Number of non-blank data lines seen (header excluded).
  std::size_t lines = 0;

  std::size_t reject_total() const;
};

/// Parses a flow log stream and applies the ingestion filters. Malformed lines
/// are counted, never thrown. A csv stream without the required header columns
/// is a ConfigError.
ParseResult parse_flow_records(std::istream& input, InputFormat format);

/// True for the IPv4 loopback block 127.0.0.0/8 and the literal token "localhost".
bool is_localhost(std::string_view src_ip);

/// `reason,count` csv, one row per reason in enum order.
std::string format_reject_report(const ParseResult& result);

/// Sliding-window geometry in seconds.
struct WindowSpec {
  std::int64_t window_len = 600;
  std::int64_t stride = 300;
  std::int64_t subwindow_len = 3600;

  /// Throws ConfigError unless all > 0, stride | window_len and window_len | subwindow_len.
  void validate() const;
  std::int64_t windows_per_subwindow() const { return subwindow_len / stride; }
};

struct WindowedRecords {
  std::int64_t window_index = 0;
  Timestamp window_start = 0;
  std::vector<FlowRecord> records;
};

/// Earliest timestamp floored to a multiple of the stride.
Timestamp window_origin(const std::vector<FlowRecord>& records, const WindowSpec& spec);

/// Assigns records to overlapping windows starting at `window_origin`. Every
/// window index from 0 up to the one starting at or before the latest record is
/// emitted, including empty ones.
std::vector<WindowedRecords> window_records(const std::vector<FlowRecord>& records,
                                            const WindowSpec& spec);

}  // namespace zzhd
