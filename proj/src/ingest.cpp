#include "zzhd/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>

#include <json.hpp>

#include "zzhd/errors.hpp"

namespace zzhd {

namespace {

/// Raw fields of one line before validation. `nullopt` means absent.
struct RawFields {
  std::optional<std::string> timestamp;
  std::optional<std::string> src_ip;
  std::optional<std::string> dst_port;
  std::optional<std::string> image_path;
};

/// Either a record or the reason it was rejected.
struct Classified {
  std::optional<FlowRecord> record;
  RejectReason reason = RejectReason::malformed;
};

std::optional<int> parse_port(std::string_view text) {
  text = trim(text);
  int port = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), port);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  if (port < 0 || port > 65535) return std::nullopt;
  return port;
}

bool blank(const std::optional<std::string>& s) { return !s || trim(*s).empty(); }

/// Validation order: missing fields, malformed values, localhost, ephemeral port.
Classified classify(const RawFields& raw, bool epoch_allowed) {
  Classified out;
  if (blank(raw.timestamp) || blank(raw.src_ip) || blank(raw.dst_port) || blank(raw.image_path)) {
    out.reason = RejectReason::missing_field;
    return out;
  }
  std::optional<Timestamp> ts = parse_iso8601(*raw.timestamp);
  if (!ts && epoch_allowed) {
    const std::string_view t = trim(*raw.timestamp);
    Timestamp v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec == std::errc{} && res.ptr == t.data() + t.size()) ts = v;
  }
  const std::optional<int> port = parse_port(*raw.dst_port);
  if (!ts || !port) {
    out.reason = RejectReason::malformed;
    return out;
  }
  const std::string ip(trim(*raw.src_ip));
  if (is_localhost(ip)) {
    out.reason = RejectReason::localhost_src;
    return out;
  }
  if (*port >= kEphemeralPortThreshold) {
    out.reason = RejectReason::ephemeral_port;
    return out;
  }
  out.record = FlowRecord{*ts, ip, *port, std::string(trim(*raw.image_path))};
  return out;
}

std::optional<std::string> json_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  // Floats, objects, arrays and booleans are not valid for any of the fields.
  throw std::invalid_argument(key);
}

constexpr std::array<const char*, 4> kColumns = {"timestamp", "src_ip", "dst_port", "image_path"};

}  // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "csv") return InputFormat::csv;
  if (name == "jsonl") return InputFormat::jsonl;
  throw ConfigError("unknown input format '" + std::string(name) + "' (expected csv or jsonl)");
}

InputFormat format_from_extension(std::string_view path) {
  const auto dot = path.rfind('.');
  if (dot != std::string_view::npos) {
    const std::string_view ext = path.substr(dot);
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return InputFormat::jsonl;
  }
  return InputFormat::csv;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::missing_field: return "missing_field";
    case RejectReason::localhost_src: return "localhost_src";
    case RejectReason::ephemeral_port: return "ephemeral_port";
    case RejectReason::malformed: return "malformed";
  }
  return "malformed";
}

std::size_t ParseResult::reject_total() const {
  std::size_t total = 0;
  for (const auto& [reason, count] : rejects) total += count;
  return total;
}

ParseResult parse_flow_records(std::istream& input, InputFormat format) {
  ParseResult result;
  std::string line;
  auto tally = [&result](const Classified& c) {
    if (c.record) {
      result.records.push_back(*c.record);
    } else {
      ++result.rejects[c.reason];
    }
  };

  if (format == InputFormat::csv) {
    std::array<std::optional<std::size_t>, 4> column_of{};
    std::size_t needed = 0;
    bool have_header = false;
    while (std::getline(input, line)) {
      if (trim(line).empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          const std::string_view name = trim(fields[i]);
          for (std::size_t k = 0; k < kColumns.size(); ++k) {
            if (name == kColumns[k]) column_of[k] = i;
          }
        }
        for (std::size_t k = 0; k < kColumns.size(); ++k) {
          if (!column_of[k]) {
            throw ConfigError(std::string("csv header lacks required column '") + kColumns[k] + "'");
          }
          needed = std::max(needed, *column_of[k] + 1);
        }
        have_header = true;
        continue;
      }
      ++result.lines;
      RawFields raw;
      auto pick = [&](std::size_t k) -> std::optional<std::string> {
        const std::size_t col = *column_of[k];
        if (col >= fields.size()) return std::nullopt;
        return fields[col];
      };
      if (fields.size() < needed) {
        tally(Classified{});  // short row
        continue;
      }
      raw.timestamp = pick(0);
      raw.src_ip = pick(1);
      raw.dst_port = pick(2);
      raw.image_path = pick(3);
      tally(classify(raw, /*epoch_allowed=*/false));
    }
    return result;
  }

  while (std::getline(input, line)) {
    if (trim(line).empty()) continue;
    ++result.lines;
    RawFields raw;
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      if (!obj.is_object()) {
        tally(Classified{});
        continue;
      }
      raw.timestamp = json_field(obj, "timestamp");
      raw.src_ip = json_field(obj, "src_ip");
      raw.dst_port = json_field(obj, "dst_port");
      raw.image_path = json_field(obj, "image_path");
    } catch (const std::exception&) {
      tally(Classified{});
      continue;
    }
    tally(classify(raw, /*epoch_allowed=*/true));
  }
  return result;
}

bool is_localhost(std::string_view src_ip) {
  if (src_ip == "localhost") return true;
  // Strict dotted quad: four decimal octets in [0, 255].
  std::array<int, 4> octets{};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (i > 0) {
      if (pos >= src_ip.size() || src_ip[pos] != '.') return false;
      ++pos;
    }
    const std::size_t start = pos;
    while (pos < src_ip.size() && src_ip[pos] >= '0' && src_ip[pos] <= '9') ++pos;
    if (pos == start || pos - start > 3) return false;
    std::from_chars(src_ip.data() + start, src_ip.data() + pos, octets[i]);
    if (octets[i] > 255) return false;
  }
  return pos == src_ip.size() && octets[0] == 127;
}

std::string format_reject_report(const ParseResult& result) {
  std::string out = "reason,count\n";
  for (RejectReason r : {RejectReason::missing_field, RejectReason::localhost_src,
                         RejectReason::ephemeral_port, RejectReason::malformed}) {
    auto it = result.rejects.find(r);
    out += std::string(to_string(r)) + "," + std::to_string(it == result.rejects.end() ? 0 : it->second) + "\n";
  }
  return out;
}

void WindowSpec::validate() const {
  if (window_len <= 0 || stride <= 0 || subwindow_len <= 0) {
    throw ConfigError("window_len, stride and subwindow_len must be positive");
  }
  if (window_len % stride != 0) throw ConfigError("stride must divide window_len");
  if (subwindow_len % window_len != 0) throw ConfigError("window_len must divide subwindow_len");
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Timestamp window_origin(const std::vector<FlowRecord>& records, const WindowSpec& spec) {
  if (records.empty()) return 0;
  Timestamp earliest = records.front().timestamp;
  for (const FlowRecord& r : records) earliest = std::min(earliest, r.timestamp);
  return floor_div(earliest, spec.stride) * spec.stride;
}

std::vector<WindowedRecords> window_records(const std::vector<FlowRecord>& records,
                                            const WindowSpec& spec) {
  spec.validate();
  std::vector<WindowedRecords> windows;
  if (records.empty()) return windows;
  const Timestamp origin = window_origin(records, spec);
  Timestamp latest = records.front().timestamp;
  for (const FlowRecord& r : records) latest = std::max(latest, r.timestamp);
  const std::int64_t last_index = (latest - origin) / spec.stride;

  windows.resize(static_cast<std::size_t>(last_index + 1));
  for (std::int64_t k = 0; k <= last_index; ++k) {
    windows[k].window_index = k;
    windows[k].window_start = origin + k * spec.stride;
  }
  for (const FlowRecord& r : records) {
    const std::int64_t offset = r.timestamp - origin;
    // start_k <= t < start_k + window_len
    const std::int64_t hi = offset / spec.stride;
    const std::int64_t lo = std::max<std::int64_t>(0, floor_div(offset - spec.window_len, spec.stride) + 1);
    for (std::int64_t k = lo; k <= hi; ++k) windows[k].records.push_back(r);
  }
  return windows;
}

}  // namespace zzhd
