#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdaudit::telemetry {

enum class EventKind { keydown, input, paste, cut, copy };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

struct TraceEvent {
  std::int64_t ts_ms = 0;
  EventKind kind = EventKind::keydown;
  std::optional<std::string> key;
  std::optional<std::string> inserted_text;
  std::string field_id;

  bool operator==(const TraceEvent&) const = default;
};

// One captured worker response. `field_id` names the summary text box; events
// on other fields are kept but ignored by the paste predicates.
struct ResponseTrace {
  std::string response_id;
  std::string worker_id;
  std::string abstract_id;
  std::string field_id;
  std::string final_text;
  std::vector<TraceEvent> events;

  bool operator==(const ResponseTrace&) const = default;
};

/// Parses a JSON Lines event log: a session header object (response_id,
/// worker_id, abstract_id, field_id, final_text) followed by that session's
/// event objects (ts_ms, kind, key?, inserted_text?, field_id). Events are
/// stably sorted by ts_ms. `source` only feeds error messages.
std::vector<ResponseTrace> parse_trace_log(std::istream& in, const std::string& source = "<trace log>");
std::vector<ResponseTrace> load_trace_log(const std::string& path);

void write_trace_log(std::ostream& out, const std::vector<ResponseTrace>& traces);

struct PasteOptions {
  // A single `input` event inserting at least this many characters counts as
  // a paste; menu-driven pastes do not raise keyboard events.
  std::size_t burst_insert_chars = 20;
};

bool has_paste(const ResponseTrace& trace, const PasteOptions& options = {});

// Inserted text of every paste (and burst insert) on the summary field, in time order.
std::vector<std::string> pasted_segments(const ResponseTrace& trace, const PasteOptions& options = {});

}  // namespace crowdaudit::telemetry
