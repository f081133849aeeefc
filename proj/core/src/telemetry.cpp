#include "crowdaudit/telemetry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "crowdaudit/error.hpp"
#include "crowdaudit/text.hpp"
#include "json.hpp"

namespace crowdaudit::telemetry {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::keydown: return "keydown";
    case EventKind::input: return "input";
    case EventKind::paste: return "paste";
    case EventKind::cut: return "cut";
    case EventKind::copy: return "copy";
  }
  return "keydown";
}

EventKind parse_event_kind(std::string_view s) {
  for (EventKind k : {EventKind::keydown, EventKind::input, EventKind::paste, EventKind::cut, EventKind::copy}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

namespace {

std::string string_field(const json& obj, const char* field, const std::string& src, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) throw ParseError(src, line, field, "missing required field");
  if (!it->is_string()) throw ParseError(src, line, field, "expected a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_field(const json& obj, const char* field, const std::string& src,
                                          std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(src, line, field, "expected a string");
  return it->get<std::string>();
}

bool is_header(const json& obj) { return obj.contains("response_id"); }

ResponseTrace parse_header(const json& obj, const std::string& src, std::size_t line) {
  ResponseTrace t;
  t.response_id = string_field(obj, "response_id", src, line);
  t.worker_id = string_field(obj, "worker_id", src, line);
  t.abstract_id = string_field(obj, "abstract_id", src, line);
  t.field_id = string_field(obj, "field_id", src, line);
  try {
    t.final_text = text::nfc(string_field(obj, "final_text", src, line));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(src, line, "final_text", e.what());
  }
  if (text::trim(t.final_text).empty()) throw ParseError(src, line, "final_text", "must be non-empty");
  return t;
}

TraceEvent parse_event(const json& obj, const std::string& src, std::size_t line) {
  TraceEvent e;
  auto ts = obj.find("ts_ms");
  if (ts == obj.end() || ts->is_null()) throw ParseError(src, line, "ts_ms", "missing required field");
  if (!ts->is_number_integer()) throw ParseError(src, line, "ts_ms", "expected an integer");
  e.ts_ms = ts->get<std::int64_t>();
  if (e.ts_ms < 0) throw ParseError(src, line, "ts_ms", "must be >= 0");
  try {
    e.kind = parse_event_kind(string_field(obj, "kind", src, line));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& err) {
    throw ParseError(src, line, "kind", err.what());
  }
  e.key = optional_field(obj, "key", src, line);
  e.inserted_text = optional_field(obj, "inserted_text", src, line);
  e.field_id = string_field(obj, "field_id", src, line);
  if (e.kind == EventKind::paste && !e.inserted_text) {
    throw ParseError(src, line, "inserted_text", "required for paste events");
  }
  return e;
}

}  // namespace

std::vector<ResponseTrace> parse_trace_log(std::istream& in, const std::string& source) {
  std::vector<ResponseTrace> traces;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, "", std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "", "record is not a JSON object");
    if (is_header(obj)) {
      traces.push_back(parse_header(obj, source, line_no));
      if (!ids.insert(traces.back().response_id).second) {
        throw ParseError(source, line_no, "response_id", "duplicate session '" + traces.back().response_id + "'");
      }
      continue;
    }
    if (traces.empty()) throw ParseError(source, line_no, "", "event before any session header");
    traces.back().events.push_back(parse_event(obj, source, line_no));
  }
  if (in.bad()) throw IoError("read error on " + source);
  for (auto& t : traces) {
    std::stable_sort(t.events.begin(), t.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.ts_ms < b.ts_ms; });
  }
  return traces;
}

std::vector<ResponseTrace> load_trace_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace log " + path);
  return parse_trace_log(in, path);
}

void write_trace_log(std::ostream& out, const std::vector<ResponseTrace>& traces) {
  for (const auto& t : traces) {
    json header = {{"response_id", t.response_id},
                   {"worker_id", t.worker_id},
                   {"abstract_id", t.abstract_id},
                   {"field_id", t.field_id},
                   {"final_text", t.final_text}};
    out << header.dump() << '\n';
    for (const auto& e : t.events) {
      json ev = {{"ts_ms", e.ts_ms}, {"kind", std::string(to_string(e.kind))}};
      if (e.key) ev["key"] = *e.key;
      if (e.inserted_text) ev["inserted_text"] = *e.inserted_text;
      ev["field_id"] = e.field_id;
      out << ev.dump() << '\n';
    }
  }
}

namespace {

bool counts_as_paste(const TraceEvent& e, const std::string& field, const PasteOptions& options) {
  if (e.field_id != field || !e.inserted_text || e.inserted_text->empty()) return false;
  if (e.kind == EventKind::paste) return true;
  return e.kind == EventKind::input && text::length(*e.inserted_text) >= options.burst_insert_chars;
}

}  // namespace

bool has_paste(const ResponseTrace& trace, const PasteOptions& options) {
  return std::any_of(trace.events.begin(), trace.events.end(),
                     [&](const TraceEvent& e) { return counts_as_paste(e, trace.field_id, options); });
}

std::vector<std::string> pasted_segments(const ResponseTrace& trace, const PasteOptions& options) {
  std::vector<std::string> out;
  for (const auto& e : trace.events) {
    if (counts_as_paste(e, trace.field_id, options)) out.push_back(*e.inserted_text);
  }
  return out;
}

}  // namespace crowdaudit::telemetry
