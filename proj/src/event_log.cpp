#include "bpsforge/event_log.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "bpsforge/common.hpp"

namespace bpsforge {

Timestamp Trace::end() const {
    Timestamp latest = events.front().end_ts;
    for (const Event& e : events) latest = std::max(latest, e.end_ts);
    return latest;
}

std::size_t EventLog::event_count() const {
    std::size_t n = 0;
    for (const Trace& t : traces) n += t.events.size();
    return n;
}

bool event_order_less(const Event& a, const Event& b) {
    if (a.start_ts != b.start_ts) return a.start_ts < b.start_ts;
    if (a.end_ts != b.end_ts) return a.end_ts < b.end_ts;
    return a.activity < b.activity;
}

void sort_trace(Trace& trace) {
    std::stable_sort(trace.events.begin(), trace.events.end(), event_order_less);
}

EventLog build_log(std::vector<Event> events) {
    if (events.empty()) throw ParseError("event log contains no events");
    std::unordered_map<std::string, std::size_t> index;
    EventLog log;
    for (Event& e : events) {
        if (e.activity.empty()) throw ParseError("event with empty activity label");
        if (e.end_ts < e.start_ts)
            throw ParseError("event for case '" + e.case_id + "' ends before it starts");
        auto [it, inserted] = index.emplace(e.case_id, log.traces.size());
        if (inserted) log.traces.push_back(Trace{e.case_id, {}});
        log.traces[it->second].events.push_back(std::move(e));
    }
    for (Trace& t : log.traces) sort_trace(t);
    return log;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& s, char delimiter) {
    if (s.find_first_of(std::string("\"\n") + delimiter) == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

EventLog parse_csv_text(const std::string& text, const ColumnMap& columns, char delimiter,
                        ParseStats* stats) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV file (missing header)");
    const std::vector<std::string> header = split_csv_line(line, delimiter);

    auto column_of = [&](const std::string& name, bool required) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        if (required)
            throw ConfigError("mapped column '" + name + "' not found in CSV header");
        return -1;
    };
    const int case_col = column_of(columns.case_id, true);
    const int act_col = column_of(columns.activity, true);
    const int start_col = column_of(columns.start, true);
    const int end_col = column_of(columns.end, true);
    const int res_col = columns.resource.empty() ? -1 : column_of(columns.resource, false);

    std::vector<Event> events;
    std::size_t row = 1;
    ParseStats local;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line, delimiter);
        const int max_col = std::max({case_col, act_col, start_col, end_col, res_col});
        if (static_cast<int>(fields.size()) <= max_col)
            throw ParseError("row " + std::to_string(row) + ": expected at least " +
                             std::to_string(max_col + 1) + " fields, got " +
                             std::to_string(fields.size()));
        Event e;
        e.case_id = fields[static_cast<std::size_t>(case_col)];
        e.activity = fields[static_cast<std::size_t>(act_col)];
        try {
            e.start_ts = parse_timestamp(fields[static_cast<std::size_t>(start_col)]);
            e.end_ts = parse_timestamp(fields[static_cast<std::size_t>(end_col)]);
        } catch (const ParseError& err) {
            throw ParseError("row " + std::to_string(row) + ": " + err.what());
        }
        e.resource = res_col >= 0 && !fields[static_cast<std::size_t>(res_col)].empty()
                         ? fields[static_cast<std::size_t>(res_col)]
                         : kAutoResource;
        if (res_col >= 0 && fields[static_cast<std::size_t>(res_col)] == kAutoResource)
            ++local.auto_resource_inputs;
        if (e.end_ts < e.start_ts)
            throw ParseError("row " + std::to_string(row) + ": end timestamp precedes start");
        events.push_back(std::move(e));
        ++local.rows;
    }
    if (events.empty()) throw ParseError("CSV file has a header but no data rows");
    if (local.auto_resource_inputs > 0)
        log_warn(std::to_string(local.auto_resource_inputs) +
                 " input rows use the reserved resource name AUTO");
    if (stats != nullptr) *stats = local;
    return build_log(std::move(events));
}

EventLog parse_csv(const std::string& path, const ColumnMap& columns, char delimiter,
                   ParseStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_text(buf.str(), columns, delimiter, stats);
}

namespace {

struct XesEvent {
    std::string activity;
    std::string resource;
    std::string lifecycle;
    bool has_timestamp = false;
    Timestamp timestamp = 0;
    bool has_start_attr = false;
    Timestamp start_attr = 0;
};

using boost::property_tree::ptree;

XesEvent read_xes_event(const ptree& node) {
    XesEvent ev;
    for (const auto& [tag, child] : node) {
        if (tag != "string" && tag != "date") continue;
        const std::string key = child.get<std::string>("<xmlattr>.key", "");
        const std::string value = child.get<std::string>("<xmlattr>.value", "");
        if (tag == "string" && key == "concept:name") ev.activity = value;
        else if (tag == "string" && key == "org:resource") ev.resource = value;
        else if (tag == "string" && key == "lifecycle:transition") ev.lifecycle = value;
        else if (tag == "date" && key == "time:timestamp") {
            ev.timestamp = parse_timestamp(value);
            ev.has_timestamp = true;
        } else if (tag == "date" && key == "start_timestamp") {
            ev.start_attr = parse_timestamp(value);
            ev.has_start_attr = true;
        }
    }
    return ev;
}

}  // namespace

EventLog parse_xes_text(const std::string& text, ParseStats* stats) {
    ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::read_xml(in, tree);
    } catch (const std::exception& err) {
        throw ParseError(std::string("malformed XES XML: ") + err.what());
    }
    const auto log_node = tree.get_child_optional("log");
    if (!log_node) throw ParseError("XES file has no <log> root element");

    std::vector<Event> events;
    ParseStats local;
    std::size_t trace_no = 0;
    for (const auto& [tag, trace_node] : *log_node) {
        if (tag != "trace") continue;
        ++trace_no;
        std::string case_id;
        for (const auto& [ctag, child] : trace_node) {
            if (ctag == "string" && child.get<std::string>("<xmlattr>.key", "") == "concept:name")
                case_id = child.get<std::string>("<xmlattr>.value", "");
        }
        if (case_id.empty()) case_id = "trace_" + std::to_string(trace_no);

        // FIFO pairing of start/complete transitions per activity label.
        std::map<std::string, std::deque<XesEvent>> open_starts;
        auto emit = [&](const std::string& activity, const std::string& resource, Timestamp s,
                        Timestamp e) {
            Event out;
            out.case_id = case_id;
            out.activity = activity;
            out.resource = resource.empty() ? kAutoResource : resource;
            out.start_ts = s;
            out.end_ts = e;
            events.push_back(std::move(out));
        };

        for (const auto& [ctag, child] : trace_node) {
            if (ctag != "event") continue;
            ++local.rows;
            XesEvent ev = read_xes_event(child);
            if (ev.activity.empty() || !ev.has_timestamp)
                throw ParseError("XES event in trace '" + case_id +
                                 "' lacks concept:name or time:timestamp");
            if (ev.has_start_attr) {
                emit(ev.activity, ev.resource, ev.start_attr, ev.timestamp);
            } else if (ev.lifecycle == "start") {
                open_starts[ev.activity].push_back(ev);
            } else {  // "complete" or no lifecycle
                auto it = open_starts.find(ev.activity);
                if (it != open_starts.end() && !it->second.empty()) {
                    XesEvent start = it->second.front();
                    it->second.pop_front();
                    const std::string resource =
                        !start.resource.empty() ? start.resource : ev.resource;
                    emit(ev.activity, resource, start.timestamp, ev.timestamp);
                } else {
                    ++local.unpaired_lifecycle;
                    emit(ev.activity, ev.resource, ev.timestamp, ev.timestamp);
                }
            }
        }
        for (auto& [activity, pending] : open_starts) {
            for (const XesEvent& start : pending) {
                ++local.unpaired_lifecycle;
                emit(activity, start.resource, start.timestamp, start.timestamp);
            }
        }
    }
    if (local.unpaired_lifecycle > 0)
        log_warn(std::to_string(local.unpaired_lifecycle) +
                 " XES events had no lifecycle partner; repaired to zero duration");
    if (stats != nullptr) *stats = local;
    if (events.empty()) throw ParseError("XES log contains no events");
    return build_log(std::move(events));
}

EventLog parse_xes(const std::string& path, ParseStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open XES file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_xes_text(buf.str(), stats);
}

void write_csv(const EventLog& log, std::ostream& out, const ColumnMap& columns, char delimiter) {
    out << columns.case_id << delimiter << columns.activity << delimiter
        << (columns.resource.empty() ? "resource" : columns.resource) << delimiter << columns.start
        << delimiter << columns.end << '\n';
    for (const Trace& t : log.traces) {
        for (const Event& e : t.events) {
            out << csv_escape(e.case_id, delimiter) << delimiter
                << csv_escape(e.activity, delimiter) << delimiter
                << csv_escape(e.resource, delimiter) << delimiter << format_timestamp(e.start_ts)
                << delimiter << format_timestamp(e.end_ts) << '\n';
        }
    }
}

void write_csv_file(const EventLog& log, const std::string& path, const ColumnMap& columns,
                    char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write CSV file: " + path);
    write_csv(log, out, columns, delimiter);
}

std::string to_csv_string(const EventLog& log, const ColumnMap& columns, char delimiter) {
    std::ostringstream out;
    write_csv(log, out, columns, delimiter);
    return out.str();
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

void write_xes(const EventLog& log, std::ostream& out) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log>\n";
    for (const Trace& t : log.traces) {
        out << "  <trace>\n    <string key=\"concept:name\" value=\"" << xml_escape(t.case_id)
            << "\"/>\n";
        for (const Event& e : t.events) {
            out << "    <event>\n"
                << "      <string key=\"concept:name\" value=\"" << xml_escape(e.activity)
                << "\"/>\n"
                << "      <string key=\"org:resource\" value=\"" << xml_escape(e.resource)
                << "\"/>\n"
                << "      <string key=\"lifecycle:transition\" value=\"start\"/>\n"
                << "      <date key=\"time:timestamp\" value=\"" << format_timestamp(e.start_ts)
                << "\"/>\n"
                << "    </event>\n";
            out << "    <event>\n"
                << "      <string key=\"concept:name\" value=\"" << xml_escape(e.activity)
                << "\"/>\n"
                << "      <string key=\"org:resource\" value=\"" << xml_escape(e.resource)
                << "\"/>\n"
                << "      <string key=\"lifecycle:transition\" value=\"complete\"/>\n"
                << "      <date key=\"time:timestamp\" value=\"" << format_timestamp(e.end_ts)
                << "\"/>\n"
                << "    </event>\n";
        }
        out << "  </trace>\n";
    }
    out << "</log>\n";
}

void write_xes_file(const EventLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write XES file: " + path);
    write_xes(log, out);
}

LogStatistics log_statistics(const EventLog& log) {
    LogStatistics st;
    st.trace_count = log.traces.size();
    std::set<std::string> activities;
    double duration_sum = 0.0;
    for (const Trace& t : log.traces) {
        st.event_count += t.events.size();
        st.max_activities_per_trace = std::max(st.max_activities_per_trace, t.events.size());
        for (const Event& e : t.events) activities.insert(e.activity);
        const std::int64_t cycle = t.cycle_time();
        st.max_case_duration_s = std::max(st.max_case_duration_s, cycle);
        duration_sum += static_cast<double>(cycle);
    }
    st.distinct_activities = activities.size();
    st.mean_activities_per_trace =
        static_cast<double>(st.event_count) / static_cast<double>(st.trace_count);
    st.mean_case_duration_s = duration_sum / static_cast<double>(st.trace_count);
    return st;
}

bool operator==(const Event& a, const Event& b) {
    return a.case_id == b.case_id && a.activity == b.activity && a.resource == b.resource &&
           a.start_ts == b.start_ts && a.end_ts == b.end_ts;
}

bool operator==(const Trace& a, const Trace& b) {
    return a.case_id == b.case_id && a.events == b.events;
}

bool operator==(const EventLog& a, const EventLog& b) { return a.traces == b.traces; }

}  // namespace bpsforge
