#include "mdpmine/eventlog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace mdpmine {

std::vector<std::string> Trace::prefix_labels(std::size_t k) const {
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k && i < events.size(); ++i) {
    out.push_back(events[i].activity);
  }
  return out;
}

bool EventLog::in_alphabet(std::string_view activity) const {
  return std::binary_search(alphabet.begin(), alphabet.end(), activity);
}

EventLog EventLog::from_traces(std::vector<Trace> traces,
                               std::set<std::string> agent_activities) {
  std::set<std::string> labels(agent_activities.begin(), agent_activities.end());
  for (const auto& trace : traces) {
    for (const auto& event : trace.events) {
      labels.insert(event.activity);
    }
  }
  EventLog log;
  log.alphabet.assign(labels.begin(), labels.end());
  log.agent_activities = std::move(agent_activities);
  log.traces = std::move(traces);
  for (auto& trace : log.traces) {
    for (auto& event : trace.events) {
      event.owner = log.is_agent(event.activity) ? Owner::Agent : Owner::Environment;
    }
  }
  return log;
}

namespace {

// RFC-4180-ish line splitter: handles quoted fields and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

AttrValue parse_attr(const std::string& raw) {
  if (raw == "true") return AttrValue{true};
  if (raw == "false") return AttrValue{false};
  double num = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), num);
  if (ec == std::errc{} && ptr == raw.data() + raw.size() && !raw.empty()) {
    return AttrValue{num};
  }
  return AttrValue{raw};
}

// Parses `raw` against the strptime-style format, then accepts optional
// fractional seconds and an optional 'Z' or +-HH[:]MM offset. Returns UTC
// epoch milliseconds.
std::int64_t parse_timestamp(const std::string& raw, const std::string& format,
                             std::size_t row) {
  std::tm tm{};
  std::istringstream in(raw);
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) {
    throw UnparseableTimestampError(row, "'" + raw + "' does not match format '" +
                                             format + "'");
  }
  std::int64_t millis = 0;
  if (in.peek() == '.') {
    in.get();
    std::string frac;
    while (std::isdigit(in.peek())) frac += static_cast<char>(in.get());
    if (frac.empty()) {
      throw UnparseableTimestampError(row, "'" + raw + "': empty fractional part");
    }
    frac.resize(3, '0');
    millis = std::stoll(frac.substr(0, 3));
  }
  std::int64_t offset_s = 0;
  int c = in.peek();
  if (c == 'Z') {
    in.get();
  } else if (c == '+' || c == '-') {
    const int sign = (in.get() == '-') ? -1 : 1;
    auto digit = [&in, &raw, row]() {
      if (!std::isdigit(in.peek())) {
        throw UnparseableTimestampError(row, "'" + raw + "': malformed zone offset");
      }
      return in.get() - '0';
    };
    const int hh = digit() * 10 + digit();
    int mm = 0;
    if (in.peek() == ':') in.get();
    if (std::isdigit(in.peek())) {
      mm = digit() * 10 + digit();
    }
    offset_s = sign * (hh * 3600 + mm * 60);
  }
  if (in.peek() != std::istringstream::traits_type::eof()) {
    std::string rest;
    std::getline(in, rest);
    throw UnparseableTimestampError(row, "'" + raw + "': trailing '" + rest + "'");
  }
  std::time_t secs = timegm(&tm);
  return (static_cast<std::int64_t>(secs) - offset_s) * 1000 + millis;
}

}  // namespace

EventLog parse_csv(const std::filesystem::path& path, const CsvSchema& schema,
                   const std::set<std::string>& agent_activities) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open CSV file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw EmptyLogError("empty CSV file: " + path.string());
  }
  const auto header = split_csv_line(line);
  auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw MissingColumnError("missing column '" + name + "' in " + path.string());
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t case_col = column_of(schema.case_column);
  const std::size_t act_col = column_of(schema.activity_column);
  const std::size_t ts_col = column_of(schema.timestamp_column);

  // case id -> insertion order, so trace order is first-appearance order.
  std::map<std::string, std::size_t> case_index;
  std::vector<Trace> traces;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw Error("row " + std::to_string(row) + ": expected " +
                  std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    }
    Event event;
    event.activity = fields[act_col];
    if (event.activity.empty()) {
      throw Error("row " + std::to_string(row) + ": empty activity label");
    }
    event.timestamp_ms = parse_timestamp(fields[ts_col], schema.timestamp_format, row);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == case_col || i == act_col || i == ts_col) continue;
      if (fields[i].empty()) continue;
      event.payload.emplace(header[i], parse_attr(fields[i]));
    }
    const std::string& case_id = fields[case_col];
    auto [it, inserted] = case_index.emplace(case_id, traces.size());
    if (inserted) {
      traces.push_back(Trace{case_id, {}, std::nullopt});
    }
    traces[it->second].events.push_back(std::move(event));
  }
  if (traces.empty()) {
    throw EmptyLogError("no data rows in " + path.string());
  }
  for (auto& trace : traces) {
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const Event& a, const Event& b) {
                       return a.timestamp_ms < b.timestamp_ms;
                     });
  }
  return EventLog::from_traces(std::move(traces), agent_activities);
}

std::int64_t prefix_frequency(std::span<const std::string> prefix,
                              std::string_view activity) {
  std::int64_t count = 0;
  for (const auto& label : prefix) {
    if (label == activity) ++count;
  }
  return count;
}

std::int64_t prefix_last_position(std::span<const std::string> prefix,
                                  std::string_view activity) {
  for (std::size_t i = prefix.size(); i > 0; --i) {
    if (prefix[i - 1] == activity) return static_cast<std::int64_t>(i);
  }
  return 0;
}

namespace {

void check_activity(const EventLog& log, const std::string& activity) {
  if (!log.in_alphabet(activity)) {
    throw UnknownActivityError("unknown activity '" + activity + "'");
  }
}

}  // namespace

std::int64_t frequency(const EventLog& log, const Trace& trace, std::size_t k,
                       const std::string& activity) {
  check_activity(log, activity);
  std::int64_t count = 0;
  for (std::size_t i = 0; i < k && i < trace.events.size(); ++i) {
    if (trace.events[i].activity == activity) ++count;
  }
  return count;
}

std::int64_t position(const EventLog& log, const Trace& trace, std::size_t k,
                      const std::string& activity) {
  check_activity(log, activity);
  const std::size_t n = std::min(k, trace.events.size());
  for (std::size_t i = n; i > 0; --i) {
    if (trace.events[i - 1].activity == activity) return static_cast<std::int64_t>(i);
  }
  return 0;
}

namespace {

double event_hours(const Trace& trace, std::size_t i, const KpiSpec& kpi) {
  const Event& event = trace.events[i];
  auto it = event.payload.find(kpi.duration_attribute);
  if (it != event.payload.end()) {
    if (const double* hours = std::get_if<double>(&it->second)) return *hours;
    throw MissingAttributeError("trace '" + trace.case_id + "': attribute '" +
                                kpi.duration_attribute + "' is not numeric");
  }
  if (i + 1 >= trace.events.size()) return 0.0;
  const double gap_h =
      static_cast<double>(trace.events[i + 1].timestamp_ms - event.timestamp_ms) /
      3'600'000.0;
  return std::min(gap_h, kpi.idle_cap_hours);
}

double trace_amount(const Trace& trace, const KpiSpec& kpi) {
  for (const auto& event : trace.events) {
    auto it = event.payload.find(kpi.amount_attribute);
    if (it == event.payload.end()) continue;
    if (const double* amount = std::get_if<double>(&it->second)) return *amount;
  }
  throw MissingAttributeError("trace '" + trace.case_id + "': missing attribute '" +
                              kpi.amount_attribute + "'");
}

double loan_profit(const Trace& trace, const KpiSpec& kpi) {
  bool accepted = false;
  for (const auto& event : trace.events) {
    if (event.activity == kpi.accept_activity) {
      accepted = true;
      break;
    }
  }
  const double gain = accepted ? kpi.interest_rate * trace_amount(trace, kpi) : 0.0;
  return gain - kpi.labor_cost_per_hour * working_hours(trace, kpi);
}

double custom_reward(const Trace& trace, const KpiSpec& kpi) {
  for (const auto& event : trace.events) {
    auto it = event.payload.find(kpi.custom_attribute);
    if (it == event.payload.end()) continue;
    if (const double* value = std::get_if<double>(&it->second)) return *value;
  }
  throw MissingAttributeError("trace '" + trace.case_id + "': missing attribute '" +
                              kpi.custom_attribute + "'");
}

}  // namespace

double working_hours(const Trace& trace, const KpiSpec& kpi) {
  double hours = 0.0;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    if (kpi.count_agent_work_only && trace.events[i].owner != Owner::Agent) continue;
    hours += event_hours(trace, i, kpi);
  }
  return hours;
}

EventLog enrich(const EventLog& log, const KpiSpec& kpi) {
  EventLog out = log;
  for (auto& trace : out.traces) {
    for (auto& event : trace.events) {
      event.owner = out.is_agent(event.activity) ? Owner::Agent : Owner::Environment;
    }
    switch (kpi.kind) {
      case KpiSpec::Kind::LoanProfit:
        trace.reward = loan_profit(trace, kpi);
        break;
      case KpiSpec::Kind::Custom:
        trace.reward = custom_reward(trace, kpi);
        break;
    }
  }
  return out;
}

bool has_agent_decision(const Trace& trace) {
  return std::any_of(trace.events.begin(), trace.events.end(),
                     [](const Event& e) { return e.owner == Owner::Agent; });
}

std::pair<EventLog, EventLog> split(const EventLog& log, const SplitOptions& opts) {
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
    throw DegeneratePartitionError("train_fraction must be in (0,1)");
  }
  const std::size_t n = log.traces.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opts.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(opts.train_fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train && i < n; ++i) in_train[order[i]] = true;

  std::vector<Trace> train, test;
  for (std::size_t i = 0; i < n; ++i) {
    const Trace& trace = log.traces[i];
    if (in_train[i]) {
      train.push_back(trace);
    } else if (!opts.exclude_no_decision_test_traces || has_agent_decision(trace)) {
      test.push_back(trace);
    }
  }
  if (train.empty() || test.empty()) {
    throw DegeneratePartitionError("split produced an empty partition (" +
                                   std::to_string(train.size()) + "/" +
                                   std::to_string(test.size()) + ")");
  }
  auto make = [&](std::vector<Trace> traces) {
    EventLog part;
    part.traces = std::move(traces);
    part.alphabet = log.alphabet;
    part.agent_activities = log.agent_activities;
    return part;
  };
  return {make(std::move(train)), make(std::move(test))};
}

}  // namespace mdpmine
