#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mdpmine/errors.hpp"

namespace mdpmine {

enum class Owner { Agent, Environment };

/// Scalar payload attribute: number, string or boolean.
using AttrValue = std::variant<double, std::string, bool>;
using Payload = std::map<std::string, AttrValue>;

struct Event {
  std::string activity;
  std::int64_t timestamp_ms = 0;  ///< UTC epoch milliseconds
  Owner owner = Owner::Environment;
  Payload payload;
};

/// One case: an ordered, timestamp-nondecreasing sequence of events.
/// `reward` is the KPI of the complete trace; it is set by enrich() and
/// stays empty for ongoing prefixes.
struct Trace {
  std::string case_id;
  std::vector<Event> events;
  std::optional<double> reward;

  std::size_t size() const { return events.size(); }
  /// Activity labels of the first k events (k == size() for the whole trace).
  std::vector<std::string> prefix_labels(std::size_t k) const;
};

struct EventLog {
  std::vector<Trace> traces;
  std::vector<std::string> alphabet;       ///< sorted, unique
  std::set<std::string> agent_activities;  ///< subset of alphabet

  bool in_alphabet(std::string_view activity) const;
  bool is_agent(const std::string& activity) const {
    return agent_activities.count(activity) > 0;
  }

  /// Builds a log from raw traces: derives the alphabet (activities seen in
  /// traces plus declared-but-unseen agent activities, sorted) and stamps
  /// the owner of every event from the agent set.
  static EventLog from_traces(std::vector<Trace> traces,
                              std::set<std::string> agent_activities);
};

/// KPI definition used by enrich().
struct KpiSpec {
  enum class Kind { LoanProfit, Custom };
  Kind kind = Kind::LoanProfit;

  double interest_rate = 0.15;        ///< positive part: rate * amount on acceptance
  double labor_cost_per_hour = 36.0;  ///< negative part: cost * working hours
  std::string accept_activity = "accept_offer";
  std::string amount_attribute = "amount";
  std::string duration_attribute = "duration_h";
  /// When no duration attribute is present, working time falls back to the
  /// gap to the next event in the case, capped at this many hours.
  double idle_cap_hours = 8.0;
  /// Working time counts agent events only by default.
  bool count_agent_work_only = true;

  /// Kind::Custom: the trace reward is read from this payload attribute.
  std::string custom_attribute;
};

struct CsvSchema {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string timestamp_column = "timestamp";
  /// strptime-style format for the fixed part; fractional seconds and a
  /// trailing 'Z' or +-HH:MM offset are accepted after it.
  std::string timestamp_format = "%Y-%m-%dT%H:%M:%S";
};

/// Parses a header-rowed CSV into an event log. Rows are grouped by case id
/// and sorted by timestamp (stable: ties keep file order). Every column
/// other than the three schema columns becomes a payload attribute; values
/// that parse as numbers become numbers, "true"/"false" become booleans.
EventLog parse_csv(const std::filesystem::path& path, const CsvSchema& schema,
                   const std::set<std::string>& agent_activities);

/// Number of occurrences of `activity` among the first `prefix.size()` labels.
std::int64_t prefix_frequency(std::span<const std::string> prefix,
                              std::string_view activity);
/// 1-based position of the last occurrence of `activity`; 0 when absent.
std::int64_t prefix_last_position(std::span<const std::string> prefix,
                                  std::string_view activity);

/// Alphabet-checked variants over a trace prefix of length k.
std::int64_t frequency(const EventLog& log, const Trace& trace, std::size_t k,
                       const std::string& activity);
std::int64_t position(const EventLog& log, const Trace& trace, std::size_t k,
                      const std::string& activity);

/// Returns a copy of the log with owner tags set and the KPI reward computed
/// for every trace. Idempotent.
EventLog enrich(const EventLog& log, const KpiSpec& kpi);

/// Total working hours charged to a trace under the given KPI spec.
double working_hours(const Trace& trace, const KpiSpec& kpi);

/// True when the trace contains at least one agent-owned event, i.e. the
/// agent had a say in its outcome.
bool has_agent_decision(const Trace& trace);

struct SplitOptions {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// Drop from the test side traces without any agent decision point.
  bool exclude_no_decision_test_traces = false;
};

/// Random trace-level partition, deterministic under the seed.
std::pair<EventLog, EventLog> split(const EventLog& log, const SplitOptions& opts);

}  // namespace mdpmine
