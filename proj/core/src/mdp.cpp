#include "mdpmine/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdpmine {

std::string State::key() const {
  if (is_start()) return "<START>";
  if (is_end()) return "<END>";
  if (cluster == kStartCluster) return last_activity + "#S";
  return last_activity + "#" + std::to_string(cluster);
}

bool Mdp::has_state(const State& s) const {
  return std::binary_search(states.begin(), states.end(), s);
}

std::int64_t Mdp::occurrences(const State& s, const std::string& action) const {
  auto it = occurrence.find({s, action});
  return it == occurrence.end() ? 0 : it->second;
}

const MdpIndex::StateEntry* MdpIndex::find(const State& s) const {
  auto it = by_state.find(s);
  return it == by_state.end() ? nullptr : &it->second;
}

MdpIndex make_index(const Mdp& mdp) {
  MdpIndex index;
  for (const auto& s : mdp.states) index.by_state[s];  // ensure terminals appear
  for (const auto& edge : mdp.edges) {
    auto& entry = index.by_state[edge.source];
    auto it = std::find_if(entry.groups.begin(), entry.groups.end(),
                           [&](const auto& g) { return g.action == edge.action; });
    if (it == entry.groups.end()) {
      MdpIndex::ActionGroup group;
      group.action = edge.action;
      group.agent = mdp.is_agent_action(edge.action);
      entry.groups.push_back(std::move(group));
      it = std::prev(entry.groups.end());
    }
    it->n += edge.count;
    it->targets.push_back(&edge);
  }
  for (auto& [state, entry] : index.by_state) {
    std::sort(entry.groups.begin(), entry.groups.end(),
              [](const auto& a, const auto& b) { return a.action < b.action; });
    for (auto& group : entry.groups) {
      std::sort(group.targets.begin(), group.targets.end(),
                [](const Edge* a, const Edge* b) { return a->target < b->target; });
      (group.agent ? entry.n_agent : entry.n_env) += group.n;
    }
  }
  return index;
}

std::uint64_t alphabet_fingerprint(std::span<const std::string> alphabet) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& label : alphabet) {
    for (unsigned char c : label) mix(c);
    mix(0x1f);
  }
  return h;
}

State state_of(const Trace& trace, std::size_t k, const KMeansModel& kmeans,
               const NormalizationStats& stats) {
  if (k == 0) return State::start();
  if (k > trace.events.size()) {
    throw OutOfRangePrefixError("state_of: k exceeds trace length");
  }
  State s;
  s.last_activity = trace.events[k - 1].activity;
  if (!std::binary_search(stats.alphabet_order.begin(), stats.alphabet_order.end(),
                          s.last_activity)) {
    throw UnknownActivityError("state_of: activity '" + s.last_activity +
                               "' not in the training alphabet");
  }
  if (k == 1) {
    s.cluster = kStartCluster;
  } else {
    s.cluster = static_cast<std::int32_t>(
        kmeans_assign(kmeans, encode(trace, k - 1, stats)));
  }
  return s;
}

State state_of_ongoing(std::span<const std::string> activities,
                       const KMeansModel& kmeans, const NormalizationStats& stats) {
  if (activities.empty()) return State::start();
  State s;
  s.last_activity = activities.back();
  if (!std::binary_search(stats.alphabet_order.begin(), stats.alphabet_order.end(),
                          s.last_activity)) {
    throw UnknownActivityError("state_of: activity '" + s.last_activity +
                               "' not in the training alphabet");
  }
  if (activities.size() == 1) {
    s.cluster = kStartCluster;
  } else {
    s.cluster = static_cast<std::int32_t>(kmeans_assign(
        kmeans, encode_ongoing(activities.first(activities.size() - 1), stats)));
  }
  return s;
}

namespace {

struct EdgeAccum {
  std::int64_t count = 0;
  double reward_sum = 0.0;
  std::int64_t reward_n = 0;
};

using Triple = std::tuple<State, std::string, State>;

}  // namespace

Mdp build_mdp(const EventLog& log, const KMeansModel& kmeans,
              const NormalizationStats& stats, const MdpBuildOptions& opts) {
  if (log.traces.empty()) {
    throw EmptyLogError("build_mdp: empty log");
  }
  for (const auto& label : log.alphabet) {
    if (label == kEndStateActivity || label == kEndAction || label.empty()) {
      throw Error("build_mdp: activity label '" + label + "' is reserved");
    }
  }
  const std::uint64_t log_hash = alphabet_fingerprint(log.alphabet);
  const std::uint64_t stats_hash = alphabet_fingerprint(stats.alphabet_order);
  if (log_hash != stats_hash) {
    throw EncodingMismatchError("build_mdp: log alphabet differs from the stats alphabet");
  }
  if (kmeans.dimension() != stats.dimension()) {
    throw EncodingMismatchError("build_mdp: k-means dimension " +
                                std::to_string(kmeans.dimension()) +
                                " does not fit the encoding dimension " +
                                std::to_string(stats.dimension()));
  }

  std::map<Triple, EdgeAccum> accum;
  std::map<State, std::int64_t> end_count;
  std::map<State, std::int64_t> out_count;

  // Per-trace state sequences, kept for the second attribution pass.
  std::vector<std::vector<State>> state_seqs;
  state_seqs.reserve(log.traces.size());

  for (const auto& trace : log.traces) {
    if (trace.events.empty()) {
      throw Error("build_mdp: trace '" + trace.case_id + "' has no events");
    }
    std::vector<State> seq;
    seq.reserve(trace.events.size() + 1);
    seq.push_back(State::start());
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
      seq.push_back(state_of(trace, k, kmeans, stats));
    }
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
      const double r =
          (k == trace.events.size() && trace.reward.has_value()) ? *trace.reward : 0.0;
      auto& acc = accum[{seq[k - 1], trace.events[k - 1].activity, seq[k]}];
      ++acc.count;
      if (opts.attribution == RewardAttribution::Arrival) {
        acc.reward_sum += r;
        ++acc.reward_n;
      }
      ++out_count[seq[k - 1]];
    }
    ++end_count[seq.back()];
    state_seqs.push_back(std::move(seq));
  }

  if (opts.attribution == RewardAttribution::LastAgent) {
    // Footnote-style attribution: the prefix reward lands on the triple
    // (state before the last agent event strictly before the prefix end,
    // that activity, prefix state), when that triple is a recorded edge.
    for (std::size_t t = 0; t < log.traces.size(); ++t) {
      const Trace& trace = log.traces[t];
      const auto& seq = state_seqs[t];
      std::ptrdiff_t last_agent = -1;  // 1-based event position
      for (std::size_t k = 1; k <= trace.events.size(); ++k) {
        if (last_agent >= 1) {
          const double r =
              (k == trace.events.size() && trace.reward.has_value()) ? *trace.reward
                                                                     : 0.0;
          Triple triple{seq[last_agent - 1], trace.events[last_agent - 1].activity,
                        seq[k]};
          auto it = accum.find(triple);
          if (it != accum.end()) {
            it->second.reward_sum += r;
            ++it->second.reward_n;
          }
        }
        if (trace.events[k - 1].owner == Owner::Agent) {
          last_agent = static_cast<std::ptrdiff_t>(k);
        }
      }
    }
  }

  Mdp mdp;
  mdp.gamma = opts.gamma;
  mdp.alphabet_hash = log_hash;
  mdp.attribution = opts.attribution;
  mdp.agent_actions =
      std::set<std::string>(log.agent_activities.begin(), log.agent_activities.end());

  std::set<State> states;
  states.insert(State::start());

  // n(s,a) from the raw counts.
  for (const auto& [triple, acc] : accum) {
    const auto& [source, action, target] = triple;
    mdp.occurrence[{source, action}] += acc.count;
    states.insert(source);
    states.insert(target);
  }
  for (const auto& [triple, acc] : accum) {
    const auto& [source, action, target] = triple;
    Edge edge;
    edge.source = source;
    edge.action = action;
    edge.target = target;
    edge.count = acc.count;
    edge.probability = static_cast<double>(acc.count) /
                       static_cast<double>(mdp.occurrence[{source, action}]);
    edge.reward = acc.reward_n == 0 ? 0.0 : acc.reward_sum / static_cast<double>(acc.reward_n);
    edge.reward_samples = acc.reward_n;
    mdp.edges.push_back(std::move(edge));
  }

  // Trace endings: states with no continuation become terminal; states that
  // both end and continue get an explicit END pseudo-move.
  bool need_end_state = false;
  for (const auto& [state, n_end] : end_count) {
    if (out_count.find(state) == out_count.end()) {
      mdp.terminals.insert(state);
    } else {
      need_end_state = true;
      Edge edge;
      edge.source = state;
      edge.action = kEndAction;
      edge.target = State::end();
      edge.count = n_end;
      edge.probability = 1.0;
      edge.pseudo = true;
      mdp.edges.push_back(std::move(edge));
      mdp.occurrence[{state, kEndAction}] = n_end;
    }
  }
  if (need_end_state) {
    states.insert(State::end());
    mdp.terminals.insert(State::end());
  }

  mdp.states.assign(states.begin(), states.end());
  std::sort(mdp.edges.begin(), mdp.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.action, a.target) <
           std::tie(b.source, b.action, b.target);
  });
  return mdp;
}

ValidationReport validate(const Mdp& mdp) {
  ValidationReport report;
  auto complain = [&report](std::string what) {
    report.violations.push_back(std::move(what));
  };

  std::map<std::pair<State, std::string>, double> prob_sum;
  std::map<std::pair<State, std::string>, std::int64_t> count_sum;
  std::set<State> has_out;

  for (const auto& edge : mdp.edges) {
    if (!mdp.has_state(edge.source)) {
      complain("edge source not in state set: " + edge.source.key());
    }
    if (!mdp.has_state(edge.target)) {
      complain("edge target not in state set: " + edge.target.key());
    }
    if (edge.count <= 0) {
      complain("edge " + edge.source.key() + " -" + edge.action + "-> " +
               edge.target.key() + " has nonpositive count");
    }
    if (!(edge.probability > 0.0 && edge.probability <= 1.0 + 1e-12)) {
      complain("edge " + edge.source.key() + " -" + edge.action + "-> " +
               edge.target.key() + " probability out of (0,1]");
    }
    if (mdp.terminals.count(edge.source) > 0) {
      complain("terminal state has outgoing edge: " + edge.source.key());
    }
    prob_sum[{edge.source, edge.action}] += edge.probability;
    count_sum[{edge.source, edge.action}] += edge.count;
    has_out.insert(edge.source);
  }

  for (const auto& [key, total] : prob_sum) {
    if (std::abs(total - 1.0) > 1e-9) {
      complain("probabilities at (" + key.first.key() + ", " + key.second +
               ") sum to " + std::to_string(total));
    }
  }
  for (const auto& [key, total] : count_sum) {
    const std::int64_t n = mdp.occurrences(key.first, key.second);
    if (n != total) {
      complain("occurrence n(" + key.first.key() + ", " + key.second + ")=" +
               std::to_string(n) + " differs from edge counts " + std::to_string(total));
    }
  }
  for (const auto& [key, n] : mdp.occurrence) {
    if (count_sum.find(key) == count_sum.end()) {
      complain("occurrence entry without edges: (" + key.first.key() + ", " +
               key.second + ")");
    }
  }
  for (const auto& state : mdp.states) {
    const bool terminal = mdp.terminals.count(state) > 0;
    const bool outgoing = has_out.count(state) > 0;
    if (!terminal && !outgoing) {
      complain("non-terminal state without outgoing edges: " + state.key());
    }
  }
  return report;
}

std::string to_dot(const Mdp& mdp) {
  std::ostringstream out;
  out << "digraph mdp {\n  rankdir=LR;\n";
  for (const auto& state : mdp.states) {
    out << "  \"" << state.key() << "\"";
    if (mdp.terminals.count(state) > 0) {
      out << " [shape=doublecircle]";
    }
    out << ";\n";
  }
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const auto& edge : mdp.edges) {
    out << "  \"" << edge.source.key() << "\" -> \"" << edge.target.key()
        << "\" [label=\"" << edge.action << " p=" << edge.probability
        << " n=" << edge.count << " r=" << edge.reward << "\"";
    if (edge.pseudo) out << " style=dashed";
    if (mdp.is_agent_action(edge.action)) out << " color=blue";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace mdpmine
