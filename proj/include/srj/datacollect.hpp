#pragma once

/// \file datacollect.hpp
/// \brief Random-action convergence data, clustering, and threshold fitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "srj/csv.hpp"
#include "srj/problems.hpp"
#include "srj/rng.hpp"
#include "srj/schemes.hpp"
#include "srj/solver.hpp"

namespace srj {

enum class Action { increase, keep, decrease };

inline constexpr std::array<Action, 3> kActions = {Action::increase, Action::keep, Action::decrease};

inline std::string to_string(Action a) {
  switch (a) {
    case Action::increase: return "increase";
    case Action::keep: return "keep";
    case Action::decrease: return "decrease";
  }
  return "?";
}

inline Action parse_action(const std::string& s) {
  if (s == "increase") return Action::increase;
  if (s == "keep") return Action::keep;
  if (s == "decrease") return Action::decrease;
  throw std::invalid_argument("unknown action '" + s + "'");
}

inline int apply_action(Action a, int level) {
  switch (a) {
    case Action::increase: return level + 1;
    case Action::decrease: return level - 1;
    case Action::keep: return level;
  }
  return level;
}

struct DataPoint {
  std::size_t size = 0;  ///< problem dimension N
  std::size_t trial = 0;
  std::size_t step = 0;
  Action action = Action::keep;
  double avg_rate = 0.0;
  int level = 0;  ///< level the action was taken from
  double prev_ratio = 0.0;
  double r_before = 0.0;
  double r_after = 0.0;
  int M = 0;  ///< degree of the candidate cycle
};

struct CollectOptions {
  std::vector<std::size_t> sizes = {2, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400};
  double target_tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t trials_per_size = 1;  ///< lower bound; more rounds run until min_points is met
  std::size_t min_points = 0;
  unsigned threads = 1;
  std::size_t max_steps_per_trial = 100'000;
};

/// One trial on poisson_1d(n): an initial M=1 cycle, then random admissible actions
/// with every admissible candidate measured from the same state.
///
/// Steps where a candidate drives the residual to exactly zero emit no points.
inline std::vector<DataPoint> collect_trial(std::size_t n, std::size_t trial, double target_tol, std::uint64_t seed,
                                            std::size_t max_steps = 100'000) {
  const ProblemInstance p = poisson_1d(n);
  SplitMix64 rng(derive_seed(seed, n, trial));
  const ResidualMeter meter(p.A, p.b, StoppingNorm::absolute_l2);

  SolverState state;
  state.x = p.x0;
  state.residual = residual_l2(p.A, state.x, p.b);
  run_cycle(p.A, p.b, state, scheme_for_level(0), meter);
  state.level = 0;

  std::vector<DataPoint> out;
  std::vector<Action> admissible;
  std::vector<SolverState> outcome;
  for (std::size_t step = 0; state.residual >= target_tol && step < max_steps; ++step) {
    const double prev_ratio = *state.prev_residual_ratio;
    admissible.clear();
    outcome.clear();
    for (Action a : kActions) {
      const int next = apply_action(a, state.level);
      if (next >= 0 && next <= kMaxLevel) admissible.push_back(a);
    }
    bool usable = true;
    std::vector<DataPoint> pts;
    for (Action a : admissible) {
      SolverState trial_state = state;
      trial_state.residual_history.clear();
      const int next = apply_action(a, state.level);
      const CycleStats c = run_cycle(p.A, p.b, trial_state, scheme_for_level(next), meter);
      trial_state.level = next;
      if (!(c.residual_after > 0.0) || !std::isfinite(c.residual_after)) usable = false;
      if (usable) {
        pts.push_back({n, trial, step, a, average_convergence_rate(c.residual_before, c.residual_after, c.M), state.level,
                       prev_ratio, c.residual_before, c.residual_after, c.M});
      }
      outcome.push_back(std::move(trial_state));
    }
    if (usable) out.insert(out.end(), pts.begin(), pts.end());
    state = std::move(outcome[rng.below(admissible.size())]);
  }
  return out;
}

/// Trials run round-robin over sizes; whole rounds are added until both
/// trials_per_size and min_points are satisfied. Output order is deterministic.
inline std::vector<DataPoint> collect(const CollectOptions& opt) {
  if (opt.sizes.empty()) throw std::invalid_argument("collect: no sizes");
  if (!(opt.target_tol > 0.0)) throw std::invalid_argument("collect: target_tol must be positive");
  for (std::size_t n : opt.sizes) {
    if (n < 2) throw std::invalid_argument("collect: sizes must be >= 2");
  }
  const unsigned threads = std::max(1u, opt.threads);
  std::vector<DataPoint> all;
  std::size_t round = 0;
  while (round < opt.trials_per_size || all.size() < opt.min_points) {
    // A batch of whole rounds, trials in parallel, appended in (round, size) order.
    const std::size_t batch_rounds = std::max<std::size_t>(1, threads / opt.sizes.size() + (threads > 1 ? 1 : 0));
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t r = 0; r < batch_rounds; ++r) {
      for (std::size_t n : opt.sizes) jobs.emplace_back(n, round + r);
    }
    std::vector<std::vector<DataPoint>> results(jobs.size());
    if (threads == 1) {
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        results[j] = collect_trial(jobs[j].first, jobs[j].second, opt.target_tol, opt.seed, opt.max_steps_per_trial);
      }
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t j = t; j < jobs.size(); j += threads) {
            results[j] = collect_trial(jobs[j].first, jobs[j].second, opt.target_tol, opt.seed, opt.max_steps_per_trial);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    for (std::size_t r = 0; r < batch_rounds; ++r) {
      if (round >= opt.trials_per_size && all.size() >= opt.min_points) break;
      for (std::size_t k = 0; k < opt.sizes.size(); ++k) {
        auto& res = results[r * opt.sizes.size() + k];
        all.insert(all.end(), res.begin(), res.end());
      }
      ++round;
    }
  }
  return all;
}

// ---------------------------------------------------------------------------

/// z such that a two-sided normal interval has the given coverage.
inline double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must be in (0, 1)");
  if (confidence == 0.90) return 1.645;
  if (confidence == 0.95) return 1.96;
  if (confidence == 0.99) return 2.576;
  double lo = 0.0;
  double hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erf(mid / std::sqrt(2.0)) < confidence ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ActionStats {
  double mean_rate = 0.0;
  double half_width = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  double lower() const { return mean_rate - half_width; }
  double upper() const { return mean_rate + half_width; }
};

struct ClusterSummary {
  int level_bucket = 0;
  double mean_ratio = 0.0;
  std::size_t size = 0;
  std::array<ActionStats, 3> per_action{};  ///< indexed like kActions
  std::optional<Action> best_action;        ///< empty when inconclusive

  const ActionStats& stats(Action a) const { return per_action[static_cast<std::size_t>(a)]; }
};

/// Highest mean wins if its interval clears every other present action's interval.
inline std::optional<Action> best_action_of(const std::array<ActionStats, 3>& s) {
  std::optional<Action> best;
  for (Action a : kActions) {
    const auto& st = s[static_cast<std::size_t>(a)];
    if (st.count == 0) continue;
    if (!best || st.mean_rate > s[static_cast<std::size_t>(*best)].mean_rate) best = a;
  }
  if (!best) return std::nullopt;
  const auto& b = s[static_cast<std::size_t>(*best)];
  if (!std::isfinite(b.half_width)) return std::nullopt;
  for (Action a : kActions) {
    if (a == *best) continue;
    const auto& st = s[static_cast<std::size_t>(a)];
    if (st.count == 0) continue;
    if (!(b.lower() > st.upper())) return std::nullopt;
  }
  return best;
}

inline std::vector<ClusterSummary> aggregate(std::vector<DataPoint> points, std::size_t n_set = 10000,
                                             double confidence = 0.95) {
  if (points.empty()) throw std::invalid_argument("aggregate: no points");
  if (n_set == 0) throw std::invalid_argument("aggregate: n_set must be positive");
  const double z = normal_quantile_two_sided(confidence);
  // Total order, so the result does not depend on input order.
  std::sort(points.begin(), points.end(), [](const DataPoint& a, const DataPoint& b) {
    return std::tie(a.level, a.prev_ratio, a.action, a.avg_rate, a.size, a.trial, a.step) <
           std::tie(b.level, b.prev_ratio, b.action, b.avg_rate, b.size, b.trial, b.step);
  });
  const std::size_t floor_size = std::max<std::size_t>(1, n_set / 10);
  std::vector<ClusterSummary> out;
  std::size_t start = 0;
  while (start < points.size()) {
    std::size_t group_end = start;
    while (group_end < points.size() && points[group_end].level == points[start].level) ++group_end;
    for (std::size_t c = start; c < group_end; c += n_set) {
      const std::size_t e = std::min(c + n_set, group_end);
      if (e - c < floor_size) break;
      ClusterSummary cs;
      cs.level_bucket = points[start].level;
      cs.size = e - c;
      long double ratio_sum = 0;
      std::array<long double, 3> sum{}, sum_sq{};
      for (std::size_t i = c; i < e; ++i) {
        ratio_sum += points[i].prev_ratio;
        const auto k = static_cast<std::size_t>(points[i].action);
        sum[k] += points[i].avg_rate;
        sum_sq[k] += static_cast<long double>(points[i].avg_rate) * points[i].avg_rate;
        ++cs.per_action[k].count;
      }
      cs.mean_ratio = static_cast<double>(ratio_sum / static_cast<long double>(cs.size));
      for (std::size_t k = 0; k < 3; ++k) {
        auto& st = cs.per_action[k];
        if (st.count == 0) continue;
        const long double cnt = st.count;
        st.mean_rate = static_cast<double>(sum[k] / cnt);
        if (st.count >= 2) {
          const long double var = std::max<long double>(0, (sum_sq[k] - sum[k] * sum[k] / cnt) / (cnt - 1));
          st.half_width = z * static_cast<double>(std::sqrt(var / cnt));
        }
      }
      cs.best_action = best_action_of(cs.per_action);
      out.push_back(cs);
    }
    start = group_end;
  }
  return out;
}

struct Thresholds {
  double t_hi = 0.4;
  double t_lo = 0.2;
};

class ThresholdFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Midpoints between the keep/decrease and decrease/increase bands of conclusive clusters.
inline Thresholds fit_thresholds(const std::vector<ClusterSummary>& clusters) {
  std::array<double, 3> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  std::array<std::size_t, 3> cnt{};
  for (const auto& c : clusters) {
    if (!c.best_action) continue;
    const auto k = static_cast<std::size_t>(*c.best_action);
    lo[k] = std::min(lo[k], c.mean_ratio);
    hi[k] = std::max(hi[k], c.mean_ratio);
    ++cnt[k];
  }
  const auto inc = static_cast<std::size_t>(Action::increase);
  const auto keep = static_cast<std::size_t>(Action::keep);
  const auto dec = static_cast<std::size_t>(Action::decrease);
  for (Action a : kActions) {
    if (cnt[static_cast<std::size_t>(a)] == 0) {
      throw ThresholdFitError("fit_thresholds: no conclusive cluster labeled " + to_string(a));
    }
  }
  if (hi[keep] < lo[dec] && hi[dec] < lo[inc]) return {0.5 * (hi[dec] + lo[inc]), 0.5 * (hi[keep] + lo[dec])};

  std::ostringstream msg;
  msg << "fit_thresholds: action bands are not ordered keep < decrease < increase; keep=[" << lo[keep] << ", "
      << hi[keep] << "] decrease=[" << lo[dec] << ", " << hi[dec] << "] increase=[" << lo[inc] << ", " << hi[inc]
      << "]; violating clusters:";
  for (const auto& c : clusters) {
    if (!c.best_action) continue;
    const bool bad = (*c.best_action == Action::keep && c.mean_ratio >= lo[dec]) ||
                     (*c.best_action == Action::decrease && (c.mean_ratio <= hi[keep] || c.mean_ratio >= lo[inc])) ||
                     (*c.best_action == Action::increase && c.mean_ratio <= hi[dec]);
    if (bad) msg << " (level " << c.level_bucket << ", ratio " << c.mean_ratio << ", " << to_string(*c.best_action) << ")";
  }
  throw ThresholdFitError(msg.str());
}

/// Cut pair minimizing the number of conclusive clusters the rule
/// (keep below t_lo, decrease between, increase above t_hi) mislabels.
///
/// Candidate cuts are midpoints between consecutive cluster ratios plus 0
/// and 1. Ties go to the smallest t_lo, then the smallest t_hi.
/// Unlike fit_thresholds this never rejects interleaved bands.
inline Thresholds fit_thresholds_min_error(const std::vector<ClusterSummary>& clusters,
                                           std::size_t* misclassified = nullptr) {
  std::vector<std::pair<double, Action>> v;
  for (const auto& c : clusters) {
    if (c.best_action) v.emplace_back(c.mean_ratio, *c.best_action);
  }
  if (v.empty()) throw ThresholdFitError("fit_thresholds_min_error: no conclusive clusters");
  std::sort(v.begin(), v.end());
  std::vector<double> cuts{0.0};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i].first < v[i + 1].first) cuts.push_back(0.5 * (v[i].first + v[i + 1].first));
  }
  cuts.push_back(std::max(1.0, v.back().first + 1.0));
  std::size_t best = std::numeric_limits<std::size_t>::max();
  Thresholds out;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    for (std::size_t j = i + 1; j < cuts.size(); ++j) {
      std::size_t err = 0;
      for (const auto& [r, a] : v) {
        const Action pred = r > cuts[j] ? Action::increase : (r > cuts[i] ? Action::decrease : Action::keep);
        err += pred != a;
      }
      if (err < best) {
        best = err;
        out = {cuts[j], cuts[i]};
      }
    }
  }
  if (misclassified) *misclassified = best;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_points_csv(std::ostream& os, const std::vector<DataPoint>& pts) {
  using csv::real;
  os << csv::kSchemaLine << '\n' << "trial,step,action,avg_rate,level,prev_ratio,size,M,r_before,r_after\n";
  for (const auto& p : pts) {
    os << p.trial << ',' << p.step << ',' << to_string(p.action) << ',' << real(p.avg_rate) << ',' << p.level << ','
       << real(p.prev_ratio) << ',' << p.size << ',' << p.M << ',' << real(p.r_before) << ',' << real(p.r_after) << '\n';
  }
}

inline std::vector<DataPoint> read_points_csv(std::istream& is) {
  std::string line;
  if (!csv::next_record(is, line)) throw std::runtime_error("points csv: missing header");
  const auto header = csv::split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"trial", "step", "action", "avg_rate", "level", "prev_ratio"}) {
    if (!col.count(need)) throw std::runtime_error(std::string("points csv: missing column ") + need);
  }
  auto opt = [&](const char* name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    return it == col.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  };
  std::vector<DataPoint> out;
  std::size_t lineno = 1;
  while (csv::next_record(is, line)) {
    ++lineno;
    const auto f = csv::split(line);
    if (f.size() != header.size()) throw std::runtime_error("points csv: wrong field count on record " + std::to_string(lineno));
    DataPoint p;
    try {
      p.trial = std::stoull(f[col["trial"]]);
      p.step = std::stoull(f[col["step"]]);
      p.action = parse_action(f[col["action"]]);
      p.avg_rate = std::stod(f[col["avg_rate"]]);
      p.level = std::stoi(f[col["level"]]);
      p.prev_ratio = std::stod(f[col["prev_ratio"]]);
      if (auto k = opt("size")) p.size = std::stoull(f[*k]);
      if (auto k = opt("M")) p.M = std::stoi(f[*k]);
      if (auto k = opt("r_before")) p.r_before = std::stod(f[*k]);
      if (auto k = opt("r_after")) p.r_after = std::stod(f[*k]);
    } catch (const std::logic_error& e) {
      throw std::runtime_error("points csv: bad value on record " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(p);
  }
  return out;
}

inline void write_clusters_csv(std::ostream& os, const std::vector<ClusterSummary>& clusters) {
  using csv::real;
  os << csv::kSchemaLine << '\n' << "level,mean_ratio,size,best_action";
  for (Action a : kActions) {
    const auto n = to_string(a);
    os << ',' << n << "_mean," << n << "_half_width," << n << "_count";
  }
  os << '\n';
  for (const auto& c : clusters) {
    os << c.level_bucket << ',' << real(c.mean_ratio) << ',' << c.size << ','
       << (c.best_action ? to_string(*c.best_action) : std::string("inconclusive"));
    for (const auto& st : c.per_action) os << ',' << real(st.mean_rate) << ',' << real(st.half_width) << ',' << st.count;
    os << '\n';
  }
}

inline std::vector<ClusterSummary> read_clusters_csv(std::istream& is) {
  std::string line;
  if (!csv::next_record(is, line)) throw std::runtime_error("clusters csv: missing header");
  const std::size_t width = csv::split(line).size();
  if (width != 13) throw std::runtime_error("clusters csv: unexpected header");
  std::vector<ClusterSummary> out;
  while (csv::next_record(is, line)) {
    const auto f = csv::split(line);
    if (f.size() != width) throw std::runtime_error("clusters csv: wrong field count");
    ClusterSummary c;
    c.level_bucket = std::stoi(f[0]);
    c.mean_ratio = std::stod(f[1]);
    c.size = std::stoull(f[2]);
    if (f[3] != "inconclusive") c.best_action = parse_action(f[3]);
    for (std::size_t k = 0; k < 3; ++k) {
      c.per_action[k].mean_rate = std::stod(f[4 + 3 * k]);
      c.per_action[k].half_width = std::stod(f[5 + 3 * k]);
      c.per_action[k].count = std::stoull(f[6 + 3 * k]);
    }
    out.push_back(c);
  }
  return out;
}

inline void write_thresholds(std::ostream& os, const Thresholds& t) {
  os << "t_hi=" << csv::real(t.t_hi) << '\n' << "t_lo=" << csv::real(t.t_lo) << '\n';
}

inline Thresholds read_thresholds(std::istream& is) {
  Thresholds t;
  bool hi = false, lo = false;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("thresholds: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const double v = std::stod(line.substr(eq + 1));
    if (key == "t_hi") {
      t.t_hi = v;
      hi = true;
    } else if (key == "t_lo") {
      t.t_lo = v;
      lo = true;
    } else {
      throw std::runtime_error("thresholds: unknown key '" + key + "'");
    }
  }
  if (!hi || !lo) throw std::runtime_error("thresholds: need both t_hi and t_lo");
  if (!(t.t_lo < t.t_hi)) throw std::runtime_error("thresholds: t_lo must be below t_hi");
  return t;
}

}  // namespace srj
