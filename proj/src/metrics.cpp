#include "dmab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "dmab/errors.hpp"
#include "dmab/serialization.hpp"

namespace dmab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shape(const RewardMatrix& m, const Trajectory& traj) {
  if (traj.choices.size() != m.horizon()) {
    throw DomainError("trajectory has " + std::to_string(traj.choices.size()) +
                      " rounds, matrix has " + std::to_string(m.horizon()));
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

double accrued_reward(const RewardMatrix& m, std::span<const std::size_t> choices) {
  double total = 0.0;
  for (std::size_t t = 0; t < choices.size(); ++t) total += m.at(choices[t], t);
  return total;
}

StaticRegret static_regret(const RewardMatrix& m, const Trajectory& traj) {
  check_shape(m, traj);
  StaticRegret out;
  double best = kNegInf;
  for (std::size_t i = 0; i < m.arms(); ++i) {
    double row_sum = 0.0;
    for (double g : m.row(i)) row_sum += g;
    if (row_sum > best) {
      best = row_sum;
      out.best_arm = i;
    }
  }
  out.regret = best - accrued_reward(m, traj.choices);
  return out;
}

SwitchingRegret switching_regret(const RewardMatrix& m, const Trajectory& traj,
                                 std::size_t segments) {
  check_shape(m, traj);
  const std::size_t T = m.horizon();
  const std::size_t k = m.arms();
  const std::size_t S = segments;
  if (S < 1 || S > T) {
    throw DomainError("segment count " + std::to_string(S) + " outside [1, " +
                      std::to_string(T) + "]");
  }

  // best[s][t]: best value covering rounds 1..t with at most s segments.
  // open(s, t, i): same, with the last segment holding arm i and covering t.
  // last_best[s][t] = max_i open(s, t, i).
  std::vector<std::vector<double>> best(S + 1, std::vector<double>(T + 1, kNegInf));
  std::vector<std::vector<double>> last_best(S + 1, std::vector<double>(T + 1, kNegInf));
  std::vector<double> open(S * T * k, kNegInf);
  std::vector<std::uint8_t> started(S * T * k, 0);
  auto cell = [&](std::size_t s, std::size_t t, std::size_t i) {
    return ((s - 1) * T + (t - 1)) * k + i;
  };

  for (std::size_t s = 0; s <= S; ++s) best[s][0] = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t s = 1; s <= S; ++s) {
      double row_best = kNegInf;
      for (std::size_t i = 0; i < k; ++i) {
        const double extend = t >= 2 ? open[cell(s, t - 1, i)] : kNegInf;
        const double restart = best[s - 1][t - 1];
        const bool start_here = restart > extend;
        const double v = m.at(i, t - 1) + (start_here ? restart : extend);
        open[cell(s, t, i)] = v;
        started[cell(s, t, i)] = start_here ? 1 : 0;
        row_best = std::max(row_best, v);
      }
      last_best[s][t] = row_best;
      best[s][t] = std::max(best[s - 1][t], row_best);
    }
  }

  // Fewest segments first, then lowest arm.
  auto locate = [&](std::size_t s_max, std::size_t t, double target, std::size_t& s_out,
                    std::size_t& arm_out) {
    s_out = 1;
    while (s_out < s_max && last_best[s_out][t] != target) ++s_out;
    arm_out = 0;
    while (arm_out + 1 < k && open[cell(s_out, t, arm_out)] != last_best[s_out][t]) ++arm_out;
  };

  SwitchingRegret out;
  out.comparator = best[S][T];

  std::vector<Segment> reversed;
  std::size_t t = T;
  std::size_t s = 0;
  std::size_t arm = 0;
  locate(S, t, best[S][T], s, arm);
  for (;;) {
    if (!started[cell(s, t, arm)]) {
      --t;
      continue;
    }
    reversed.push_back({t, arm});
    if (t == 1) break;
    const double target = best[s - 1][t - 1];
    --t;
    locate(s - 1, t, target, s, arm);
  }
  out.segmentation.assign(reversed.rbegin(), reversed.rend());
  out.regret = out.comparator - accrued_reward(m, traj.choices);
  return out;
}

double segmentation_value(const RewardMatrix& m, std::span<const Segment> segmentation) {
  double total = 0.0;
  for (std::size_t n = 0; n < segmentation.size(); ++n) {
    const std::size_t end = n + 1 < segmentation.size() ? segmentation[n + 1].start - 1
                                                        : m.horizon();
    for (std::size_t t = segmentation[n].start; t <= end; ++t) {
      total += m.at(segmentation[n].arm, t - 1);
    }
  }
  return total;
}

RegretReport regret_report(const RewardMatrix& m, const Trajectory& traj,
                           std::span<const std::size_t> segment_counts) {
  RegretReport report;
  const StaticRegret sr = static_regret(m, traj);
  report.static_regret = sr.regret;
  report.best_fixed_arm = sr.best_arm;
  for (std::size_t S : segment_counts) {
    SwitchingRegret sw = switching_regret(m, traj, S);
    report.switching_regret[S] = sw.regret;
    report.best_segmentation[S] = std::move(sw.segmentation);
  }
  return report;
}

double empirical_P(std::span<const Trajectory> trajectories, double v) {
  if (trajectories.empty()) throw DomainError("empirical_P needs at least one trajectory");
  const std::size_t T = trajectories.front().half_norms.size();
  if (T == 0) throw DomainError("empirical_P needs non-empty trajectories");
  std::size_t exceed = 0;
  for (const Trajectory& traj : trajectories) {
    if (traj.half_norms.size() != T) {
      throw DomainError("empirical_P trajectories have different horizons");
    }
    const double mean =
        std::accumulate(traj.half_norms.begin(), traj.half_norms.end(), 0.0) /
        static_cast<double>(T);
    if (mean > v) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(trajectories.size());
}

CountCurves count_curves(const Trajectory& traj, std::size_t arms) {
  const std::size_t T = traj.horizon();
  CountCurves c;
  c.chosen.assign(arms, std::vector<std::size_t>(T, 0));
  c.queried.assign(arms, std::vector<std::size_t>(T, 0));
  std::vector<std::size_t> chosen(arms, 0);
  std::vector<std::size_t> queried(arms, 0);
  for (std::size_t t = 0; t < T; ++t) {
    if (traj.choices[t] >= arms) throw DomainError("chosen arm out of range");
    ++chosen[traj.choices[t]];
    if (t < traj.queries.size()) {
      for (std::size_t j : traj.queries[t]) {
        if (j >= arms) throw DomainError("queried arm out of range");
        ++queried[j];
      }
    }
    for (std::size_t i = 0; i < arms; ++i) {
      c.chosen[i][t] = chosen[i];
      c.queried[i][t] = queried[i];
    }
  }
  return c;
}

void write_count_curves_csv(const CountCurves& curves, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const std::size_t k = curves.chosen.size();
  const std::size_t T = k == 0 ? 0 : curves.chosen.front().size();
  out << "t";
  for (std::size_t i = 0; i < k; ++i) out << ",choose_arm_" << i << ",query_arm_" << i;
  out << '\n';
  for (std::size_t t = 0; t < T; ++t) {
    out << t + 1;
    for (std::size_t i = 0; i < k; ++i) {
      out << ',' << curves.chosen[i][t] << ',' << curves.queried[i][t];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "t,chosen,queried,reward,half_norm\n";
  for (std::size_t t = 0; t < traj.horizon(); ++t) {
    out << t + 1 << ',' << traj.choices[t] << ',';
    if (t < traj.queries.size()) {
      for (std::size_t n = 0; n < traj.queries[t].size(); ++n) {
        if (n) out << ';';
        out << traj.queries[t][n];
      }
    }
    out << ',' << format_real(t < traj.rewards_accrued.size() ? traj.rewards_accrued[t] : 0.0, 17)
        << ',' << format_real(t < traj.half_norms.size() ? traj.half_norms[t] : 1.0, 17)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open trajectory file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,chosen", 0) != 0) {
    throw SpecError(path.string() + ": expected header t,chosen,queried,reward,half_norm");
  }
  Trajectory traj;
  std::size_t expected_t = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 5) {
      throw SpecError(path.string() + ": row " + std::to_string(expected_t) +
                      " has " + std::to_string(cols.size()) + " columns");
    }
    try {
      if (std::stoull(cols[0]) != expected_t) {
        throw SpecError(path.string() + ": rounds must be consecutive from 1");
      }
      traj.choices.push_back(std::stoull(cols[1]));
      std::vector<std::size_t> q;
      std::stringstream qs(cols[2]);
      std::string item;
      while (std::getline(qs, item, ';')) {
        if (!item.empty()) q.push_back(std::stoull(item));
      }
      traj.queries.push_back(std::move(q));
      traj.rewards_accrued.push_back(std::stod(cols[3]));
      traj.half_norms.push_back(std::stod(cols[4]));
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const SpecError*>(&e)) throw;
      throw SpecError(path.string() + ": malformed row " + std::to_string(expected_t));
    }
    ++expected_t;
  }
  return traj;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) {
    r.mean = *lo;
    return r;
  }
  const auto n = static_cast<double>(xs.size());
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / (n - 1.0));
  return r;
}

}  // namespace dmab
