#include "dmab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dmab/errors.hpp"
#include "dmab/serialization.hpp"

namespace dmab {

namespace {

constexpr std::size_t kRejectionCap = 1'000'000;

double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  for (std::size_t n = 0; n < kRejectionCap; ++n) {
    const double x = rng.normal(mean, sd);
    if (x >= lo && x <= hi) return x;
  }
  throw GenerationError("truncated Gaussian N(" + std::to_string(mean) + ", " +
                        std::to_string(sd) + ") on [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] rejected 1e6 draws");
}

void validate_common(const EnvSpec& spec) {
  if (spec.arms < 2) throw SpecError("environment needs k >= 2");
  if (spec.horizon < 1) throw SpecError("environment needs T >= 1");
}

void validate_iid_gap(const EnvSpec& spec) {
  const IidGapParams& p = spec.iid_gap;
  if (!(p.gap > 0.0 && p.gap < 1.0)) throw SpecError("iid_gap: gap must be in (0, 1)");
  if (p.good.empty()) throw SpecError("iid_gap: good set is empty");
  std::set<std::size_t> good(p.good.begin(), p.good.end());
  if (good.size() != p.good.size()) throw SpecError("iid_gap: good set has duplicates");
  if (*good.rbegin() >= spec.arms) throw SpecError("iid_gap: good arm out of range");
  if (good.size() == spec.arms) throw SpecError("iid_gap: good set must leave some arm out");
  if (p.means.empty()) return;
  if (p.means.size() != spec.arms) throw SpecError("iid_gap: need one mean per arm");
  double min_good = 1.0;
  double max_bad = 0.0;
  for (std::size_t i = 0; i < spec.arms; ++i) {
    if (!(p.means[i] >= 0.0 && p.means[i] <= 1.0)) {
      throw SpecError("iid_gap: mean of arm " + std::to_string(i) + " outside [0,1]");
    }
    if (good.count(i)) {
      min_good = std::min(min_good, p.means[i]);
    } else {
      max_bad = std::max(max_bad, p.means[i]);
    }
  }
  if (min_good - max_bad < p.gap - 1e-12) {
    throw SpecError("iid_gap: good arms do not beat the others by the gap");
  }
}

void validate_uwb(const EnvSpec& spec) {
  const UwbParams& u = spec.uwb;
  if (!(u.switch_rate > 0.0)) throw SpecError("uwb: switch_rate must be positive");
  if (!(u.raw_max > 0.0)) throw SpecError("uwb: raw_max must be positive");
  auto in_range = [&](double lo, double hi) { return 0.0 <= lo && lo <= hi && hi <= u.raw_max; };
  if (!in_range(u.good_mean_lo, u.good_mean_hi)) throw SpecError("uwb: bad good_mean range");
  if (!in_range(u.noisy_mean_lo, u.noisy_mean_hi)) throw SpecError("uwb: bad noisy_mean range");
  if (!(u.std_lo > 0.0 && u.std_lo <= u.std_hi)) throw SpecError("uwb: bad std range");
}

GroundTruth make_truth(const EnvSpec& spec, double raw_scale) {
  return GroundTruth{spec, RewardMatrix(spec.arms, spec.horizon), raw_scale, {}, {}};
}

}  // namespace

std::string to_string(EnvVariant v) {
  switch (v) {
    case EnvVariant::kIidGap: return "iid_gap";
    case EnvVariant::kThm5Switching: return "thm5_switching";
    case EnvVariant::kUwb: return "uwb";
  }
  return "unknown";
}

EnvVariant parse_env_variant(const std::string& name) {
  if (name == "iid_gap") return EnvVariant::kIidGap;
  if (name == "thm5_switching") return EnvVariant::kThm5Switching;
  if (name == "uwb") return EnvVariant::kUwb;
  throw SpecError("unknown environment variant '" + name + "'");
}

void validate(const EnvSpec& spec) {
  validate_common(spec);
  switch (spec.variant) {
    case EnvVariant::kIidGap: validate_iid_gap(spec); break;
    case EnvVariant::kThm5Switching:
      if (spec.arms < 3) throw SpecError("thm5_switching needs k >= 3");
      if (spec.horizon < 2) throw SpecError("thm5_switching needs T >= 2");
      break;
    case EnvVariant::kUwb: validate_uwb(spec); break;
  }
}

double truncated_normal_mean(double mean, double sd, double lo, double hi) {
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const double z = normal_cdf(b) - normal_cdf(a);
  if (z <= 0.0) return std::clamp(mean, lo, hi);
  return mean + sd * (normal_pdf(a) - normal_pdf(b)) / z;
}

GroundTruth gen_iid_gap(const EnvSpec& spec) {
  if (spec.variant != EnvVariant::kIidGap) throw SpecError("gen_iid_gap: wrong variant");
  validate(spec);
  Rng rng(spec.seed);
  const IidGapParams& p = spec.iid_gap;
  const std::set<std::size_t> good(p.good.begin(), p.good.end());

  std::vector<double> means = p.means;
  if (means.empty()) {
    means.assign(spec.arms, 0.0);
    double min_good = 1.0;
    for (std::size_t i : good) {
      means[i] = rng.uniform(p.gap, 1.0);
      min_good = std::min(min_good, means[i]);
    }
    for (std::size_t i = 0; i < spec.arms; ++i) {
      if (!good.count(i)) means[i] = rng.uniform(0.0, min_good - p.gap);
    }
  }

  GroundTruth gt = make_truth(spec, 1.0);
  gt.spec.iid_gap.means = means;
  for (std::size_t i = 0; i < spec.arms; ++i) {
    for (std::size_t t = 0; t < spec.horizon; ++t) {
      gt.matrix.set(i, t, rng.bernoulli(means[i]) ? 1.0 : 0.0);
    }
  }
  const auto best = std::max_element(means.begin(), means.end()) - means.begin();
  gt.best_arm_schedule = {{1, static_cast<std::size_t>(best)}};
  return gt;
}

GroundTruth gen_thm5_switching(const EnvSpec& spec) {
  if (spec.variant != EnvVariant::kThm5Switching) {
    throw SpecError("gen_thm5_switching: wrong variant");
  }
  validate(spec);
  Rng rng(spec.seed);
  const std::size_t k = spec.arms;
  const std::size_t T = spec.horizon;

  const std::size_t shifted = 1 + rng.below(k - 1);
  const std::size_t t0 = rng.bernoulli(0.5) ? T : 1 + rng.below(T - 1);

  GroundTruth gt = make_truth(spec, 1.0);
  const double low = 0.5 - kShiftGap;
  const double high = 0.5 + kShiftGap;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t t = 1; t <= T; ++t) {
      double mean = low;
      if (i == 0) {
        mean = 0.5;
      } else if (i == shifted && t > t0) {
        mean = high;
      }
      gt.matrix.set(i, t - 1, rng.bernoulli(mean) ? 1.0 : 0.0);
    }
  }
  gt.best_arm_schedule.push_back({1, 0});
  if (t0 < T) {
    gt.switch_times.push_back(t0 + 1);
    gt.best_arm_schedule.push_back({t0 + 1, shifted});
  }
  return gt;
}

GroundTruth gen_uwb(const EnvSpec& spec) {
  if (spec.variant != EnvVariant::kUwb) throw SpecError("gen_uwb: wrong variant");
  validate(spec);
  Rng rng(spec.seed);
  const UwbParams& u = spec.uwb;
  const std::size_t k = spec.arms;
  const std::size_t T = spec.horizon;
  GroundTruth gt = make_truth(spec, u.raw_max);

  struct Channel {
    double lo, hi;       // uniform phase
    double mean, sd;     // Gaussian phase (the only phase of the good channel)
  };

  std::size_t start = 1;
  while (start <= T) {
    const double len_real = std::ceil(rng.exponential(u.switch_rate));
    const std::size_t remaining = T - start + 1;
    const std::size_t len =
        len_real >= static_cast<double>(remaining)
            ? remaining
            : std::max<std::size_t>(1, static_cast<std::size_t>(len_real));
    const std::size_t end = start + len - 1;

    const std::size_t good = rng.below(k);
    std::vector<Channel> ch(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (i == good) {
        ch[i].mean = rng.uniform(u.good_mean_lo, u.good_mean_hi);
        ch[i].sd = rng.uniform(u.std_lo, u.std_hi);
        continue;
      }
      double a = rng.uniform(0.0, u.raw_max);
      double b = rng.uniform(0.0, u.raw_max);
      while (a == b) b = rng.uniform(0.0, u.raw_max);
      ch[i].lo = std::min(a, b);
      ch[i].hi = std::max(a, b);
      ch[i].mean = rng.uniform(u.noisy_mean_lo, u.noisy_mean_hi);
      ch[i].sd = rng.uniform(u.std_lo, u.std_hi);
    }

    // Noisy channel i uses its uniform phase on rounds where t + i is even.
    std::vector<double> expected(k, 0.0);
    for (std::size_t t = start; t <= end; ++t) {
      for (std::size_t i = 0; i < k; ++i) {
        double raw;
        if (i == good || (t + i) % 2 == 1) {
          raw = truncated_normal(rng, ch[i].mean, ch[i].sd, 0.0, u.raw_max);
        } else {
          raw = rng.uniform(ch[i].lo, ch[i].hi);
        }
        gt.matrix.set(i, t - 1, std::clamp(raw / u.raw_max, 0.0, 1.0));
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double gauss = truncated_normal_mean(ch[i].mean, ch[i].sd, 0.0, u.raw_max);
      if (i == good) {
        expected[i] = gauss;
        continue;
      }
      std::size_t uniform_rounds = 0;
      for (std::size_t t = start; t <= end; ++t) uniform_rounds += (t + i) % 2 == 0;
      const double uni = 0.5 * (ch[i].lo + ch[i].hi);
      expected[i] = (static_cast<double>(uniform_rounds) * uni +
                     static_cast<double>(len - uniform_rounds) * gauss) /
                    static_cast<double>(len);
    }
    const auto best = std::max_element(expected.begin(), expected.end()) - expected.begin();
    if (start > 1) gt.switch_times.push_back(start);
    gt.best_arm_schedule.push_back({start, static_cast<std::size_t>(best)});
    start = end + 1;
  }
  return gt;
}

GroundTruth generate(const EnvSpec& spec) {
  switch (spec.variant) {
    case EnvVariant::kIidGap: return gen_iid_gap(spec);
    case EnvVariant::kThm5Switching: return gen_thm5_switching(spec);
    case EnvVariant::kUwb: return gen_uwb(spec);
  }
  throw SpecError("unknown environment variant");
}

double query_oracle(const GroundTruth& gt, std::size_t t, std::size_t arm) {
  if (t < 1 || t > gt.matrix.horizon() || arm >= gt.matrix.arms()) {
    throw DomainError("query (t=" + std::to_string(t) + ", arm=" + std::to_string(arm) +
                      ") out of range");
  }
  return gt.matrix.at(arm, t - 1);
}

void write_matrix_csv(const RewardMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << 't';
  for (std::size_t i = 0; i < m.arms(); ++i) out << ",arm_" << i;
  out << '\n';
  for (std::size_t t = 0; t < m.horizon(); ++t) {
    out << t + 1;
    for (std::size_t i = 0; i < m.arms(); ++i) out << ',' << format_real(m.at(i, t), 17);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RewardMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open matrix file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SpecError(path.string() + ": empty matrix file");
  std::size_t k = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != "t") throw SpecError(path.string() + ": header must start with 't'");
    while (std::getline(ss, cell, ',')) {
      if (cell != "arm_" + std::to_string(k)) {
        throw SpecError(path.string() + ": unexpected header column '" + cell + "'");
      }
      ++k;
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::vector<double> row;
    try {
      if (std::stoull(cell) != rows.size() + 1) {
        throw SpecError(path.string() + ": rounds must be consecutive from 1");
      }
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    } catch (const std::invalid_argument&) {
      throw SpecError(path.string() + ": malformed row " + std::to_string(rows.size() + 1));
    } catch (const std::out_of_range&) {
      throw SpecError(path.string() + ": malformed row " + std::to_string(rows.size() + 1));
    }
    if (row.size() != k) {
      throw SpecError(path.string() + ": row " + std::to_string(rows.size() + 1) +
                      " has " + std::to_string(row.size()) + " values, expected " +
                      std::to_string(k));
    }
    rows.push_back(std::move(row));
  }
  const std::size_t T = rows.size();
  std::vector<double> values(k * T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < k; ++i) values[i * T + t] = rows[t][i];
  }
  try {
    return RewardMatrix(k, T, std::move(values));
  } catch (const DomainError& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_metadata_json(const GroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << metadata_to_json(gt).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& csv_path) {
  write_matrix_csv(gt.matrix, csv_path);
  write_metadata_json(gt, metadata_path_for(csv_path));
}

GroundTruth load_ground_truth(const std::filesystem::path& csv_path) {
  RewardMatrix m = read_matrix_csv(csv_path);
  const auto meta_path = metadata_path_for(csv_path);
  std::ifstream in(meta_path);
  if (!in) throw SpecError("cannot open metadata file " + meta_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(meta_path.string() + ": " + e.what());
  }
  GroundTruth gt{env_spec_from_json(j.at("spec")), std::move(m), 1.0, {}, {}};
  try {
    gt.raw_scale = j.at("raw_scale").get<double>();
    gt.switch_times = j.at("switch_times").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("best_arm_schedule")) {
      gt.best_arm_schedule.push_back({e.at("start").get<std::size_t>(),
                                      e.at("arm").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(meta_path.string() + ": " + e.what());
  }
  return gt;
}

}  // namespace dmab
