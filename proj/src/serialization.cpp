#include "dmab/serialization.hpp"

#include <cstdio>

#include "dmab/errors.hpp"

namespace dmab {

using nlohmann::json;

std::string format_real(double value, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
  return buf;
}

json to_json(const EnvSpec& spec) {
  json j;
  j["variant"] = to_string(spec.variant);
  j["k"] = spec.arms;
  j["T"] = spec.horizon;
  j["seed"] = spec.seed;
  switch (spec.variant) {
    case EnvVariant::kIidGap:
      j["good"] = spec.iid_gap.good;
      j["gap"] = spec.iid_gap.gap;
      if (!spec.iid_gap.means.empty()) j["means"] = spec.iid_gap.means;
      break;
    case EnvVariant::kThm5Switching:
      j["gap"] = kShiftGap;
      break;
    case EnvVariant::kUwb: {
      const UwbParams& u = spec.uwb;
      j["switch_rate"] = u.switch_rate;
      j["raw_max"] = u.raw_max;
      j["good_mean"] = {u.good_mean_lo, u.good_mean_hi};
      j["noisy_mean"] = {u.noisy_mean_lo, u.noisy_mean_hi};
      j["std"] = {u.std_lo, u.std_hi};
      break;
    }
  }
  return j;
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_range(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const auto& r = j.at(key);
  if (!r.is_array() || r.size() != 2) {
    throw SpecError(std::string("env field '") + key + "' must be a [lo, hi] pair");
  }
  lo = r[0].get<double>();
  hi = r[1].get<double>();
}

}  // namespace

EnvSpec env_spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("env spec must be a JSON object");
  EnvSpec spec;
  try {
    spec.variant = parse_env_variant(j.at("variant").get<std::string>());
    spec.arms = j.at("k").get<std::size_t>();
    spec.horizon = j.at("T").get<std::size_t>();
    read_opt(j, "seed", spec.seed);
    switch (spec.variant) {
      case EnvVariant::kIidGap:
        read_opt(j, "good", spec.iid_gap.good);
        read_opt(j, "gap", spec.iid_gap.gap);
        read_opt(j, "means", spec.iid_gap.means);
        break;
      case EnvVariant::kThm5Switching:
        if (j.contains("gap") && j.at("gap").get<double>() != kShiftGap) {
          throw SpecError("thm5_switching uses a fixed gap of 0.2");
        }
        break;
      case EnvVariant::kUwb:
        read_opt(j, "switch_rate", spec.uwb.switch_rate);
        read_opt(j, "raw_max", spec.uwb.raw_max);
        read_range(j, "good_mean", spec.uwb.good_mean_lo, spec.uwb.good_mean_hi);
        read_range(j, "noisy_mean", spec.uwb.noisy_mean_lo, spec.uwb.noisy_mean_hi);
        read_range(j, "std", spec.uwb.std_lo, spec.uwb.std_hi);
        break;
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("invalid env spec: ") + e.what());
  }
  return spec;
}

json metadata_to_json(const GroundTruth& gt) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["spec"] = to_json(gt.spec);
  j["seed"] = gt.spec.seed;
  j["k"] = gt.matrix.arms();
  j["T"] = gt.matrix.horizon();
  j["raw_scale"] = gt.raw_scale;
  j["switch_times"] = gt.switch_times;
  json schedule = json::array();
  for (const Epoch& e : gt.best_arm_schedule) {
    schedule.push_back({{"start", e.start}, {"arm", e.best_arm}});
  }
  j["best_arm_schedule"] = std::move(schedule);
  return j;
}

json to_json(const RegretReport& report) {
  json j;
  j["static_regret"] = report.static_regret;
  j["best_fixed_arm"] = report.best_fixed_arm;
  json sw = json::object();
  for (const auto& [s, r] : report.switching_regret) sw[std::to_string(s)] = r;
  j["switching_regret"] = std::move(sw);
  json seg = json::object();
  for (const auto& [s, segments] : report.best_segmentation) {
    json arr = json::array();
    for (const Segment& x : segments) arr.push_back({{"start", x.start}, {"arm", x.arm}});
    seg[std::to_string(s)] = std::move(arr);
  }
  j["best_segmentation"] = std::move(seg);
  return j;
}

}  // namespace dmab
