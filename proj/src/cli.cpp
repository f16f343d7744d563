#include "dmab/cli.hpp"

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmab/environments.hpp"
#include "dmab/errors.hpp"
#include "dmab/metrics.hpp"
#include "dmab/runner.hpp"
#include "dmab/serialization.hpp"

namespace dmab {

namespace {

void report(std::ostream& err, const char* kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::optional<std::size_t> threads, bool quiet,
            std::ostream& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.base_seed = *seed;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (threads) {
    if (*threads < 1) throw SpecError("--threads must be at least 1");
    cfg.threads = *threads;
  }
  const RunResult result = run_experiment(cfg);
  write_outputs(cfg, result);
  if (!quiet) {
    const double scale = result.environments.front().raw_scale;
    out << "wrote " << cfg.output_dir.string() << '\n';
    for (const AlgorithmResult& a : result.algorithms) {
      if (a.error) {
        out << a.spec.label << ": skipped (" << *a.error << ")\n";
        continue;
      }
      const MeanStd fin = mean_std(a.final_average_rewards());
      const MeanStd reg = mean_std(a.static_regrets());
      out << a.spec.label << ": final average reward " << format_real(fin.mean * scale, 6)
          << " +/- " << format_real(fin.std * scale, 6) << ", static regret "
          << format_real(reg.mean, 6) << '\n';
    }
  }
  return kExitOk;
}

int cmd_gen_env(const std::string& spec_path, const std::string& out_path,
                std::optional<std::uint64_t> seed, bool quiet, std::ostream& out) {
  std::ifstream in(spec_path);
  if (!in) throw SpecError("cannot open spec file " + spec_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(spec_path + ": " + e.what());
  }
  EnvSpec spec = env_spec_from_json(j.contains("env") ? j.at("env") : j);
  if (seed) spec.seed = *seed;
  const GroundTruth gt = generate(spec);
  save_ground_truth(gt, out_path);
  if (!quiet) {
    out << "wrote " << out_path << " and " << metadata_path_for(out_path).string() << '\n';
  }
  return kExitOk;
}

int cmd_regret(const std::string& matrix_path, const std::string& traj_path,
               std::optional<std::size_t> segments, std::ostream& out) {
  const RewardMatrix m = read_matrix_csv(matrix_path);
  const Trajectory traj = read_trajectory_csv(traj_path);
  if (traj.horizon() != m.horizon()) {
    throw SpecError("trajectory has " + std::to_string(traj.horizon()) +
                    " rounds but the matrix has " + std::to_string(m.horizon()));
  }
  for (std::size_t c : traj.choices) {
    if (c >= m.arms()) throw SpecError("trajectory chooses arm " + std::to_string(c) +
                                       " but the matrix has " + std::to_string(m.arms()));
  }
  std::vector<std::size_t> counts{1};
  if (segments) {
    if (*segments < 1 || *segments > m.horizon()) {
      throw SpecError("--segments must be in [1, T]");
    }
    if (*segments != 1) counts.push_back(*segments);
  }
  out << to_json(regret_report(m, traj, counts)).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decoupled multi-armed bandit experiments", "dmab"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override base_seed");
  run->add_option("--out-dir", out_dir, "Override output_dir");
  run->add_option("--threads", threads, "Worker threads for repetitions");
  run->add_flag("--quiet", quiet, "No stdout output");

  std::string spec_path, env_out;
  auto* gen = app.add_subcommand("gen-env", "Generate a reward matrix and its metadata");
  gen->add_option("--spec", spec_path, "Environment spec (JSON)")->required();
  gen->add_option("--out", env_out, "Matrix CSV path; metadata goes next to it")->required();
  gen->add_option("--seed", seed, "Override the spec seed");
  gen->add_flag("--quiet", quiet, "No stdout output");

  std::string matrix_path, traj_path;
  std::optional<std::size_t> segments;
  auto* reg = app.add_subcommand("regret", "Static and switching regret of a trajectory");
  reg->add_option("--matrix", matrix_path, "Matrix CSV")->required();
  reg->add_option("--trajectory", traj_path, "Trajectory CSV")->required();
  reg->add_option("--segments", segments, "Segment count S for switching regret");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "validation", e.what());
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, seed, out_dir, threads, quiet, out);
    if (*gen) return cmd_gen_env(spec_path, env_out, seed, quiet, out);
    if (*reg) return cmd_regret(matrix_path, traj_path, segments, out);
  } catch (const std::invalid_argument& e) {  // SpecError, HorizonTooSmall
    report(err, "validation", e.what());
    return kExitValidation;
  } catch (const DomainError& e) {
    report(err, "validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report(err, "runtime", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace dmab
