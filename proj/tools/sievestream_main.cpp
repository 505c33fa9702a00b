// sievestream command-line front end: stream ingestion, simulation,
// selection, benchmarking, and guarantee verification.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sievestream/config.hpp"
#include "sievestream/errors.hpp"
#include "sievestream/harness.hpp"
#include "sievestream/record_io.hpp"

namespace {

using namespace sievestream;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitNumeric = 4;

struct CommonFlags {
  std::string config_path;
  std::string input_path;
  std::string output_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<int> k;
  std::optional<double> epsilon;
  std::optional<int> divide_k;
  std::optional<std::string> cache;
};

Config load_config(const CommonFlags& flags) {
  Config config;
  if (!flags.config_path.empty()) config = Config::parse_file(flags.config_path);
  if (flags.seed) config.set("simulator.seed", std::to_string(*flags.seed));
  if (flags.algorithm) config.set("selector.algorithm", *flags.algorithm);
  if (flags.k) config.set("selector.k", std::to_string(*flags.k));
  if (flags.epsilon) config.set("selector.epsilon", std::to_string(*flags.epsilon));
  if (flags.divide_k) config.set("harness.divide_k", std::to_string(*flags.divide_k));
  if (flags.cache) {
    if (*flags.cache != "on" && *flags.cache != "off") {
      throw ConfigError("--cache expects 'on' or 'off'");
    }
    config.set("harness.cache", *flags.cache);
  }
  return config;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

json round_report_json(const RoundReport& report) {
  json j;
  j["round"] = report.round;
  j["chosen_ids"] = report.selected_ids;
  j["selected_count"] = report.selected_count;
  j["unique_groups"] = report.unique_groups;
  j["objective"] = report.objective;
  if (report.objective_parts_sum != 0.0) {
    j["objective_parts_sum"] = report.objective_parts_sum;
  }
  j["samples_seen"] = report.samples_seen;
  j["stored_peak"] = report.stored_peak;
  j["gain_evaluations"] = report.gain_evaluations;
  j["kernel_evaluations"] = report.kernel_evaluations;
  return j;
}

int cmd_select(const CommonFlags& flags) {
  const Config config = load_config(flags);
  const ObjectiveSpec objective = objective_from_config(config);
  const SelectorConfig selector = selector_from_config(config);
  const int divide = config.get_int("harness.divide_k", 1);
  const bool cache = config.get_on_off("harness.cache", true);
  if (divide > 1 && selector.k % divide != 0) {
    throw ConfigError("harness.divide_k must divide selector.k");
  }

  if (flags.input_path.empty()) throw ConfigError("select needs --input");

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["algorithm"] = std::string(algorithm_name(selector.algorithm));
  manifest["k"] = selector.k;
  manifest["rounds"] = json::array();

  int total_selected = 0;
  std::set<std::string> all_groups;

  auto emit_round = [&](int round_index, const std::vector<Sample>& chosen,
                        const json& round_json) {
    total_selected += static_cast<int>(chosen.size());
    for (const Sample& s : chosen) {
      all_groups.insert(s.group.empty() ? s.id : s.group);
    }
    manifest["rounds"].push_back(round_json);
    (void)round_index;
  };

  if (divide <= 1) {
    // Streaming path: records flow straight into the selector, so resident
    // samples are bounded by selector storage rather than file size.
    RecordReader reader(flags.input_path);
    std::unique_ptr<Selector> current;
    int round_index = 0;

    auto open_round = [&]() {
      SelectorConfig round_selector = selector;
      round_selector.seed = mix_seed(selector.seed, round_index);
      current = make_selector(objective, round_selector, cache);
    };
    auto close_round = [&]() {
      if (!current) return;
      SelectionResult result = current->finish();
      current.reset();

      std::set<std::string> groups;
      json round_json;
      round_json["round"] = round_index;
      round_json["chosen_ids"] = json::array();
      for (const Sample& s : result.chosen) {
        round_json["chosen_ids"].push_back(s.id);
        groups.insert(s.group.empty() ? s.id : s.group);
      }
      round_json["selected_count"] = result.chosen.size();
      round_json["unique_groups"] = groups.size();
      round_json["objective"] = result.value;
      round_json["samples_seen"] = result.samples_seen;
      round_json["stored_peak"] = result.stored_peak;
      round_json["gain_evaluations"] = result.gain_evaluations;
      round_json["kernel_evaluations"] = result.kernel_evaluations;
      emit_round(round_index, result.chosen, round_json);
      ++round_index;
    };

    LabeledSample item;
    while (true) {
      const RecordReader::Event event = reader.next(item);
      if (event == RecordReader::Event::kEnd) break;
      if (event == RecordReader::Event::kRoundBreak) {
        close_round();
        open_round();
        continue;
      }
      if (!current) open_round();
      current->observe(item.sample);
    }
    close_round();
  } else {
    // Divided mode needs each round's length for the contiguous split, so
    // rounds are buffered here.
    const auto rounds = read_rounds(flags.input_path);
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      SelectorConfig round_selector = selector;
      round_selector.seed = mix_seed(selector.seed, r);
      const RoundReport report =
          select_round(rounds[r], objective, round_selector, divide, cache,
                       /*timing=*/false, static_cast<int>(r));
      std::vector<Sample> chosen;
      for (const std::string& id : report.selected_ids) {
        for (const LabeledSample& it : rounds[r]) {
          if (it.sample.id == id) {
            chosen.push_back(it.sample);
            break;
          }
        }
      }
      emit_round(static_cast<int>(r), chosen, round_report_json(report));
    }
  }

  manifest["total_selected"] = total_selected;
  manifest["total_unique_groups"] = all_groups.size();

  const std::string text = manifest.dump(2) + "\n";
  if (flags.output_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(flags.output_path, text);
  }
  return kExitOk;
}

int cmd_simulate(const CommonFlags& flags) {
  const Config config = load_config(flags);
  const WorldSpec world = world_from_config(config);
  const PeculiaritySpec peculiarity = peculiarity_from_config(config);
  if (flags.output_path.empty()) throw ConfigError("simulate needs --output");

  const std::string placeholder = "{round}";
  const auto slot = flags.output_path.find(placeholder);

  if (slot != std::string::npos) {
    for (int r = 0; r < peculiarity.rounds; ++r) {
      std::string path = flags.output_path;
      path.replace(slot, placeholder.size(), std::to_string(r));
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("cannot open output file '" + path + "'");
      const auto round = generate_round(world, peculiarity, r);
      write_records(out, round);
    }
  } else {
    std::ofstream out(flags.output_path, std::ios::binary);
    if (!out) {
      throw ConfigError("cannot open output file '" + flags.output_path + "'");
    }
    for (int r = 0; r < peculiarity.rounds; ++r) {
      write_round_marker(out, r);
      const auto round = generate_round(world, peculiarity, r);
      write_records(out, round);
    }
  }
  return kExitOk;
}

ExperimentConfig experiment_from_config(const Config& config,
                                        const CommonFlags& flags) {
  ExperimentConfig experiment;
  experiment.objective = objective_from_config(config);
  experiment.world = world_from_config(config);
  experiment.peculiarity = peculiarity_from_config(config);
  experiment.record_path = flags.input_path;
  experiment.divide_k = config.get_int("harness.divide_k", 1);
  experiment.cache = config.get_on_off("harness.cache", true);
  experiment.timing = config.get_on_off("harness.timing", false);
  experiment.threads = config.get_int("harness.threads", 0);
  experiment.seeds = config.get_uint64_list("harness.seeds");

  // One run per configured algorithm; sieve entries fan out over the
  // configured epsilon sweep.
  const std::string algorithms =
      config.get_string("harness.algorithms",
                        config.get_string("selector.algorithm", "sieve-streaming-pp"));
  std::vector<double> epsilons = config.get_double_list("harness.epsilons");

  std::stringstream stream(algorithms);
  std::string name;
  while (std::getline(stream, name, ',')) {
    const auto first = name.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = name.find_last_not_of(" \t");
    name = name.substr(first, last - first + 1);

    SelectorConfig base;
    base.algorithm = algorithm_from_name(name);
    base.k = config.get_int("selector.k", base.k);
    base.rejection_budget = config.get_int("selector.t", base.rejection_budget);
    base.seed = config.get_uint64("selector.seed", base.seed);

    const bool sieve_family = base.algorithm == Algorithm::kSieveStreaming ||
                              base.algorithm == Algorithm::kSieveStreamingPP ||
                              base.algorithm == Algorithm::kThreeSieves;
    if (sieve_family) {
      std::vector<double> sweep = epsilons;
      if (sweep.empty() && config.has("selector.epsilon")) {
        sweep.push_back(config.require_double("selector.epsilon"));
      }
      if (sweep.empty()) {
        throw ConfigError("sieve algorithms need selector.epsilon or harness.epsilons");
      }
      for (double eps : sweep) {
        AlgorithmRun run;
        run.config = base;
        run.config.epsilon = eps;
        run.name = name;
        if (sweep.size() > 1) {
          char suffix[32];
          std::snprintf(suffix, sizeof suffix, "-eps%g", eps);
          run.name += suffix;
        }
        experiment.algorithms.push_back(std::move(run));
      }
    } else {
      AlgorithmRun run;
      run.config = base;
      run.name = name;
      experiment.algorithms.push_back(std::move(run));
    }
  }
  experiment.validate();
  return experiment;
}

int cmd_bench(const CommonFlags& flags, int iterations, bool timing) {
  Config config = load_config(flags);
  if (timing) config.set("harness.timing", "on");
  ExperimentConfig experiment = experiment_from_config(config, flags);
  if (flags.output_path.empty()) throw ConfigError("bench needs --output");

  const auto reports = run_experiment(experiment);

  std::ofstream out(flags.output_path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open output file '" + flags.output_path + "'");
  }
  write_round_csv(out, experiment.algorithms, reports);

  const std::vector<std::uint64_t> seeds =
      experiment.seeds.empty() ? std::vector<std::uint64_t>{experiment.world.seed}
                               : experiment.seeds;
  write_text_file(flags.output_path + ".manifest.json",
                  summary_manifest(experiment.algorithms, reports, seeds));

  if (timing) {
    const auto cells = measure_speed(experiment, iterations);
    std::ofstream timing_out(flags.output_path + ".timing.csv", std::ios::binary);
    if (!timing_out) {
      throw ConfigError("cannot open timing output next to '" + flags.output_path + "'");
    }
    write_timing_csv(timing_out, cells);
  }
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, int instances, bool inject_fault,
               const std::string& output_path) {
  const VerificationReport report = verify_guarantees(seed, instances, inject_fault);

  std::cout << "instances:               " << report.instances << "\n"
            << "violations:              " << report.violations << "\n"
            << "min ratio sieve:         " << report.min_ratio_sieve << "\n"
            << "min ratio sspp:          " << report.min_ratio_sspp << "\n"
            << "min ratio greedy:        " << report.min_ratio_greedy << "\n"
            << "max logdet rel error:    " << report.max_logdet_rel_error << "\n"
            << "max inverse abs error:   " << report.max_inverse_abs_error << "\n"
            << "max value drift:         " << report.max_value_drift << "\n"
            << "max sspp stored ratio:   " << report.max_stored_ratio_sspp << "\n";
  if (!report.worst_case.empty()) {
    std::cout << "worst case:              " << report.worst_case << "\n";
  }

  if (!output_path.empty()) {
    json j;
    j["format_version"] = kFormatVersion;
    j["instances"] = report.instances;
    j["violations"] = report.violations;
    j["min_ratio_sieve"] = report.min_ratio_sieve;
    j["min_ratio_sspp"] = report.min_ratio_sspp;
    j["min_ratio_greedy"] = report.min_ratio_greedy;
    j["max_logdet_rel_error"] = report.max_logdet_rel_error;
    j["max_inverse_abs_error"] = report.max_inverse_abs_error;
    j["max_value_drift"] = report.max_value_drift;
    j["max_stored_ratio_sspp"] = report.max_stored_ratio_sspp;
    j["worst_case"] = report.worst_case;
    write_text_file(output_path, j.dump(2) + "\n");
  }
  return report.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming batch selection by submodular maximization"};
  app.require_subcommand(1);

  CommonFlags flags;
  int instances = 500;
  int iterations = 200;
  bool timing = false;
  bool inject_fault = false;
  std::uint64_t verify_seed = 20240917;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "configuration file");
    cmd->add_option("--input", flags.input_path, "input record file");
    cmd->add_option("--output", flags.output_path, "output path");
    cmd->add_option("--seed", [&flags](const std::vector<std::string>& v) {
      flags.seed = std::stoull(v.at(0));
      return true;
    }, "simulator seed override");
    cmd->add_option("--algorithm", [&flags](const std::vector<std::string>& v) {
      flags.algorithm = v.at(0);
      return true;
    }, "selector algorithm override");
    cmd->add_option("--k", [&flags](const std::vector<std::string>& v) {
      flags.k = std::stoi(v.at(0));
      return true;
    }, "budget K override");
    cmd->add_option("--epsilon", [&flags](const std::vector<std::string>& v) {
      flags.epsilon = std::stod(v.at(0));
      return true;
    }, "sieve epsilon override");
    cmd->add_option("--divide-k", [&flags](const std::vector<std::string>& v) {
      flags.divide_k = std::stoi(v.at(0));
      return true;
    }, "split each round's budget into n parts");
    cmd->add_option("--cache", [&flags](const std::vector<std::string>& v) {
      flags.cache = v.at(0);
      return true;
    }, "kernel memoization: on or off");
  };

  CLI::App* select = app.add_subcommand("select", "select a batch from a record stream");
  add_common(select);
  CLI::App* simulate = app.add_subcommand("simulate", "materialize simulator rounds");
  add_common(simulate);
  CLI::App* bench = app.add_subcommand("bench", "run the experiment harness");
  add_common(bench);
  bench->add_option("--iterations", iterations, "timing iterations per cell");
  bench->add_flag("--timing", timing, "measure per-sample latency");
  CLI::App* verify = app.add_subcommand("verify", "run the guarantee verification suite");
  verify->add_option("--instances", instances, "randomized instances to run");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("--output", flags.output_path, "write a JSON report");
  verify->add_flag("--inject-fault", inject_fault,
                   "perturb the sieve acceptance rule (checker sanity test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (select->parsed()) return cmd_select(flags);
    if (simulate->parsed()) return cmd_simulate(flags);
    if (bench->parsed()) return cmd_bench(flags, iterations, timing);
    if (verify->parsed()) {
      return cmd_verify(verify_seed, instances, inject_fault, flags.output_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
