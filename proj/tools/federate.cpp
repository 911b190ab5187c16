// Copyright 2026 The federate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// federate: command-line entry point.
//
//   federate <verb> --config FILE [--set key=value ...]
//
// Verbs: train, sweep, probe, mdl, audit, report. Exit status is 0 on
// success, 1 when a module reports an error, 2 on bad usage.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "federate/cli/commands.hpp"

namespace {

const char* error_kind(const federate::Error& e) {
  using namespace federate;
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
  if (dynamic_cast<const IngestionError*>(&e)) return "ingestion";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return "diverged";
  return "error";
}

int report_error(const std::string& verb, const char* kind,
                 const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"verb", verb}, {"message", message}}
                   .dump()
            << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private, fair representation learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string reps_path;
  std::vector<double> rt_curve;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "key = value configuration file");
    cmd->add_option("-s,--set", overrides, "override a key (key=value)")
        ->take_all();
  };
  CLI::App* train = app.add_subcommand("train", "train one configuration");
  CLI::App* sweep = app.add_subcommand("sweep", "run a hyperparameter sweep");
  CLI::App* probe = app.add_subcommand("probe", "leakage of a representation dump");
  CLI::App* mdl = app.add_subcommand("mdl", "online codelength of a representation dump");
  CLI::App* audit = app.add_subcommand("audit", "sensitivity audit and ratio tests");
  CLI::App* report = app.add_subcommand("report", "aggregate a results file");
  CLI::App* config = app.add_subcommand("config", "print the resolved configuration");
  for (CLI::App* cmd : {train, sweep, probe, mdl, audit, report, config}) {
    add_common(cmd);
  }
  for (CLI::App* cmd : {probe, mdl}) {
    cmd->add_option("-r,--reps", reps_path, "representation dump")->required();
  }
  report->add_option("--rt-curve", rt_curve,
                     "emit selected metrics for each listed RT instead")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw federate::ConfigError("cannot open config '" + config_path + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    } else {
      text = "dataset = synthetic\n";
    }
    const federate::ExperimentConfig c =
        federate::parse_config_text(text, overrides);
    if (verb == "train") return federate::command_train(c, std::cout);
    if (verb == "sweep") return federate::command_sweep(c, std::cout);
    if (verb == "probe") return federate::command_probe(c, reps_path, std::cout);
    if (verb == "mdl") return federate::command_mdl(c, reps_path, std::cout);
    if (verb == "audit") return federate::command_audit(c, std::cout);
    if (verb == "report") return federate::command_report(c, rt_curve, std::cout);
    std::cout << federate::serialize_config(c);
    return 0;
  } catch (const federate::Error& e) {
    return report_error(verb, error_kind(e), e.what());
  } catch (const std::exception& e) {
    return report_error(verb, "internal", e.what());
  }
}
