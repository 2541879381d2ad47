// Copyright 2026 The qident Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qident: run an identification protocol from a JSON configuration.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qident/cli/pipeline.hpp"

namespace {

int run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        unsigned threads, bool oracle) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config '" << config_path << "'\n";
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();
  try {
    const qident::cli::RunConfig cfg = qident::cli::parse_config(text.str(), seed);
    qident::cli::PipelineOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.oracle = oracle;
    const auto res = qident::cli::run_pipeline(cfg, opt);
    if (res.exit_code != 0) {
      std::cerr << "protocol error: " << res.document["error"]["message"].get<std::string>() << '\n';
    } else {
      std::cout << res.document["report"].dump(2) << '\n';
    }
    return res.exit_code;
  } catch (const qident::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const qident::ContractError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qident: intrinsic characterization of simulated quantum devices"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the protocol described by a config file");
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool oracle = false;
  run_cmd->add_option("--config", config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed, "override protocol.seed");
  run_cmd->add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  run_cmd->add_flag("--oracle", oracle, "add noiseless comparison columns");

  app.add_subcommand("list-protocols", "list available protocols");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("list-protocols")) {
    std::cout << qident::cli::list_protocols();
    return 0;
  }
  return run(config, out_dir, seed, threads, oracle);
}
