#include <cstdint>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "hybridrank.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment configuration")
      ->required();
  cmd->add_option("--output-dir", args.output_dir, "Override the configured output directory");
  cmd->add_option("--seed", args.seed, "Override every seed in the config")
      ->each([&args](const std::string&) { args.has_seed = true; });
  cmd->add_flag("-v,--verbose", args.verbose, "Print pipeline progress to stderr");
}

int dispatch(const CommonArgs& args, int (*command)(hr_session*)) {
  std::unique_ptr<hr_session, void (*)(hr_session*)> session(hr_session_new(), hr_session_free);
  if (!session) {
    std::cerr << "failed to allocate session\n";
    return HR_ERR_RUN;
  }

  int rc = hr_session_load_config(session.get(), args.config_path.c_str());
  if (rc == HR_OK && !args.output_dir.empty()) {
    rc = hr_session_set_output_dir(session.get(), args.output_dir.c_str());
  }
  if (rc == HR_OK && args.has_seed) {
    rc = hr_session_set_seed(session.get(), args.seed);
  }
  if (rc == HR_OK) {
    rc = command(session.get());
  }

  if (args.verbose) {
    const char* log = hr_session_log(session.get());
    if (log && *log) std::cerr << log;
  }
  if (rc != HR_OK) {
    std::cerr << hr_session_last_error(session.get()) << "\n";
    return rc;
  }
  const char* summary = hr_session_summary(session.get());
  if (summary && *summary) std::cout << summary;
  return HR_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid reranking experiments: train a base recommender, find weakly served "
               "users, and hand only those to an LLM-style reranking backend"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hr_version()));

  CommonArgs run_args, assess_args, prompts_args;
  CLI::App* run = app.add_subcommand("run", "Full pipeline: assess, rerank weak users, report");
  add_common(run, run_args);
  CLI::App* assess = app.add_subcommand("assess", "Train (or reuse) the model and write the "
                                                  "per-user assessment");
  add_common(assess, assess_args);
  CLI::App* prompts = app.add_subcommand("prompts", "Render prompt files for the weak users of "
                                                    "a previous assess run");
  add_common(prompts, prompts_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? HR_OK : HR_ERR_CONFIG;
  }

  if (run->parsed()) return dispatch(run_args, hr_session_run);
  if (assess->parsed()) return dispatch(assess_args, hr_session_assess);
  return dispatch(prompts_args, hr_session_prompts);
}
