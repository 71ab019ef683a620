#include "hybridrank.h"

#include <sstream>
#include <string>

#include "hybridrank/config.hpp"
#include "hybridrank/pipeline.hpp"
#include "hybridrank/report.hpp"

struct hr_session {
  hybridrank::RunConfig config;
  bool config_loaded = false;
  std::string error;
  std::string summary;
  std::string log;
  // Argument staging for the function-pointer trampoline in guard().
  std::string pending_path;
  uint64_t pending_seed = 0;
};

namespace {

int guard(hr_session* s, int (*body)(hr_session*)) {
  if (!s) return HR_ERR_CONFIG;
  s->error.clear();
  s->summary.clear();
  s->log.clear();
  try {
    return body(s);
  } catch (const hybridrank::ConfigError& e) {
    s->error = std::string("config error: ") + e.what();
    return HR_ERR_CONFIG;
  } catch (const hybridrank::StageError& e) {
    s->error = "error [stage=" + e.stage() + "]: " + e.what();
    return HR_ERR_RUN;
  } catch (const std::exception& e) {
    s->error = e.what();
    return HR_ERR_RUN;
  }
}

int require_config(hr_session* s) {
  if (!s->config_loaded) {
    throw hybridrank::ConfigError("config", "no configuration loaded");
  }
  return HR_OK;
}

}  // namespace

extern "C" {

hr_session* hr_session_new(void) { return new (std::nothrow) hr_session(); }

void hr_session_free(hr_session* session) { delete session; }

int hr_session_load_config(hr_session* session, const char* config_path) {
  if (!session) return HR_ERR_CONFIG;
  if (!config_path) {
    session->error = "config error: config path is null";
    return HR_ERR_CONFIG;
  }
  session->pending_path = config_path;
  return guard(session, [](hr_session* s) -> int {
    s->config = hybridrank::RunConfig::load_file(s->pending_path);
    s->config_loaded = true;
    return HR_OK;
  });
}

int hr_session_set_output_dir(hr_session* session, const char* path) {
  if (!session) return HR_ERR_CONFIG;
  if (!path || !*path) {
    session->error = "config error: output_dir: must not be empty";
    return HR_ERR_CONFIG;
  }
  session->pending_path = path;
  return guard(session, [](hr_session* s) -> int {
    require_config(s);
    s->config.output_dir = s->pending_path;
    return HR_OK;
  });
}

int hr_session_set_seed(hr_session* session, uint64_t seed) {
  if (!session) return HR_ERR_CONFIG;
  session->pending_seed = seed;
  return guard(session, [](hr_session* s) -> int {
    require_config(s);
    s->config.override_seed(s->pending_seed);
    return HR_OK;
  });
}

int hr_session_run(hr_session* session) {
  return guard(session, [](hr_session* s) -> int {
    require_config(s);
    std::ostringstream log;
    const hybridrank::HybridReport report = hybridrank::run_hybrid(s->config, &log);
    s->summary = hybridrank::render_summary(report);
    s->log = log.str();
    return HR_OK;
  });
}

int hr_session_assess(hr_session* session) {
  return guard(session, [](hr_session* s) -> int {
    require_config(s);
    std::ostringstream log;
    const auto assessments = hybridrank::run_assess(s->config, &log);
    std::size_t weak = 0;
    for (const auto& a : assessments) weak += a.weak ? 1 : 0;
    std::ostringstream summary;
    summary << "assessed " << assessments.size() << " users, " << weak
            << " weak; artifacts in " << s->config.output_dir << "\n";
    s->summary = summary.str();
    s->log = log.str();
    return HR_OK;
  });
}

int hr_session_prompts(hr_session* session) {
  return guard(session, [](hr_session* s) -> int {
    require_config(s);
    std::ostringstream log;
    hybridrank::run_prompts(s->config, &log);
    s->summary = "prompts written to " + s->config.output_dir + "/prompts\n";
    s->log = log.str();
    return HR_OK;
  });
}

const char* hr_session_last_error(const hr_session* session) {
  return session ? session->error.c_str() : "null session";
}

const char* hr_session_summary(const hr_session* session) {
  return session ? session->summary.c_str() : "";
}

const char* hr_session_log(const hr_session* session) {
  return session ? session->log.c_str() : "";
}

const char* hr_version(void) { return "1.0.0"; }

}  // extern "C"
