#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ehrcheck/app/config.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/gateway/replay.hpp"
#include "ehrcheck/index/fact_index.hpp"

namespace ehrcheck::app {

// Builds the configured backends. With `recorder`, every reply is captured
// so the run can later be replayed from a fixture.
std::unique_ptr<gateway::Gateway> make_gateway(const BackendConfig& cfg, const PromptLibrary& prompts,
                                               std::shared_ptr<gateway::Recorder> recorder = nullptr);

// Builtin templates, or the directory named in the config.
PromptLibrary load_prompts(const AppConfig& cfg);

// Decomposes every note into facts of the given type and ingests them.
index::FactIndex build_index(const std::vector<ClinicalNote>& notes, PropType fact_type, const AppConfig& cfg,
                             gateway::Gateway& gw, const PromptLibrary& prompts);

}  // namespace ehrcheck::app
