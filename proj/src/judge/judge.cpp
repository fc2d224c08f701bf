#include "ehrcheck/judge/judge.hpp"

#include <optional>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/json_schema.hpp"
#include "ehrcheck/util/parallel.hpp"

namespace ehrcheck::judge {

using gateway::json;
using nlohmann::ordered_json;

namespace {

// The verdict is left as a free string so an off-label answer surfaces as a
// JudgeContractError instead of being healed into one of the labels.
json verdict_schema() {
  return gateway::object_schema({{"verdict", gateway::string_schema(1)}, {"reason", gateway::string_schema(1)}});
}

}  // namespace

VerdictRecord judge_proposition(const Proposition& prop, const ReferenceContext& ctx, gateway::Gateway& gw,
                                const PromptLibrary& prompts, const JudgeOptions& opts) {
  if (!prop.validity.valid()) throw InputError("proposition " + prop.prop_id + " is not valid and cannot be judged");
  ordered_json input;
  input["text"] = prop.text;
  input["reference"] = ctx.rendered;

  gateway::ChatRequest req;
  req.system_prompt = prompts.get(PromptId::JudgeSystem);
  req.user_prompt = render_template(prompts.get(PromptId::JudgeVerdict), {{"json", input.dump(4)}});
  req.temperature = opts.temperature;
  req.max_retries_heal = opts.max_retries_heal;
  req.response_schema = verdict_schema();
  const json reply = gw.chat_structured(req);

  const auto verdict_text = reply.at("verdict").get<std::string>();
  const auto label = parse_verdict(verdict_text);
  if (!label) throw JudgeContractError("unknown verdict \"" + verdict_text + "\" for " + prop.prop_id);

  VerdictRecord rec;
  rec.prop_id = prop.prop_id;
  rec.label = *label;
  rec.reason = reply.at("reason").get<std::string>();
  rec.context_format = ctx.format;
  for (const auto& e : ctx.entries) rec.context_facts.emplace_back(e.fact_id, e.score);
  return rec;
}

std::string summarize_label(const std::vector<std::string>& reasons, Verdict label, gateway::Gateway& gw,
                            const PromptLibrary& prompts, const JudgeOptions& opts) {
  if (reasons.empty()) return kNoReasonsSummary;
  gateway::ChatRequest req;
  req.system_prompt = prompts.get(PromptId::JudgeSystem);
  req.user_prompt = render_template(prompts.get(PromptId::LabelSummary),
                                    {{"label", to_string(label)}, {"json", json{{"reasons", reasons}}.dump(4)}});
  req.temperature = opts.temperature;
  req.max_retries_heal = opts.max_retries_heal;
  req.response_schema = gateway::object_schema({{"summary", gateway::string_schema(1)}});
  return gw.chat_structured(req).at("summary").get<std::string>();
}

VerifyResult verify_text(const std::string& doc_id, const std::string& candidate_text, const index::Snapshot& corpus,
                         const AdmissionWindow& window, const VerifyConfig& cfg, gateway::Gateway& gw,
                         const PromptLibrary& prompts) {
  if (candidate_text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw EmptyInput("candidate text is empty");
  text::DecomposeOptions dopts = cfg.decompose;
  dopts.classify_validity = true;
  dopts.workers = cfg.workers;
  auto props = text::decompose_text(doc_id, candidate_text, cfg.author, dopts, gw, prompts);
  return verify_propositions(doc_id, std::move(props), corpus, window, cfg, gw, prompts);
}

VerifyResult verify_propositions(const std::string& doc_id, std::vector<Proposition> propositions,
                                 const index::Snapshot& corpus, const AdmissionWindow& window, const VerifyConfig& cfg,
                                 gateway::Gateway& gw, const PromptLibrary& prompts) {
  cfg.retrieval.validate();
  VerifyResult result;
  result.propositions = std::move(propositions);

  std::vector<const Proposition*> valid;
  for (const auto& p : result.propositions)
    if (p.validity.valid()) valid.push_back(&p);
  const std::size_t n_invalid = result.propositions.size() - valid.size();
  if (valid.empty())
    throw EmptyInput("no valid propositions to judge in " + doc_id + " (" + std::to_string(n_invalid) + " invalid)",
                     n_invalid);

  const auto filter = index::make_scope_filter(cfg.retrieval.scope, window.admission_id);
  std::vector<std::optional<VerdictRecord>> slots(valid.size());
  std::vector<std::string> failures(valid.size());
  util::parallel_for(valid.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto hits = corpus.retrieve(valid[i]->text, cfg.retrieval, gw, filter);
      const auto ctx = format_context(hits, corpus, cfg.context_format, window, cfg.format);
      VerdictRecord rec = judge_proposition(*valid[i], ctx, gw, prompts, cfg.judge);
      rec.retrieval_method = cfg.retrieval.retrieval_method;
      rec.top_n = cfg.retrieval.top_n;
      rec.scope = cfg.retrieval.scope;
      slots[i] = std::move(rec);
    } catch (const BackendError& e) {
      failures[i] = e.what();
    } catch (const FormatError& e) {
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (slots[i])
      result.verdicts.push_back(std::move(*slots[i]));
    else
      result.errors.push_back({valid[i]->prop_id, failures[i]});
  }
  const double error_rate = static_cast<double>(result.errors.size()) / static_cast<double>(valid.size());
  if (error_rate > cfg.max_error_rate)
    throw BackendError(std::to_string(result.errors.size()) + " of " + std::to_string(valid.size()) +
                       " propositions failed in " + doc_id + "; first: " + result.errors.front().message);
  if (result.verdicts.empty()) throw EmptyInput("no propositions were judged in " + doc_id, n_invalid);

  std::map<Verdict, std::string> summaries;
  for (Verdict v : kAllVerdicts) {
    std::vector<std::string> reasons;
    for (const auto& r : result.verdicts)
      if (r.label == v) reasons.push_back(r.reason);
    summaries[v] = summarize_label(reasons, v, gw, prompts, cfg.judge);
  }
  result.sheet = build_score_sheet(doc_id, result.verdicts, summaries);
  result.sheet.n_invalid = n_invalid;
  return result;
}

}  // namespace ehrcheck::judge
