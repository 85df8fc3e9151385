#ifndef EMPA_AGENTS_LLM_BACKENDS_HPP_
#define EMPA_AGENTS_LLM_BACKENDS_HPP_

// Role adapters over a chat function. Prompt text lives in assets/prompts
// and is filled by plain {{name}} substitution.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "empa/agents/backend.hpp"
#include "empa/agents/judge_wire.hpp"
#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/scenario.hpp"

namespace empa::agents {

struct PromptSet {
  std::string user;
  std::string test;
  std::string judge_iedr;
  std::string judge_mdep;
  std::string director;
};

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PromptSet load_prompts(const std::filesystem::path& dir) {
  return {read_text(dir / "user.txt"), read_text(dir / "test.txt"),
          read_text(dir / "judge_iedr.txt"), read_text(dir / "judge_mdep.txt"),
          read_text(dir / "director.txt")};
}

inline std::string render(std::string tmpl, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "{{" + key + "}}";
    for (auto pos = tmpl.find(token); pos != std::string::npos;
         pos = tmpl.find(token, pos + value.size())) {
      tmpl.replace(pos, token.size(), value);
    }
  }
  return tmpl;
}

inline std::string format_history(const History& h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    out += "[" + std::to_string(i + 1) + "] USER: " + h[i].user + "\n";
    out += "[" + std::to_string(i + 1) + "] MODEL: " + h[i].model + "\n";
  }
  return out.empty() ? "(none)\n" : out;
}

class LlmUser : public UserBackend {
 public:
  LlmUser(std::string id, ChatFn chat, std::string prompt)
      : id_(std::move(id)), chat_(std::move(chat)), prompt_(std::move(prompt)) {}

  std::string id() const override { return id_; }

  std::string respond(const UserContext& ctx) override {
    std::string memories;
    for (const auto& m : ctx.released_memories) memories += "- " + m.key + ": " + m.text + "\n";
    const std::string system = render(
        prompt_, {{"persona", json(ctx.scenario.persona).dump(2)},
                  {"crisis", ctx.scenario.crisis_event},
                  {"guidance", ctx.guidance.empty() ? "(none)" : ctx.guidance},
                  {"pacing", std::string(to_string(ctx.pacing))},
                  {"memories", memories.empty() ? "(none)\n" : memories}});
    // From the simulated user's side its own lines are the assistant turns.
    std::vector<ChatMessage> msgs{{"system", system}};
    for (const auto& t : ctx.history) {
      msgs.push_back({"assistant", t.user});
      msgs.push_back({"user", t.model});
    }
    if (ctx.history.empty()) msgs.push_back({"user", "(the conversation begins; speak first)"});
    return chat_(msgs);
  }

 private:
  std::string id_;
  ChatFn chat_;
  std::string prompt_;
};

class LlmTest : public TestBackend {
 public:
  LlmTest(std::string id, ChatFn chat, std::string system_prompt)
      : id_(std::move(id)), chat_(std::move(chat)), system_(std::move(system_prompt)) {}

  std::string id() const override { return id_; }

  std::string reply(const History& history, std::string_view user_message) override {
    std::vector<ChatMessage> msgs;
    if (!system_.empty()) msgs.push_back({"system", system_});
    for (const auto& t : history) {
      msgs.push_back({"user", t.user});
      msgs.push_back({"assistant", t.model});
    }
    msgs.push_back({"user", std::string(user_message)});
    return chat_(msgs);
  }

 private:
  std::string id_;
  ChatFn chat_;
  std::string system_;
};

class LlmJudge : public JudgeBackend {
 public:
  LlmJudge(std::string id, ChatFn chat, std::string iedr_prompt, std::string mdep_prompt,
           int repair_budget = kDefaultRepairBudget)
      : id_(std::move(id)),
        chat_(std::move(chat)),
        iedr_prompt_(std::move(iedr_prompt)),
        mdep_prompt_(std::move(mdep_prompt)),
        budget_(repair_budget) {}

  std::string id() const override { return id_; }

  rubric::IedrAssessment assess_initial(const scenario::Scenario& s) override {
    const std::string system = render(iedr_prompt_, {{"schema", std::string(kIedrSchema)}});
    const std::string user =
        "PERSONA CARD\n" + json(s.persona).dump(2) + "\n\nCRISIS EVENT\n" + s.crisis_event;
    auto r = ask_with_repair(chat_, {{"system", system}, {"user", user}},
                             [](std::string_view t) { return parse_iedr_output(t); }, budget_);
    last_repairs_ = r.repairs;
    return r.value;
  }

  rubric::MdepWindowRating adjudicate(const JudgeContext& ctx) override {
    const std::string system = render(mdep_prompt_, {{"schema", std::string(kMdepSchema)},
                                                     {"window", std::to_string(ctx.window_index)}});
    History window(ctx.buffer.begin(), ctx.buffer.end());
    const std::string user = "PERSONA CARD\n" + json(ctx.scenario.persona).dump(2) +
                             "\n\nEARLIER DIALOGUE\n" + format_history(ctx.history) +
                             "\nWINDOW " + std::to_string(ctx.window_index) + " TO RATE\n" +
                             format_history(window);
    const int index = ctx.window_index;
    auto r = ask_with_repair(chat_, {{"system", system}, {"user", user}},
                             [index](std::string_view t) { return parse_mdep_output(t, index); },
                             budget_);
    last_repairs_ = r.repairs;
    return r.value;
  }

  int last_repairs() const { return last_repairs_; }

 private:
  std::string id_;
  ChatFn chat_;
  std::string iedr_prompt_;
  std::string mdep_prompt_;
  int budget_;
  int last_repairs_ = 0;
};

// Director replies with {"guidance": "...", "action": {"action": "...", ...}}.
inline DirectorDecision parse_director_output(std::string_view text) {
  json j;
  try {
    j = extract_json_block(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidDirectorAction, e.detail());
  }
  DirectorDecision d;
  if (j.contains("guidance") && j.at("guidance").is_string()) {
    d.guidance = j.at("guidance").get<std::string>();
  }
  if (!j.contains("action")) throw Error(ErrorCode::kInvalidDirectorAction, "missing 'action'");
  d.action = j.at("action").get<DirectorAction>();
  return d;
}

class LlmDirector : public DirectorBackend {
 public:
  LlmDirector(std::string id, ChatFn chat, std::string prompt)
      : id_(std::move(id)), chat_(std::move(chat)), prompt_(std::move(prompt)) {}

  std::string id() const override { return id_; }

  DirectorDecision decide(const History& history, const EpmSummary& summary) override {
    std::string keys;
    for (const auto& k : scenario::memory_keys()) keys += (keys.empty() ? "" : ", ") + k;
    const std::string system = render(prompt_, {{"memory_keys", keys}});
    const std::string user = "STATE\n" + json(summary).dump(2) + "\n\nDIALOGUE\n" +
                             format_history(history);
    return parse_director_output(chat_({{"system", system}, {"user", user}}));
  }

 private:
  std::string id_;
  ChatFn chat_;
  std::string prompt_;
};

}  // namespace empa::agents

#endif  // EMPA_AGENTS_LLM_BACKENDS_HPP_
