#ifndef EMPA_AGENTS_JUDGE_WIRE_HPP_
#define EMPA_AGENTS_JUDGE_WIRE_HPP_

// Judge output wire format (docs/judge_wire_format.md). The judge answers
// with one JSON object, optionally inside a ```json fence and surrounded by
// prose. Levels must be integers; nothing is rounded or coerced.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "empa/error.hpp"
#include "empa/json.hpp"
#include "empa/rubric.hpp"

namespace empa::agents {

inline constexpr std::string_view kIedrSchema = "empa.judge.iedr/v1";
inline constexpr std::string_view kMdepSchema = "empa.judge.mdep/v1";

enum class JudgeMode { kIedr, kMdep };

// Returns the text of the first balanced {...} object starting at or after
// `from`, honouring JSON string escapes.
inline std::optional<std::string> balanced_object(std::string_view text, std::size_t from = 0) {
  const auto start = text.find('{', from);
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (ch == '\\') {
        escaped = true;
      } else if (ch == '"') {
        in_string = false;
      }
      continue;
    }
    if (ch == '"') {
      in_string = true;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}') {
      if (--depth == 0) return std::string(text.substr(start, i - start + 1));
    }
  }
  return std::nullopt;
}

// A ```json fence wins; otherwise the first balanced object in the text.
inline json extract_json_block(std::string_view text) {
  std::optional<std::string> block;
  const auto fence = text.find("```json");
  if (fence != std::string_view::npos) {
    const auto body = fence + 7;
    const auto end = text.find("```", body);
    const auto inner = text.substr(body, end == std::string_view::npos ? text.npos : end - body);
    block = balanced_object(inner);
  }
  if (!block) block = balanced_object(text);
  if (!block) throw Error(ErrorCode::kMalformedJudgeOutput, "no JSON object found");
  try {
    return json::parse(*block);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedJudgeOutput, std::string("invalid JSON: ") + e.what());
  }
}

namespace detail {

inline void check_schema(const json& j, std::string_view expected) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedJudgeOutput, "top level must be an object");
  if (j.contains("schema") && j.at("schema") != expected) {
    throw Error(ErrorCode::kMalformedJudgeOutput,
                "schema must be '" + std::string(expected) + "'");
  }
}

// Rubric validation errors surface as MalformedJudgeOutput carrying the
// underlying reason, so the repair prompt can quote it.
template <class Fn>
auto as_malformed(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedJudgeOutput) throw;
    throw Error(ErrorCode::kMalformedJudgeOutput, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedJudgeOutput, e.what());
  }
}

}  // namespace detail

inline rubric::IedrAssessment parse_iedr_output(std::string_view text) {
  return detail::as_malformed([&] {
    const json j = extract_json_block(text);
    detail::check_schema(j, kIedrSchema);
    auto a = j.get<rubric::IedrAssessment>();
    rubric::validate(a);
    return a;
  });
}

inline rubric::MdepWindowRating parse_mdep_output(std::string_view text, int window_index) {
  return detail::as_malformed([&] {
    json j = extract_json_block(text);
    detail::check_schema(j, kMdepSchema);
    if (!j.contains("window_index")) j["window_index"] = window_index;
    auto w = j.get<rubric::MdepWindowRating>();
    if (w.window_index != window_index) {
      throw Error(ErrorCode::kMalformedJudgeOutput,
                  "window_index " + std::to_string(w.window_index) + " but expected " +
                      std::to_string(window_index));
    }
    rubric::validate(w);
    return w;
  });
}

inline std::string serialize_iedr_output(const rubric::IedrAssessment& a) {
  json j = a;
  j["schema"] = kIedrSchema;
  return "```json\n" + j.dump(2) + "\n```";
}

inline std::string serialize_mdep_output(const rubric::MdepWindowRating& w) {
  json j = w;
  j["schema"] = kMdepSchema;
  return "```json\n" + j.dump(2) + "\n```";
}

struct ChatMessage {
  std::string role;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using ChatFn = std::function<std::string(const std::vector<ChatMessage>&)>;

inline constexpr int kDefaultRepairBudget = 2;

inline std::string repair_prompt(std::string_view error) {
  return "Your previous answer could not be accepted: " + std::string(error) +
         "\nReply again with one corrected JSON object in the documented format.";
}

template <class T>
struct Repaired {
  T value;
  int repairs = 0;
};

// Asks once, then re-prompts up to `budget` times quoting the validation
// error. Throws MalformedJudgeOutput when every attempt fails.
template <class Parse>
auto ask_with_repair(const ChatFn& chat, std::vector<ChatMessage> messages, Parse&& parse,
                     int budget = kDefaultRepairBudget)
    -> Repaired<decltype(parse(std::string_view{}))> {
  std::string last_error;
  for (int attempt = 0; attempt <= budget; ++attempt) {
    const std::string answer = chat(messages);
    try {
      return {parse(answer), attempt};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedJudgeOutput) throw;
      last_error = e.detail();
      messages.push_back({"assistant", answer});
      messages.push_back({"user", repair_prompt(last_error)});
    }
  }
  throw Error(ErrorCode::kMalformedJudgeOutput,
              "still invalid after " + std::to_string(budget) + " repairs: " + last_error);
}

}  // namespace empa::agents

#endif  // EMPA_AGENTS_JUDGE_WIRE_HPP_
