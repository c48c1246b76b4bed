#include "rdg/server/questionnaire.hpp"

#include "rdg/util/errors.hpp"

namespace rdg {

void validate_questionnaire(const nlohmann::json& answers) {
  if (!answers.is_object() || answers.empty()) throw ValidationError("answers must be a nonempty object");
  for (const auto& [item, value] : answers.items()) {
    if (item.empty()) throw ValidationError("empty item id");
    if (value.is_number_integer()) {
      const auto v = value.get<std::int64_t>();
      if (v < 1 || v > 5) throw ValidationError("item '" + item + "' must be 1..5, got " + std::to_string(v));
    } else if (!value.is_string()) {
      throw ValidationError("item '" + item + "' must be a Likert integer or text");
    }
  }
}

std::string questionnaire_name(const std::string& session, const std::string& role) {
  return session + ".questionnaire." + role + ".json";
}

}  // namespace rdg
