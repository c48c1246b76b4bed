#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace rdg {

/// Post-game answers: item id -> Likert 1..5 or free text.
/// Throws ValidationError on anything else.
void validate_questionnaire(const nlohmann::json& answers);

/// Blob name under which a role's answers are stored.
std::string questionnaire_name(const std::string& session, const std::string& role);

}  // namespace rdg
