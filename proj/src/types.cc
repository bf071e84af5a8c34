#include "batchqa/types.h"

namespace batchqa {

std::string_view to_string(Judgment judgment) {
  return judgment == Judgment::kYes ? "Yes" : "No";
}

std::optional<Judgment> judgment_from_string(std::string_view text) {
  if (text == "Yes") return Judgment::kYes;
  if (text == "No") return Judgment::kNo;
  return std::nullopt;
}

std::string NavLabel::to_string() const {
  switch (kind_) {
    case Kind::kIndex: return std::to_string(value_);
    case Kind::kNA: return "NA";
    case Kind::kUnanswered: return "Unanswered";
  }
  return {};
}

}  // namespace batchqa
