#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace batchqa {

enum class Judgment { kYes, kNo };

std::string_view to_string(Judgment judgment);
// Accepts exactly "Yes" / "No" (reference files are strict).
std::optional<Judgment> judgment_from_string(std::string_view text);

// Navigation value: a 1-based utterance index, the literal NA, or (on the
// prediction side only) Unanswered.
class NavLabel {
 public:
  enum class Kind { kIndex, kNA, kUnanswered };

  static NavLabel index(int value) { return NavLabel(Kind::kIndex, value); }
  static NavLabel na() { return NavLabel(Kind::kNA, 0); }
  static NavLabel unanswered() { return NavLabel(Kind::kUnanswered, 0); }

  Kind kind() const { return kind_; }
  bool is_index() const { return kind_ == Kind::kIndex; }
  bool is_na() const { return kind_ == Kind::kNA; }
  bool is_unanswered() const { return kind_ == Kind::kUnanswered; }
  // Only meaningful when is_index().
  int value() const { return value_; }

  // "5", "NA" or "Unanswered".
  std::string to_string() const;

  friend auto operator<=>(const NavLabel&, const NavLabel&) = default;

 private:
  NavLabel(Kind kind, int value) : kind_(kind), value_(value) {}

  Kind kind_;
  int value_;
};

}  // namespace batchqa
