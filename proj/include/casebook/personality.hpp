#pragma once

#include <array>
#include <string>
#include <string_view>

#include "casebook/error.hpp"

namespace casebook {

/// One of the 16 Myers-Briggs type codes, e.g. "INTJ".
class PersonalityLabel {
 public:
  /// Throws InvalidPersonality unless `code` is a valid four-letter type.
  /// Lowercase input is accepted and normalized.
  explicit PersonalityLabel(std::string_view code) {
    if (!parse(code, code_)) throw Error(Errc::InvalidPersonality, "'" + std::string(code) + "' is not an MBTI code");
  }

  static bool is_valid(std::string_view code) {
    std::array<char, 4> tmp{};
    return parse(code, tmp);
  }

  std::string code() const { return std::string(code_.begin(), code_.end()); }

  friend bool operator==(const PersonalityLabel&, const PersonalityLabel&) = default;

 private:
  static bool parse(std::string_view code, std::array<char, 4>& out) {
    static constexpr std::array<std::string_view, 4> axes{"IE", "NS", "TF", "JP"};
    if (code.size() != 4) return false;
    for (std::size_t i = 0; i < 4; ++i) {
      char c = code[i];
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (axes[i].find(c) == std::string_view::npos) return false;
      out[i] = c;
    }
    return true;
  }

  std::array<char, 4> code_{};
};

}  // namespace casebook
