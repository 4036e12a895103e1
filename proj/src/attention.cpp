#include "hybviton/attention.hpp"

namespace hybviton {

AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "full") return AttentionMode::full;
  if (s == "no_adjustment") return AttentionMode::no_adjustment;
  if (s == "alpha_fixed_one") return AttentionMode::alpha_fixed_one;
  throw std::invalid_argument("unknown attention mode '" + s + "' (expected full|no_adjustment|alpha_fixed_one)");
}

std::string to_string(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::full:
      return "full";
    case AttentionMode::no_adjustment:
      return "no_adjustment";
    case AttentionMode::alpha_fixed_one:
      return "alpha_fixed_one";
  }
  return "full";
}

}  // namespace hybviton
