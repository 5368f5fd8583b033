#include "dtrbench/llm/parse.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <string>

#include "dtrbench/errors.hpp"
#include "dtrbench/sim/types.hpp"

namespace dtrbench::llm {

namespace {

const std::regex& number_re() {
  static const std::regex re(R"(-?(?:\d+(?:\.\d+)?|\.\d+))");
  return re;
}

const std::regex& whole_number_re() {
  static const std::regex re(R"(\s*(-?(?:\d+(?:\.\d+)?|\.\d+))\s*)");
  return re;
}

double to_double(const std::string& s) {
  // strtod accepts everything the regexes admit; huge literals become inf and are rejected later.
  return std::strtod(s.c_str(), nullptr);
}

ParseResult ok(double v) { return {v, ParseStatus::Ok, false}; }

}  // namespace

std::string_view to_string(ParseStatus s) {
  switch (s) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Clamped: return "clamped";
    case ParseStatus::Unparseable: return "unparseable";
  }
  return "unparseable";
}

ParseStatus parse_parse_status(std::string_view name) {
  for (ParseStatus s : {ParseStatus::Ok, ParseStatus::Clamped, ParseStatus::Unparseable})
    if (to_string(s) == name) return s;
  throw FormatError("unknown parse status '" + std::string(name) + "'");
}

ParseResult parse_zero_shot(std::string_view text) {
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, number_re())) return {};
  return ok(to_double(m.str(0)));
}

ParseResult parse_cot(std::string_view text) {
  constexpr std::string_view open = "<ans>";
  constexpr std::string_view close = "</ans>";
  // Last well-formed span: the last closing tag with an opening tag before it.
  std::size_t end = text.rfind(close);
  while (end != std::string_view::npos) {
    const std::size_t start = text.substr(0, end).rfind(open);
    if (start != std::string_view::npos) {
      const std::string inner(text.substr(start + open.size(), end - start - open.size()));
      std::smatch m;
      if (!std::regex_match(inner, m, whole_number_re())) return {};
      return ok(to_double(m.str(1)));
    }
    if (end == 0) break;
    end = text.substr(0, end).rfind(close);
  }
  const std::size_t tail = text.size() > kCotTailWindow ? text.size() - kCotTailWindow : 0;
  ParseResult r = parse_zero_shot(text.substr(tail));
  r.tail_fallback = true;
  return r;
}

ParseResult clamp_action(double dose) {
  if (!std::isfinite(dose)) return {};
  const double c = std::clamp(dose, 0.0, sim::kMaxRate);
  return {c, c == dose ? ParseStatus::Ok : ParseStatus::Clamped, false};
}

ParseResult parse_reply(PromptKind kind, std::string_view text) {
  const ParseResult raw = is_cot(kind) ? parse_cot(text) : parse_zero_shot(text);
  if (!raw.dose) return raw;
  ParseResult r = clamp_action(*raw.dose);
  r.tail_fallback = raw.tail_fallback;
  return r;
}

}  // namespace dtrbench::llm
