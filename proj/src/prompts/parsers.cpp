#include "concise/prompts.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <span>

namespace concise::prompts {

namespace {

bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
  return pos <= s.size() && s.size() - pos >= prefix.size() &&
         s.compare(pos, prefix.size(), prefix) == 0;
}

// ---------------------------------------------------------------------------
// Derivative blocks

struct LabelSpelling {
  std::string_view text;
  Technique technique;
};

// Longer spellings first so "pruned text" wins over "pruned".
constexpr std::array<LabelSpelling, 7> kBlockLabels = {{
    {"abstractive summary", Technique::abstractive},
    {"abstractive", Technique::abstractive},
    {"extractive summary", Technique::extractive},
    {"extractive", Technique::extractive},
    {"pruned version", Technique::pruned},
    {"pruned text", Technique::pruned},
    {"pruned", Technique::pruned},
}};

bool is_markup(char c) {
  return c == '#' || c == '*' || c == '_' || c == '>' || c == '-' || c == '`' || c == '=';
}

std::size_t skip_decoration(std::string_view line, std::size_t i) {
  while (i < line.size() && (is_space(line[i]) || is_markup(line[i]))) ++i;
  return i;
}

// Length of a separator (':', '-', en dash, em dash) at line[i], or 0.
std::size_t separator_at(std::string_view line, std::size_t i) {
  if (i >= line.size()) return 0;
  if (line[i] == ':' || line[i] == '-' || line[i] == '=') return 1;
  if (starts_with_at(line, i, "\xE2\x80\x93") || starts_with_at(line, i, "\xE2\x80\x94")) return 3;
  return 0;
}

struct Header {
  Technique technique;
  std::string_view inline_content;
};

std::optional<Header> detect_header(std::string_view line) {
  std::size_t i = skip_decoration(line, 0);
  // Enumerators: "1.", "2)", "(3)".
  if (i < line.size() && line[i] == '(') {
    std::size_t j = i + 1;
    while (j < line.size() && is_digit(line[j])) ++j;
    if (j > i + 1 && j < line.size() && line[j] == ')') i = skip_decoration(line, j + 1);
  } else if (i < line.size() && is_digit(line[i])) {
    std::size_t j = i;
    while (j < line.size() && is_digit(line[j])) ++j;
    if (j < line.size() && (line[j] == '.' || line[j] == ')')) i = skip_decoration(line, j + 1);
  }

  const std::string lower = to_lower(line);
  for (const auto& label : kBlockLabels) {
    if (!starts_with_at(lower, i, label.text)) continue;
    std::size_t k = i + label.text.size();
    if (k < lower.size() && is_alnum(lower[k])) continue;

    while (k < line.size() && (is_space(line[k]) || line[k] == '*' || line[k] == '_' || line[k] == '`')) ++k;
    if (k < line.size() && line[k] == '(') {
      const std::size_t close = line.find(')', k);
      if (close == std::string_view::npos) return std::nullopt;
      k = close + 1;
      while (k < line.size() && (is_space(line[k]) || line[k] == '*' || line[k] == '_')) ++k;
    }
    if (k == line.size()) return Header{label.technique, {}};
    const std::size_t sep = separator_at(line, k);
    if (sep == 0) {
      // Trailing decoration only, e.g. "### Pruned Text ###".
      if (skip_decoration(line, k) == line.size()) return Header{label.technique, {}};
      return std::nullopt;
    }
    k += sep;
    while (k < line.size() && (is_space(line[k]) || line[k] == '*' || line[k] == '_')) ++k;
    return Header{label.technique, line.substr(k)};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Judge verdicts

struct LabelHit {
  std::size_t begin;
  std::size_t end;
  Technique technique;
};

std::vector<LabelHit> find_judge_labels(const std::string& lower) {
  static constexpr std::array<LabelSpelling, 3> kStems = {{
      {"abstractive", Technique::abstractive},
      {"extractive", Technique::extractive},
      {"pruned", Technique::pruned},
  }};
  std::vector<LabelHit> hits;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (i > 0 && is_alpha(lower[i - 1])) continue;
    for (const auto& stem : kStems) {
      if (!starts_with_at(lower, i, stem.text)) continue;
      const std::size_t end = i + stem.text.size();
      if (end < lower.size() && is_alpha(lower[end])) continue;
      hits.push_back({i, end, stem.technique});
      break;
    }
  }
  return hits;
}

// ---------------------------------------------------------------------------
// Ranking

struct Mention {
  std::size_t begin;
  std::size_t end;
  Choice choice;
};

// Spellings naming a candidate. Digit forms are checked for a trailing
// digit so "answer 1" never matches "answer 12".
constexpr std::array<std::pair<std::string_view, Choice>, 26> kMentions = {{
    {"answer 1", Choice::first},       {"answer 2", Choice::second},
    {"answer #1", Choice::first},      {"answer #2", Choice::second},
    {"answer (1)", Choice::first},     {"answer (2)", Choice::second},
    {"answer one", Choice::first},     {"answer two", Choice::second},
    {"answer1", Choice::first},        {"answer2", Choice::second},
    {"response 1", Choice::first},     {"response 2", Choice::second},
    {"option 1", Choice::first},       {"option 2", Choice::second},
    {"first answer", Choice::first},   {"second answer", Choice::second},
    {"1st answer", Choice::first},     {"2nd answer", Choice::second},
    {"first response", Choice::first}, {"second response", Choice::second},
    {"first one", Choice::first},      {"second one", Choice::second},
    {"the former", Choice::first},     {"the latter", Choice::second},
    {"first option", Choice::first},   {"second option", Choice::second},
}};

std::vector<Mention> find_mentions(const std::string& lower) {
  std::vector<Mention> out;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (i > 0 && is_alnum(lower[i - 1])) continue;
    for (const auto& [text, choice] : kMentions) {
      if (!starts_with_at(lower, i, text)) continue;
      const std::size_t end = i + text.size();
      if (end < lower.size() && is_alnum(lower[end])) continue;
      out.push_back({i, end, choice});
      i = end - 1;
      break;
    }
  }
  return out;
}

Choice other(Choice c) { return c == Choice::first ? Choice::second : Choice::first; }

constexpr std::array<std::string_view, 14> kPositiveAfter = {
    "is more concise", "is the more concise", "is the most concise", "is more succinct",
    "is more efficient", "is better", "is the better", "is preferred", "is preferable",
    "is shorter", "is the winner", "wins", "was more concise", "is clearly more concise"};
constexpr std::array<std::string_view, 7> kNegativeAfter = {
    "is less concise", "is more verbose", "is longer", "is wordier", "is less efficient",
    "is redundant", "is too verbose"};
constexpr std::array<std::string_view, 16> kPositiveBefore = {
    "choose", "chose", "choosing", "select", "selected", "pick", "picked", "prefer",
    "preferred", "go with", "choice is", "choice:", "winner is", "winner:", "answer:",
    "recommend"};

bool starts_with_any(std::string_view s, std::span<const std::string_view> options) {
  return std::any_of(options.begin(), options.end(),
                     [&](std::string_view o) { return s.substr(0, o.size()) == o; });
}

bool ends_with_any(std::string_view s, std::span<const std::string_view> options) {
  return std::any_of(options.begin(), options.end(), [&](std::string_view o) {
    return s.size() >= o.size() && s.substr(s.size() - o.size()) == o;
  });
}

std::optional<Choice> choice_from_digit_or_mention(std::string_view rest) {
  rest = trim(rest);
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '"' || rest.front() == '\'')) {
    rest.remove_prefix(1);
  }
  if (!rest.empty() && (rest[0] == '1' || rest[0] == '2') &&
      (rest.size() == 1 || !is_alnum(rest[1]))) {
    return rest[0] == '1' ? Choice::first : Choice::second;
  }
  const std::string lower(rest.substr(0, 24));
  const auto mentions = find_mentions(lower);
  if (!mentions.empty() && mentions.front().begin <= 4) return mentions.front().choice;
  for (std::string_view word : {std::string_view("first"), std::string_view("second")}) {
    if (lower.substr(0, word.size()) == word &&
        (lower.size() == word.size() || !is_alpha(lower[word.size()]))) {
      return word == "first" ? Choice::first : Choice::second;
    }
  }
  return std::nullopt;
}

}  // namespace

DerivativeSet parse_derivatives(std::string_view raw) {
  struct Block {
    std::optional<Technique> technique;  // empty for a duplicate label
    std::string text;
  };
  std::vector<Block> blocks;
  std::set<Technique> seen;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = raw.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (const auto header = detect_header(line)) {
      Block b;
      if (seen.insert(header->technique).second) b.technique = header->technique;
      b.text = std::string(header->inline_content);
      blocks.push_back(std::move(b));
    } else if (!blocks.empty()) {
      blocks.back().text += '\n';
      blocks.back().text += line;
    }
    pos = nl + 1;
  }

  DerivativeSet out;
  for (const auto& b : blocks) {
    if (b.technique) out.get(*b.technique) = std::string(trim(b.text));
  }
  return out;
}

std::optional<std::string> parse_single_derivative(std::string_view raw, Technique t) {
  return parse_derivatives(raw).get(t);
}

JudgeVerdicts parse_judge(std::string_view raw) {
  const std::string lower = to_lower(raw);
  const auto hits = find_judge_labels(lower);

  std::array<int, 3> yes{};
  std::array<int, 3> no{};
  for (std::size_t h = 0; h < hits.size(); ++h) {
    const std::size_t seg_end = h + 1 < hits.size() ? hits[h + 1].begin : lower.size();
    const auto idx = static_cast<std::size_t>(hits[h].technique);
    std::size_t i = hits[h].end;
    while (i < seg_end) {
      if (!is_alpha(lower[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < seg_end && is_alpha(lower[j])) ++j;
      const std::string_view word(lower.data() + i, j - i);
      if (word == "yes") ++yes[idx];
      if (word == "no") ++no[idx];
      i = j;
    }
  }

  JudgeVerdicts v;
  for (Technique t : kTechniques) {
    const auto idx = static_cast<std::size_t>(t);
    v.set(t, yes[idx] > 0 && no[idx] == 0);
  }
  return v;
}

StructuredReply<int> parse_score(std::string_view raw) {
  StructuredReply<int> out;
  out.raw = std::string(raw);
  const std::string lower = to_lower(raw);

  struct Number {
    std::size_t begin;
    std::size_t end;
    bool negative;
    bool fractional;
    std::int64_t int_part;
  };
  auto read_number = [&](std::size_t i) -> std::optional<Number> {
    if (i >= lower.size()) return std::nullopt;
    Number n{i, i, false, false, 0};
    if (lower[i] == '-' && i + 1 < lower.size() && is_digit(lower[i + 1])) {
      n.negative = true;
      ++i;
    }
    if (!is_digit(lower[i])) return std::nullopt;
    std::size_t j = i;
    while (j < lower.size() && is_digit(lower[j])) {
      if (n.int_part < 1000000) n.int_part = n.int_part * 10 + (lower[j] - '0');
      ++j;
    }
    if (j + 1 < lower.size() && (lower[j] == '.' || lower[j] == ',') && is_digit(lower[j + 1])) {
      n.fractional = true;
      ++j;
      while (j < lower.size() && is_digit(lower[j])) ++j;
    }
    n.end = j;
    return n;
  };
  auto accept = [&](const Number& n) -> StructuredReply<int>& {
    if (n.negative || n.int_part > 10) {
      out.failure = "score " + lower.substr(n.begin, n.end - n.begin) + " outside 0-10";
    } else if (n.fractional) {
      out.failure = "score " + lower.substr(n.begin, n.end - n.begin) + " is not an integer";
    } else {
      out.payload = static_cast<int>(n.int_part);
    }
    return out;
  };

  // Labeled form: "score: 7", "score = 7", "score is 7", "score of 7".
  for (std::size_t at = lower.find("score"); at != std::string::npos;
       at = lower.find("score", at + 1)) {
    if ((at > 0 && is_alpha(lower[at - 1])) ||
        (at + 5 < lower.size() && is_alpha(lower[at + 5]))) {
      continue;
    }
    std::size_t i = at + 5;
    while (i < lower.size() && (is_space(lower[i]) || lower[i] == '*')) ++i;
    if (i < lower.size() && (lower[i] == ':' || lower[i] == '=')) {
      ++i;
    } else if (starts_with_at(lower, i, "is ") || starts_with_at(lower, i, "of ")) {
      i += 3;
    } else {
      continue;
    }
    while (i < lower.size() && (is_space(lower[i]) || lower[i] == '*')) ++i;
    if (const auto n = read_number(i)) return accept(*n);
  }

  // Otherwise the first standalone integer in range. Range mentions such
  // as "0-10" or "0 to 10" and denominators ("/10") are skipped.
  for (std::size_t i = 0; i < lower.size();) {
    const bool boundary = i == 0 || (!is_alnum(lower[i - 1]) && lower[i - 1] != '.');
    const auto n = boundary ? read_number(i) : std::nullopt;
    if (!n) {
      ++i;
      continue;
    }
    std::size_t after = n->end;
    const bool embedded = after < lower.size() && is_alpha(lower[after]);
    const bool denominator = n->begin > 0 && lower[n->begin - 1] == '/';
    std::size_t k = after;
    while (k < lower.size() && lower[k] == ' ') ++k;
    std::size_t sep = 0;
    if (starts_with_at(lower, k, "-")) sep = 1;
    else if (starts_with_at(lower, k, "to ") || starts_with_at(lower, k, "\xe2\x80\x93")) sep = 3;
    if (sep > 0) {
      std::size_t m = k + sep;
      while (m < lower.size() && lower[m] == ' ') ++m;
      if (m < lower.size() && is_digit(lower[m])) {
        // A range such as "0-10" or "0 to 10"; skip both bounds.
        while (m < lower.size() && is_digit(lower[m])) ++m;
        i = m;
        continue;
      }
    }
    if (!embedded && !denominator && !n->negative && !n->fractional && n->int_part <= 10) {
      out.payload = static_cast<int>(n->int_part);
      return out;
    }
    if (!embedded && !denominator && n->fractional && !n->negative && n->int_part <= 10) {
      return accept(*n);
    }
    i = after;
  }
  out.failure = "no integer score between 0 and 10 found";
  return out;
}

StructuredReply<Choice> parse_ranking(std::string_view raw) {
  StructuredReply<Choice> out;
  out.raw = std::string(raw);
  const std::string lower = to_lower(raw);

  for (std::size_t at = lower.find("choice"); at != std::string::npos;
       at = lower.find("choice", at + 1)) {
    if (at > 0 && is_alpha(lower[at - 1])) continue;
    std::size_t i = at + 6;
    while (i < lower.size() && (is_space(lower[i]) || lower[i] == '*')) ++i;
    if (i >= lower.size() || lower[i] != ':') continue;
    if (const auto c = choice_from_digit_or_mention(std::string_view(lower).substr(i + 1))) {
      out.payload = *c;
      return out;
    }
  }

  const auto mentions = find_mentions(lower);
  std::set<Choice> named;
  for (const auto& m : mentions) named.insert(m.choice);

  if (named.empty()) {
    if (const auto c = choice_from_digit_or_mention(lower);
        c && trim(lower).size() <= 2) {
      out.payload = *c;
      return out;
    }
    out.failure = "reply names neither answer";
    return out;
  }
  if (named.size() == 1) {
    out.payload = *named.begin();
    return out;
  }

  std::set<Choice> votes;
  const std::string_view view(lower);
  for (const auto& m : mentions) {
    std::string_view after = view.substr(m.end);
    while (!after.empty() && (is_space(after.front()) || after.front() == '*' ||
                              after.front() == ')' || after.front() == '"')) {
      after.remove_prefix(1);
    }
    const std::size_t from = m.begin >= 32 ? m.begin - 32 : 0;
    std::string_view before = view.substr(from, m.begin - from);
    while (!before.empty() && (is_space(before.back()) || before.back() == '*' ||
                               before.back() == '"' || before.back() == '(')) {
      before.remove_suffix(1);
    }
    if (starts_with_any(after, kPositiveAfter) || ends_with_any(before, kPositiveBefore)) {
      votes.insert(m.choice);
    }
    if (starts_with_any(after, kNegativeAfter) ||
        ends_with_any(before, std::array<std::string_view, 1>{"than"})) {
      votes.insert(other(m.choice));
    }
  }
  if (votes.size() == 1) {
    out.payload = *votes.begin();
    return out;
  }
  out.failure = "reply names both answers without a single preference";
  return out;
}

}  // namespace concise::prompts
