#include "concise/metric.hpp"

#include "concise/errors.hpp"

#include <string>
#include <utility>

namespace concise {

namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one code point at text[pos]. Returns the byte length consumed;
// malformed sequences consume one byte and yield U+FFFD.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  if (lead < 0x80) {
    cp = lead;
    return 1;
  }
  std::size_t len = 0;
  char32_t value = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2; value = lead & 0x1F; min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3; value = lead & 0x0F; min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4; value = lead & 0x07; min = 0x10000;
  } else {
    cp = 0xFFFD;
    return 1;
  }
  if (pos + len > text.size()) {
    cp = 0xFFFD;
    return 1;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) {
      cp = 0xFFFD;
      return 1;
    }
    value = (value << 6) | (cont & 0x3F);
  }
  if (value < min || value > 0x10FFFF) {
    cp = 0xFFFD;
    return 1;
  }
  cp = value;
  return len;
}

template <typename OnWord>
void scan_words(std::string_view text, OnWord&& on_word) {
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (is_unicode_space(cp)) {
      if (word_start != std::string_view::npos) {
        on_word(text.substr(word_start, pos - word_start));
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = pos;
    }
    pos += len;
  }
  if (word_start != std::string_view::npos) on_word(text.substr(word_start));
}

}  // namespace

std::string_view technique_name(Technique t) {
  switch (t) {
    case Technique::abstractive: return "abstractive";
    case Technique::extractive: return "extractive";
    case Technique::pruned: return "pruned";
  }
  return "unknown";
}

const std::optional<std::string>& DerivativeSet::get(Technique t) const {
  switch (t) {
    case Technique::abstractive: return abstractive;
    case Technique::extractive: return extractive;
    case Technique::pruned: break;
  }
  return pruned;
}

std::optional<std::string>& DerivativeSet::get(Technique t) {
  return const_cast<std::optional<std::string>&>(std::as_const(*this).get(t));
}

bool DerivativeSet::all_parsed() const {
  return abstractive.has_value() && extractive.has_value() && pruned.has_value();
}

bool JudgeVerdicts::get(Technique t) const {
  switch (t) {
    case Technique::abstractive: return abstractive_ok;
    case Technique::extractive: return extractive_ok;
    case Technique::pruned: break;
  }
  return pruned_ok;
}

void JudgeVerdicts::set(Technique t, bool ok) {
  switch (t) {
    case Technique::abstractive: abstractive_ok = ok; return;
    case Technique::extractive: extractive_ok = ok; return;
    case Technique::pruned: pruned_ok = ok; return;
  }
}

std::string_view term_status_name(TermStatus s) {
  switch (s) {
    case TermStatus::counted: return "counted";
    case TermStatus::longer_than_answer: return "longer_than_answer";
    case TermStatus::judge_rejected: return "judge_rejected";
    case TermStatus::parse_failed: return "parse_failed";
  }
  return "unknown";
}

double CompressionTerms::term(Technique t) const {
  switch (t) {
    case Technique::abstractive: return abstractive_term;
    case Technique::extractive: return extractive_term;
    case Technique::pruned: break;
  }
  return pruned_term;
}

void CompressionTerms::set_term(Technique t, double value) {
  switch (t) {
    case Technique::abstractive: abstractive_term = value; return;
    case Technique::extractive: extractive_term = value; return;
    case Technique::pruned: pruned_term = value; return;
  }
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  scan_words(text, [&](std::string_view) { ++count; });
  return count;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  scan_words(text, [&](std::string_view w) { words.push_back(w); });
  return words;
}

double compression_term(std::size_t answer_len, std::size_t derivative_len,
                        bool judge_ok, bool parse_ok) {
  if (answer_len == 0) {
    throw InvalidInput("compression_term: answer has zero words");
  }
  if (!parse_ok || !judge_ok || derivative_len > answer_len) return 1.0;
  return static_cast<double>(derivative_len) / static_cast<double>(answer_len);
}

ConciseScore concise_score(const CompressionTerms& terms) {
  for (Technique t : kTechniques) {
    const double v = terms.term(t);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput("concise_score: " + std::string(technique_name(t)) +
                         " term " + std::to_string(v) + " is outside [0,1]");
    }
  }
  ConciseScore out;
  out.terms = terms;
  out.n = 3;
  out.score = (terms.abstractive_term + terms.extractive_term + terms.pruned_term) / 3.0;
  return out;
}

ConciseScore score_answer(const QAPair& pair, const DerivativeSet& derivatives,
                          const JudgeVerdicts& verdicts) {
  const std::size_t answer_len = word_count(pair.answer);
  if (answer_len == 0) {
    throw InvalidInput("score_answer: answer of record '" + pair.id + "' has no words");
  }

  CompressionTerms terms;
  terms.answer_len = answer_len;
  std::vector<std::string> warnings;
  for (Technique t : kTechniques) {
    const auto idx = static_cast<std::size_t>(t);
    const auto& text = derivatives.get(t);
    const bool parsed = text.has_value();
    const bool judged_ok = verdicts.get(t);
    const std::size_t len = parsed ? word_count(*text) : 0;

    terms.derivative_lens[idx] = len;
    terms.set_term(t, compression_term(answer_len, len, judged_ok, parsed));
    if (!parsed) {
      terms.status[idx] = TermStatus::parse_failed;
    } else if (!judged_ok) {
      terms.status[idx] = TermStatus::judge_rejected;
    } else if (len > answer_len) {
      terms.status[idx] = TermStatus::longer_than_answer;
    } else {
      terms.status[idx] = TermStatus::counted;
      if (len == 0) {
        warnings.push_back("empty " + std::string(technique_name(t)) +
                           " derivative was judged meaning-preserving");
      }
    }
  }

  ConciseScore out = concise_score(terms);
  out.warnings = std::move(warnings);
  return out;
}

std::string_view choice_name(Choice c) {
  switch (c) {
    case Choice::first: return "first";
    case Choice::second: return "second";
    case Choice::tie: return "tie";
  }
  return "unknown";
}

std::optional<Choice> parse_choice_name(std::string_view s) {
  if (s == "first") return Choice::first;
  if (s == "second") return Choice::second;
  if (s == "tie") return Choice::tie;
  return std::nullopt;
}

BaselineScore BaselineScore::gpt_score(int value) {
  if (value < 0 || value > 10) {
    throw InvalidInput("gpt_score value " + std::to_string(value) + " outside 0-10");
  }
  return BaselineScore(BaselineKind::gpt_score, value, Choice::tie);
}

BaselineScore BaselineScore::gpt_ranking(Choice choice) {
  if (choice == Choice::tie) {
    throw InvalidInput("gpt_ranking choice must be first or second");
  }
  return BaselineScore(BaselineKind::gpt_ranking, 0, choice);
}

int BaselineScore::score() const {
  if (kind_ != BaselineKind::gpt_score) throw InvalidInput("not a gpt_score baseline");
  return value_;
}

Choice BaselineScore::choice() const {
  if (kind_ != BaselineKind::gpt_ranking) throw InvalidInput("not a gpt_ranking baseline");
  return choice_;
}

}  // namespace concise
