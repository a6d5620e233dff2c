// src/reference.cc

#include "dysflux/reference.h"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dysflux {

extern const char *const kDefaultLexiconText;

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

ReferenceText::ReferenceText(std::vector<ReferenceWord> words,
                             const PhonemeInventory &inv)
    : words_(std::move(words)) {
  for (std::size_t w = 0; w != words_.size(); ++w) {
    const auto &word = words_[w];
    if (word.phones.empty()) {
      throw DataError("reference word '" + word.text + "' has no phonemes");
    }
    for (PhoneId p : word.phones) {
      inv.Symbol(p);
      if (inv.IsSilence(p)) {
        throw DataError("reference word '" + word.text + "' contains SIL");
      }
      flat_.push_back(p);
      word_of_.push_back(static_cast<int32_t>(w));
    }
    first_row_.push_back(flat_.size());
  }
}

ReferenceText ReferenceText::FromPhonemes(std::string_view labels,
                                          const PhonemeInventory &inv,
                                          std::string word) {
  std::istringstream is{std::string(labels)};
  ReferenceWord rw;
  rw.text = std::move(word);
  std::string label;
  while (is >> label) rw.phones.push_back(inv.Id(label));
  if (rw.text.empty()) rw.text = std::string(labels);
  return ReferenceText({std::move(rw)}, inv);
}

ReferenceText ReferenceText::Word(std::size_t w) const {
  ReferenceText out;
  out.words_ = {words_.at(w)};
  out.flat_ = words_[w].phones;
  out.word_of_.assign(out.flat_.size(), 0);
  out.first_row_ = {0, out.flat_.size()};
  return out;
}

std::string ReferenceText::Text() const {
  std::string out;
  for (const auto &w : words_) {
    if (!out.empty()) out += ' ';
    out += w.text;
  }
  return out;
}

Lexicon Lexicon::FromText(std::string_view text, const PhonemeInventory &inv) {
  Lexicon lex;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<PhoneId> phones;
    std::string label;
    while (ls >> label) {
      if (!inv.Contains(label)) {
        throw DataError("lexicon line " + std::to_string(line_no) +
                        ": unknown phoneme label '" + label + "'");
      }
      phones.push_back(inv.Id(label));
    }
    if (phones.empty()) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": word '" +
                      word + "' has no phonemes");
    }
    lex.entries_[ToLower(word)] = std::move(phones);
  }
  return lex;
}

Lexicon Lexicon::FromFile(const std::string &path, const PhonemeInventory &inv) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open lexicon file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return FromText(ss.str(), inv);
}

std::string_view Lexicon::DefaultText() { return kDefaultLexiconText; }

const Lexicon &Lexicon::Default() {
  static const Lexicon lex = FromText(kDefaultLexiconText, PhonemeInventory::Default());
  return lex;
}

bool Lexicon::Contains(std::string_view word) const {
  return entries_.count(ToLower(word)) != 0;
}

const std::vector<PhoneId> &Lexicon::Pronunciation(std::string_view word) const {
  auto it = entries_.find(ToLower(word));
  if (it == entries_.end()) {
    throw DataError("word '" + std::string(word) + "' is not in the lexicon");
  }
  return it->second;
}

ReferenceText Lexicon::Reference(std::string_view sentence,
                                 const PhonemeInventory &inv) const {
  std::istringstream is{std::string(sentence)};
  std::vector<ReferenceWord> words;
  std::string w;
  while (is >> w) words.push_back({ToLower(w), Pronunciation(w)});
  return ReferenceText(std::move(words), inv);
}

}  // namespace dysflux
