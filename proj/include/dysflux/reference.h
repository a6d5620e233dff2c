// include/dysflux/reference.h
//
// Reference text (words with phoneme pronunciations) and the lexicon used
// to build it. No grapheme-to-phoneme conversion is done: every word must
// be in the lexicon.

#ifndef DYSFLUX_REFERENCE_H_
#define DYSFLUX_REFERENCE_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dysflux/common.h"
#include "dysflux/inventory.h"

namespace dysflux {

struct ReferenceWord {
  std::string text;
  std::vector<PhoneId> phones;
};

class ReferenceText {
 public:
  ReferenceText() = default;
  /// Throws DataError when a word has no phonemes or carries SIL.
  ReferenceText(std::vector<ReferenceWord> words, const PhonemeInventory &inv);

  /// Single pseudo-word from space-separated labels, e.g. "K AE T".
  static ReferenceText FromPhonemes(std::string_view labels,
                                    const PhonemeInventory &inv,
                                    std::string word = "");

  const std::vector<ReferenceWord> &words() const { return words_; }
  const std::vector<PhoneId> &phones() const { return flat_; }
  std::size_t num_words() const { return words_.size(); }
  std::size_t num_phones() const { return flat_.size(); }
  bool empty() const { return flat_.empty(); }

  /// Word index owning flat phoneme `row`.
  int32_t WordOf(std::size_t row) const { return word_of_[row]; }
  /// Flat row range [first, last) of word `w`.
  std::size_t FirstRow(std::size_t w) const { return first_row_[w]; }
  std::size_t EndRow(std::size_t w) const { return first_row_[w + 1]; }

  /// Reference restricted to one word (rows renumbered from 0).
  ReferenceText Word(std::size_t w) const;

  std::string Text() const;

 private:
  std::vector<ReferenceWord> words_;
  std::vector<PhoneId> flat_;
  std::vector<int32_t> word_of_;
  std::vector<std::size_t> first_row_{0};
};

/// Word -> pronunciation map. File format is CMUdict-like: one entry per
/// line, "word PH1 PH2 ...", '#' comments. Words are matched case-
/// insensitively.
class Lexicon {
 public:
  static Lexicon FromText(std::string_view text, const PhonemeInventory &inv);
  static Lexicon FromFile(const std::string &path, const PhonemeInventory &inv);
  /// Lexicon shipped in data/lexicon.txt.
  static const Lexicon &Default();
  /// Source text of the shipped lexicon, for parsing against another
  /// inventory.
  static std::string_view DefaultText();

  bool Contains(std::string_view word) const;
  const std::vector<PhoneId> &Pronunciation(std::string_view word) const;
  const std::map<std::string, std::vector<PhoneId>> &entries() const {
    return entries_;
  }

  /// Splits `sentence` on whitespace and looks every word up.
  ReferenceText Reference(std::string_view sentence,
                          const PhonemeInventory &inv) const;

 private:
  std::map<std::string, std::vector<PhoneId>> entries_;
};

std::string ToLower(std::string_view s);

}  // namespace dysflux

#endif  // DYSFLUX_REFERENCE_H_
