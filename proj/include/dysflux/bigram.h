// include/dysflux/bigram.h
//
// Phoneme bigram language model used by the alignment search.

#ifndef DYSFLUX_BIGRAM_H_
#define DYSFLUX_BIGRAM_H_

#include <string>
#include <vector>

#include "dysflux/common.h"
#include "dysflux/inventory.h"

namespace dysflux {

/// Row-stochastic matrix of natural-log transition probabilities;
/// log_transition(prev, next) = log P(next | prev).
struct BigramLM {
  Matrix<double> log_transition;

  std::size_t size() const { return log_transition.rows(); }
  double LogProb(PhoneId prev, PhoneId next) const {
    return log_transition(static_cast<std::size_t>(prev),
                          static_cast<std::size_t>(next));
  }

  static BigramLM Uniform(std::size_t num_phonemes);
};

/// Add-k smoothed bigram estimate over an inventory of `num_phonemes`
/// symbols. Throws DataError for an empty corpus, non-positive k or an
/// out-of-range id.
BigramLM EstimateBigram(const std::vector<std::vector<PhoneId>> &corpus,
                        std::size_t num_phonemes, double add_k);

/// JSON: {"symbols": [...], "log_transition": [[...], ...]}.
std::string BigramToJson(const BigramLM &lm, const PhonemeInventory &inv);
BigramLM BigramFromJson(const std::string &json_text, const PhonemeInventory &inv);
BigramLM ReadBigram(const std::string &path, const PhonemeInventory &inv);

/// Reads one phoneme sequence per line (space-separated labels).
std::vector<std::vector<PhoneId>> ReadPhonemeCorpus(const std::string &path,
                                                    const PhonemeInventory &inv);

}  // namespace dysflux

#endif  // DYSFLUX_BIGRAM_H_
