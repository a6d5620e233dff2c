// src/bigram.cc

#include "dysflux/bigram.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dysflux {

BigramLM BigramLM::Uniform(std::size_t num_phonemes) {
  BigramLM lm;
  lm.log_transition = Matrix<double>(num_phonemes, num_phonemes,
                                     -std::log(static_cast<double>(num_phonemes)));
  return lm;
}

BigramLM EstimateBigram(const std::vector<std::vector<PhoneId>> &corpus,
                        std::size_t num_phonemes, double add_k) {
  if (corpus.empty()) throw DataError("bigram corpus is empty");
  if (!(add_k > 0.0)) throw DataError("add-k smoothing constant must be positive");
  if (num_phonemes == 0) throw DataError("bigram needs at least one phoneme");

  Matrix<double> counts(num_phonemes, num_phonemes, 0.0);
  for (const auto &seq : corpus) {
    for (PhoneId p : seq) {
      if (p < 0 || static_cast<std::size_t>(p) >= num_phonemes) {
        throw DataError("phoneme id " + std::to_string(p) + " out of range");
      }
    }
    for (std::size_t i = 1; i < seq.size(); ++i) {
      counts(seq[i - 1], seq[i]) += 1.0;
    }
  }

  BigramLM lm;
  lm.log_transition = Matrix<double>(num_phonemes, num_phonemes);
  for (std::size_t a = 0; a != num_phonemes; ++a) {
    double total = 0.0;
    for (double c : counts.row(a)) total += c;
    const double denom = total + add_k * static_cast<double>(num_phonemes);
    for (std::size_t b = 0; b != num_phonemes; ++b) {
      lm.log_transition(a, b) = std::log((counts(a, b) + add_k) / denom);
    }
  }
  return lm;
}

std::string BigramToJson(const BigramLM &lm, const PhonemeInventory &inv) {
  nlohmann::ordered_json doc;
  doc["symbols"] = inv.symbols();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a != lm.size(); ++a) {
    auto r = lm.log_transition.row(a);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["log_transition"] = rows;
  return doc.dump();
}

BigramLM BigramFromJson(const std::string &json_text, const PhonemeInventory &inv) {
  try {
    auto doc = nlohmann::json::parse(json_text);
    auto symbols = doc.at("symbols").get<std::vector<std::string>>();
    if (symbols != inv.symbols()) {
      throw DataError("bigram symbols do not match the inventory");
    }
    auto rows = doc.at("log_transition").get<std::vector<std::vector<double>>>();
    const std::size_t n = inv.size();
    if (rows.size() != n) throw DataError("bigram matrix has wrong row count");
    BigramLM lm;
    lm.log_transition = Matrix<double>(n, n);
    for (std::size_t a = 0; a != n; ++a) {
      if (rows[a].size() != n) throw DataError("bigram matrix row has wrong length");
      double sum = 0.0;
      for (std::size_t b = 0; b != n; ++b) {
        lm.log_transition(a, b) = rows[a][b];
        sum += std::exp(rows[a][b]);
      }
      if (std::abs(sum - 1.0) > 1e-4) {
        throw DataError("bigram row " + std::to_string(a) + " does not sum to 1");
      }
    }
    return lm;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("bigram JSON: ") + e.what());
  }
}

BigramLM ReadBigram(const std::string &path, const PhonemeInventory &inv) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open bigram file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return BigramFromJson(ss.str(), inv);
}

std::vector<std::vector<PhoneId>> ReadPhonemeCorpus(const std::string &path,
                                                    const PhonemeInventory &inv) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open phoneme corpus " + path);
  std::vector<std::vector<PhoneId>> corpus;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<PhoneId> seq;
    std::string label;
    while (ls >> label) seq.push_back(inv.Id(label));
    if (!seq.empty()) corpus.push_back(std::move(seq));
  }
  return corpus;
}

}  // namespace dysflux
