// src/inventory.cc

#include "dysflux/inventory.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dysflux {

// Defined in the generated default_inventory_data.cc.
extern const char *const kDefaultInventoryJson;

namespace {

std::string Fnv1a64Hex(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

PhonemeInventory::PhonemeInventory(std::vector<std::string> symbols,
                                   std::vector<std::vector<double>> features)
    : symbols_(std::move(symbols)), features_(std::move(features)) {
  if (symbols_.empty()) throw DataError("inventory has no symbols");
  if (features_.size() != symbols_.size()) {
    throw DataError("inventory has " + std::to_string(symbols_.size()) +
                    " symbols but " + std::to_string(features_.size()) +
                    " feature vectors");
  }
  dim_ = features_.front().size();
  if (dim_ < kMinFeatureDim) {
    throw DataError("feature dimension " + std::to_string(dim_) +
                    " is below the minimum of " +
                    std::to_string(kMinFeatureDim));
  }

  bool has_silence = false;
  for (std::size_t i = 0; i != symbols_.size(); ++i) {
    const std::string &s = symbols_[i];
    if (s.empty()) throw DataError("empty phoneme label in inventory");
    if (!index_.emplace(s, static_cast<PhoneId>(i)).second) {
      throw DataError("duplicate phoneme label '" + s + "'");
    }
    const auto &f = features_[i];
    if (f.size() != dim_) {
      throw DataError("feature vector for '" + s + "' has dimension " +
                      std::to_string(f.size()) + ", expected " +
                      std::to_string(dim_));
    }
    for (double v : f) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw DataError("feature value out of [0,1] for '" + s + "'");
      }
    }
    if (s == kSilence) {
      has_silence = true;
      silence_ = static_cast<PhoneId>(i);
      if (std::any_of(f.begin(), f.end(), [](double v) { return v != 0.0; })) {
        throw DataError("SIL must have the all-zero feature vector");
      }
    } else if (std::all_of(f.begin(), f.end(),
                           [](double v) { return v == 0.0; })) {
      throw DataError("non-silence label '" + s +
                      "' has an all-zero feature vector");
    }
  }
  if (!has_silence) throw DataError("inventory is missing SIL");

  const std::size_t n = symbols_.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i != n; ++i) {
    double sq = 0.0;
    for (double v : features_[i]) sq += v * v;
    norms[i] = std::sqrt(sq);
  }
  similarity_.assign(n * n, 0.0);
  for (std::size_t a = 0; a != n; ++a) {
    for (std::size_t b = 0; b != n; ++b) {
      double s;
      if (a == b) {
        s = 1.0;
      } else if (static_cast<PhoneId>(a) == silence_ ||
                 static_cast<PhoneId>(b) == silence_) {
        s = 0.0;
      } else {
        double dot = 0.0;
        for (std::size_t k = 0; k != dim_; ++k) {
          dot += features_[a][k] * features_[b][k];
        }
        s = std::clamp(dot / (norms[a] * norms[b]), 0.0, 1.0);
      }
      similarity_[a * n + b] = s;
    }
  }

  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i != n; ++i) {
    os << symbols_[i] << ':';
    for (double v : features_[i]) os << v << ',';
    os << '\n';
  }
  hash_ = Fnv1a64Hex(os.str());
}

PhonemeInventory PhonemeInventory::FromJson(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("inventory JSON parse error: ") + e.what());
  }
  if (!doc.contains("symbols") || !doc["symbols"].is_array() ||
      !doc.contains("features") || !doc["features"].is_object()) {
    throw DataError("inventory JSON needs 'symbols' array and 'features' object");
  }
  std::vector<std::string> symbols;
  std::vector<std::vector<double>> features;
  try {
    for (const auto &s : doc["symbols"]) {
      symbols.push_back(s.get<std::string>());
      const auto &feats = doc["features"];
      if (!feats.contains(symbols.back())) {
        throw DataError("no feature vector for '" + symbols.back() + "'");
      }
      features.push_back(feats[symbols.back()].get<std::vector<double>>());
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("inventory JSON: ") + e.what());
  }
  return PhonemeInventory(std::move(symbols), std::move(features));
}

PhonemeInventory PhonemeInventory::FromFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open inventory file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return FromJson(ss.str());
}

const PhonemeInventory &PhonemeInventory::Default() {
  static const PhonemeInventory inv = FromJson(kDefaultInventoryJson);
  return inv;
}

const std::string &PhonemeInventory::Symbol(PhoneId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw DataError("phoneme id " + std::to_string(id) + " out of range");
  }
  return symbols_[id];
}

const std::vector<double> &PhonemeInventory::Features(PhoneId id) const {
  Symbol(id);
  return features_[id];
}

PhoneId PhonemeInventory::Id(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    throw DataError("unknown phoneme label '" + std::string(label) + "'");
  }
  return it->second;
}

bool PhonemeInventory::Contains(std::string_view label) const {
  return index_.count(std::string(label)) != 0;
}

std::string PhonemeInventory::ToJson() const {
  nlohmann::ordered_json doc;
  doc["symbols"] = symbols_;
  nlohmann::ordered_json feats = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i != symbols_.size(); ++i) {
    feats[symbols_[i]] = features_[i];
  }
  doc["features"] = feats;
  return doc.dump(2);
}

double PhonemeSimilarity(std::string_view a, std::string_view b,
                         const PhonemeInventory &inv) {
  return inv.Similarity(inv.Id(a), inv.Id(b));
}

}  // namespace dysflux
