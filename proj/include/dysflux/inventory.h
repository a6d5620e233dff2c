// include/dysflux/inventory.h
//
// Closed phoneme symbol set with articulatory feature vectors.

#ifndef DYSFLUX_INVENTORY_H_
#define DYSFLUX_INVENTORY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dysflux/common.h"

namespace dysflux {

inline constexpr std::string_view kSilence = "SIL";
inline constexpr std::size_t kMinFeatureDim = 8;

/// Phoneme inventory. Immutable after construction; the pairwise
/// similarity table is precomputed so lookups are O(1).
///
/// Invariants enforced by the constructor:
///  - labels are unique and SIL is present with an all-zero feature vector;
///  - every feature vector has the same dimension D >= 8;
///  - feature values lie in [0, 1].
class PhonemeInventory {
 public:
  PhonemeInventory(std::vector<std::string> symbols,
                   std::vector<std::vector<double>> features);

  /// Parses the JSON document {"symbols": [...], "features": {label: [...]}}.
  static PhonemeInventory FromJson(std::string_view json_text);
  static PhonemeInventory FromFile(const std::string &path);

  /// The shipped 40-symbol ARPABET table (data/arpabet_features.json).
  static const PhonemeInventory &Default();

  std::size_t size() const { return symbols_.size(); }
  std::size_t feature_dim() const { return dim_; }
  PhoneId silence() const { return silence_; }
  bool IsSilence(PhoneId id) const { return id == silence_; }

  const std::vector<std::string> &symbols() const { return symbols_; }
  const std::string &Symbol(PhoneId id) const;
  const std::vector<double> &Features(PhoneId id) const;

  /// Throws DataError naming the label when it is not in the inventory.
  PhoneId Id(std::string_view label) const;
  bool Contains(std::string_view label) const;

  /// Cosine similarity of feature vectors clamped to [0, 1]. SIL is
  /// similar only to itself.
  double Similarity(PhoneId a, PhoneId b) const {
    return similarity_[static_cast<std::size_t>(a) * size() +
                       static_cast<std::size_t>(b)];
  }

  /// 16 hex digits of FNV-1a/64 over symbols and features; stored in
  /// emission file headers to catch inventory mismatches.
  const std::string &Hash() const { return hash_; }

  std::string ToJson() const;

 private:
  std::vector<std::string> symbols_;
  std::vector<std::vector<double>> features_;
  std::unordered_map<std::string, PhoneId> index_;
  std::vector<double> similarity_;
  std::size_t dim_ = 0;
  PhoneId silence_ = 0;
  std::string hash_;
};

/// Label-level similarity; throws DataError for unknown labels.
double PhonemeSimilarity(std::string_view a, std::string_view b,
                         const PhonemeInventory &inv);

}  // namespace dysflux

#endif  // DYSFLUX_INVENTORY_H_
