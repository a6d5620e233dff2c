// include/dysflux/emission.h
//
// Per-frame phoneme log-posteriors plus boundary probabilities, as produced
// by an upstream acoustic model.

#ifndef DYSFLUX_EMISSION_H_
#define DYSFLUX_EMISSION_H_

#include <string>
#include <vector>

#include "dysflux/common.h"
#include "dysflux/inventory.h"

namespace dysflux {

struct EmissionInput {
  Matrix<double> log_posteriors;      // frames x phonemes, natural log
  std::vector<double> boundary_probs;  // one per frame, in [0, 1]
  double frame_duration = 0.02;        // seconds per frame

  std::size_t num_frames() const { return log_posteriors.rows(); }
  std::size_t num_phonemes() const { return log_posteriors.cols(); }

  /// Copy of frames [start, end).
  EmissionInput Slice(std::size_t start, std::size_t end) const;
};

/// Row tolerance for externally produced emissions.
inline constexpr double kEmissionRowTolerance = 1e-4;

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks shape against the inventory, finiteness, per-row normalization
/// and boundary range. Never throws; every problem is listed.
ValidationReport ValidateEmission(const EmissionInput &e,
                                  const PhonemeInventory &inv,
                                  double row_tolerance = kEmissionRowTolerance);

// Binary emission file:
//   16-byte magic "DYSFLUXEMIT" padded with NULs
//   uint32 little-endian header length, then UTF-8 JSON header
//     {"t", "n", "frame_duration", "inventory_hash"}
//   t*n float32 LE log-posteriors (row-major), then t float32 LE boundaries.
inline constexpr char kEmissionMagic[16] = {'D', 'Y', 'S', 'F', 'L', 'U',
                                            'X', 'E', 'M', 'I', 'T', 0,
                                            0,   0,   0,   0};

void WriteEmission(const std::string &path, const EmissionInput &e,
                   const PhonemeInventory &inv);

/// Reads the binary format, or CSV when the file does not start with the
/// magic. When an inventory is given its hash (binary) or symbol header
/// (CSV) must match. Throws DataError naming the file on any problem.
EmissionInput ReadEmission(const std::string &path,
                           const PhonemeInventory *inv = nullptr);

// CSV alternative:
//   optional comment line "# frame_duration=<seconds>" (default 0.02)
//   header row "boundary,<symbol 0>,...,<symbol n-1>"
//   one row per frame: boundary probability then n log-posteriors.
EmissionInput ParseEmissionCsv(const std::string &text,
                               const PhonemeInventory *inv = nullptr);
std::string FormatEmissionCsv(const EmissionInput &e,
                              const PhonemeInventory &inv);

}  // namespace dysflux

#endif  // DYSFLUX_EMISSION_H_
