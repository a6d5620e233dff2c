// src/emission.cc

#include "dysflux/emission.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace dysflux {

namespace {

std::string FormatNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void PutU32(std::string *out, uint32_t v) {
  for (int i = 0; i != 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void PutF32(std::string *out, double v) {
  float f = static_cast<float>(v);
  uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  PutU32(out, bits);
}

double GetF32(const unsigned char *p) {
  uint32_t bits = GetU32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

std::vector<std::string> SplitCsvLine(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = cell.find_first_not_of(' ');
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b));
  }
  return cells;
}

double ParseDouble(const std::string &cell, std::size_t line_no) {
  if (cell == "-inf" || cell == "-Inf") return -INFINITY;
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception &) {
    throw DataError("CSV line " + std::to_string(line_no) + ": bad number '" +
                    cell + "'");
  }
}

}  // namespace

EmissionInput EmissionInput::Slice(std::size_t start, std::size_t end) const {
  if (start >= end || end > num_frames()) {
    throw DataError("invalid frame slice [" + std::to_string(start) + ", " +
                    std::to_string(end) + ") of " +
                    std::to_string(num_frames()) + " frames");
  }
  EmissionInput out;
  out.frame_duration = frame_duration;
  out.log_posteriors = Matrix<double>(end - start, num_phonemes());
  for (std::size_t t = start; t != end; ++t) {
    auto src = log_posteriors.row(t);
    std::copy(src.begin(), src.end(), out.log_posteriors.row(t - start).begin());
  }
  out.boundary_probs.assign(boundary_probs.begin() + start,
                            boundary_probs.begin() + end);
  return out;
}

ValidationReport ValidateEmission(const EmissionInput &e,
                                  const PhonemeInventory &inv,
                                  double row_tolerance) {
  ValidationReport report;
  auto &v = report.violations;
  if (e.num_phonemes() != inv.size()) {
    v.push_back("shape: " + std::to_string(e.num_phonemes()) +
                " phoneme columns but inventory has " +
                std::to_string(inv.size()));
  }
  if (e.boundary_probs.size() != e.num_frames()) {
    v.push_back("shape: " + std::to_string(e.boundary_probs.size()) +
                " boundary probabilities for " + std::to_string(e.num_frames()) +
                " frames");
  }
  if (!(e.frame_duration > 0.0) || !std::isfinite(e.frame_duration)) {
    v.push_back("frame_duration " + FormatNumber(e.frame_duration) +
                " must be positive");
  }
  for (std::size_t t = 0; t != e.num_frames(); ++t) {
    auto row = e.log_posteriors.row(t);
    bool finite_row = true;
    double sum = 0.0;
    for (std::size_t k = 0; k != row.size(); ++k) {
      double x = row[k];
      // -inf is a legitimate zero probability.
      if (std::isnan(x) || x == INFINITY) {
        v.push_back("non-finite value at (" + std::to_string(t) + ", " +
                    std::to_string(k) + ")");
        finite_row = false;
        continue;
      }
      sum += std::exp(x);
    }
    if (finite_row && std::abs(sum - 1.0) > row_tolerance) {
      v.push_back("row " + std::to_string(t) + " sum " + FormatNumber(sum) +
                  (sum > 1.0 ? " exceeds tolerance" : " falls short of tolerance"));
    }
  }
  for (std::size_t t = 0; t != e.boundary_probs.size(); ++t) {
    double b = e.boundary_probs[t];
    if (!(b >= 0.0 && b <= 1.0)) {
      v.push_back("boundary probability " + FormatNumber(b) + " at frame " +
                  std::to_string(t) + " outside [0,1]");
    }
  }
  return report;
}

void WriteEmission(const std::string &path, const EmissionInput &e,
                   const PhonemeInventory &inv) {
  nlohmann::ordered_json header;
  header["t"] = e.num_frames();
  header["n"] = e.num_phonemes();
  header["frame_duration"] = e.frame_duration;
  header["inventory_hash"] = inv.Hash();
  const std::string header_text = header.dump();

  std::string out(kEmissionMagic, sizeof(kEmissionMagic));
  PutU32(&out, static_cast<uint32_t>(header_text.size()));
  out += header_text;
  out.reserve(out.size() + 4 * e.num_frames() * (e.num_phonemes() + 1));
  for (double x : e.log_posteriors.data()) PutF32(&out, x);
  for (double b : e.boundary_probs) PutF32(&out, b);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write emission file " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("failed writing emission file " + path);
}

EmissionInput ReadEmission(const std::string &path, const PhonemeInventory *inv) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open emission file " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)),
                    std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kEmissionMagic) ||
      std::memcmp(bytes.data(), kEmissionMagic, sizeof(kEmissionMagic)) != 0) {
    // Anything printable that starts like a CSV header is treated as CSV.
    if (!bytes.empty() && (bytes[0] == '#' || bytes.rfind("boundary", 0) == 0)) {
      try {
        return ParseEmissionCsv(bytes, inv);
      } catch (const DataError &err) {
        throw DataError(path + ": " + err.what());
      }
    }
    throw DataError(path + ": bad emission magic");
  }

  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  std::size_t pos = sizeof(kEmissionMagic);
  if (bytes.size() < pos + 4) throw DataError(path + ": truncated header");
  const uint32_t header_len = GetU32(p + pos);
  pos += 4;
  if (bytes.size() < pos + header_len) throw DataError(path + ": truncated header");

  nlohmann::json header;
  std::size_t t = 0, n = 0;
  EmissionInput e;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
    t = header.at("t").get<std::size_t>();
    n = header.at("n").get<std::size_t>();
    e.frame_duration = header.at("frame_duration").get<double>();
  } catch (const nlohmann::json::exception &err) {
    throw DataError(path + ": bad header: " + err.what());
  }
  pos += header_len;

  if (inv != nullptr) {
    const std::string hash = header.value("inventory_hash", std::string());
    if (hash != inv->Hash()) {
      throw DataError(path + ": inventory hash " + hash +
                      " does not match inventory " + inv->Hash());
    }
  }

  const std::size_t expected = 4 * (t * n + t);
  if (bytes.size() - pos != expected) {
    throw DataError(path + ": payload is " + std::to_string(bytes.size() - pos) +
                    " bytes, expected " + std::to_string(expected));
  }
  e.log_posteriors = Matrix<double>(t, n);
  for (std::size_t r = 0; r != t; ++r) {
    auto row = e.log_posteriors.row(r);
    for (std::size_t k = 0; k != n; ++k, pos += 4) row[k] = GetF32(p + pos);
  }
  e.boundary_probs.resize(t);
  for (std::size_t r = 0; r != t; ++r, pos += 4) e.boundary_probs[r] = GetF32(p + pos);
  return e;
}

EmissionInput ParseEmissionCsv(const std::string &text, const PhonemeInventory *inv) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  EmissionInput e;
  e.frame_duration = 0.02;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find("frame_duration=");
      if (eq != std::string::npos) {
        e.frame_duration = ParseDouble(line.substr(eq + 15), line_no);
      }
      continue;
    }
    auto cells = SplitCsvLine(line);
    if (header.empty()) {
      if (cells.empty() || cells[0] != "boundary") {
        throw DataError("CSV header must start with 'boundary'");
      }
      header.assign(cells.begin() + 1, cells.end());
      if (inv != nullptr && header != inv->symbols()) {
        throw DataError("CSV header symbols do not match the inventory");
      }
      continue;
    }
    if (cells.size() != header.size() + 1) {
      throw DataError("CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size() + 1));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto &c : cells) row.push_back(ParseDouble(c, line_no));
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw DataError("CSV emission has no header row");

  e.log_posteriors = Matrix<double>(rows.size(), header.size());
  e.boundary_probs.resize(rows.size());
  for (std::size_t t = 0; t != rows.size(); ++t) {
    e.boundary_probs[t] = rows[t][0];
    std::copy(rows[t].begin() + 1, rows[t].end(), e.log_posteriors.row(t).begin());
  }
  return e;
}

std::string FormatEmissionCsv(const EmissionInput &e, const PhonemeInventory &inv) {
  std::ostringstream os;
  os.precision(17);
  os << "# frame_duration=" << e.frame_duration << "\n";
  os << "boundary";
  for (const auto &s : inv.symbols()) os << ',' << s;
  os << '\n';
  for (std::size_t t = 0; t != e.num_frames(); ++t) {
    os << e.boundary_probs[t];
    for (double x : e.log_posteriors.row(t)) {
      if (std::isinf(x)) {
        os << ",-inf";
      } else {
        os << ',' << x;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dysflux
