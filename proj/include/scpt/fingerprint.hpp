#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scpt/molgraph.hpp"

namespace scpt {

// Fixed-width binary fingerprint. Width is a power of two; popcount is kept
// in sync with the bit words.
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(int width, int radius);

  int width() const { return width_; }
  int radius() const { return radius_; }
  int popcount() const { return popcount_; }

  bool test(int bit) const {
    return (words_[static_cast<size_t>(bit) / 64] >>
            (static_cast<size_t>(bit) % 64)) & 1;
  }
  void set(int bit);

  const std::vector<uint64_t> &words() const { return words_; }
  std::vector<int> set_bits() const;

  bool operator==(const Fingerprint &) const = default;

 private:
  int width_ = 0;
  int radius_ = 0;
  int popcount_ = 0;
  std::vector<uint64_t> words_;
};

// One environment code per (atom, radius 0..=radius) pair, in a deterministic
// order. Codes hash the atom invariants (element, charge, degree, H count,
// aromaticity, ring membership) and, per iteration, the sorted
// (bond, neighbor-code) list; the mixing function is mix64 from rng.hpp.
std::vector<uint64_t> ecfp_environment_codes(const Molecule &m, int radius);

// Folds a code into a bit index: low bits of the mixed code.
inline int fold_code(uint64_t code, int width) {
  return static_cast<int>(code & (static_cast<uint64_t>(width) - 1));
}

// Circular fingerprint; defaults are ECFP4 folded to 2048 bits.
Fingerprint ecfp(const Molecule &m, int radius = 2, int width = 2048);

// |a∩b| / (|a| + |b| - |a∩b|); 1.0 when both fingerprints are empty.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

// Binary cache keyed by canonical form. Bit-exact across runs.
struct FingerprintCacheEntry {
  std::string canonical;
  Fingerprint fingerprint;
};
void write_fingerprint_cache(const std::string &path, int width, int radius,
                             const std::vector<FingerprintCacheEntry> &entries);
std::vector<FingerprintCacheEntry> read_fingerprint_cache(const std::string &path,
                                                          int *width = nullptr,
                                                          int *radius = nullptr);

}  // namespace scpt
