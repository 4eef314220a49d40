#include "scpt/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include "scpt/errors.hpp"
#include "scpt/rng.hpp"

namespace scpt {

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

uint64_t atom_invariant_code(const Molecule &m, int index) {
  const Atom &atom = m.atom(index);
  uint64_t h = mix64(0x5c9f0e1d2b3a4857ULL);
  for (char c : atom.element) {
    h = hash_combine(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
  }
  h = hash_combine(h, static_cast<uint64_t>(atom.charge + 16));
  h = hash_combine(h, static_cast<uint64_t>(m.degree(index)));
  h = hash_combine(h, static_cast<uint64_t>(atom.hydrogens));
  h = hash_combine(h, atom.aromatic ? 1 : 0);
  h = hash_combine(h, atom.in_ring ? 1 : 0);
  return h;
}

uint64_t environment_update(int radius, uint64_t own,
                            std::vector<std::pair<uint64_t, uint64_t>> nbrs) {
  std::sort(nbrs.begin(), nbrs.end());
  uint64_t h = mix64(static_cast<uint64_t>(radius) + 0x9042ULL);
  h = hash_combine(h, own);
  for (const auto &[bond, code] : nbrs) {
    h = hash_combine(h, bond);
    h = hash_combine(h, code);
  }
  return h;
}

}  // namespace

Fingerprint::Fingerprint(int width, int radius)
    : width_(width), radius_(radius), words_(static_cast<size_t>(width + 63) / 64, 0) {
  if (!power_of_two(width) || width < 64) {
    throw Error("fingerprint width must be a power of two >= 64");
  }
}

void Fingerprint::set(int bit) {
  uint64_t &word = words_[static_cast<size_t>(bit) / 64];
  const uint64_t mask = uint64_t{1} << (static_cast<size_t>(bit) % 64);
  if (!(word & mask)) {
    word |= mask;
    ++popcount_;
  }
}

std::vector<int> Fingerprint::set_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < width_; ++i) {
    if (test(i)) bits.push_back(i);
  }
  return bits;
}

std::vector<uint64_t> ecfp_environment_codes(const Molecule &m, int radius) {
  const int n = m.atom_count();
  std::vector<uint64_t> codes;
  codes.reserve(static_cast<size_t>(n) * static_cast<size_t>(radius + 1));

  std::vector<uint64_t> current(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    current[static_cast<size_t>(i)] = atom_invariant_code(m, i);
    codes.push_back(current[static_cast<size_t>(i)]);
  }
  for (int r = 1; r <= radius; ++r) {
    std::vector<uint64_t> next(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<uint64_t, uint64_t>> nbrs;
      for (int bi : m.bonds_of(i)) {
        const Bond &bond = m.bond(bi);
        nbrs.emplace_back(static_cast<uint64_t>(bond.order),
                          current[static_cast<size_t>(bond.other(i))]);
      }
      next[static_cast<size_t>(i)] =
          environment_update(r, current[static_cast<size_t>(i)], std::move(nbrs));
      codes.push_back(next[static_cast<size_t>(i)]);
    }
    current = std::move(next);
  }
  return codes;
}

Fingerprint ecfp(const Molecule &m, int radius, int width) {
  if (radius < 0) throw Error("ecfp radius must be non-negative");
  Fingerprint fp(width, radius);
  for (uint64_t code : ecfp_environment_codes(m, radius)) {
    fp.set(fold_code(code, width));
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width()) {
    throw WidthMismatch("fingerprint widths differ: " + std::to_string(a.width()) +
                        " vs " + std::to_string(b.width()));
  }
  int common = 0;
  for (size_t i = 0; i < a.words().size(); ++i) {
    common += std::popcount(a.words()[i] & b.words()[i]);
  }
  const int total = a.popcount() + b.popcount() - common;
  if (total == 0) return 1.0;  // both empty: nothing to distinguish
  return static_cast<double>(common) / static_cast<double>(total);
}

namespace {
constexpr uint32_t kCacheMagic = 0x53464350;  // "SFCP"
constexpr uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ofstream &out, T value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream &in, const std::string &path) {
  T value{};
  in.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!in) throw IoError("truncated fingerprint cache: " + path);
  return value;
}
}  // namespace

void write_fingerprint_cache(const std::string &path, int width, int radius,
                             const std::vector<FingerprintCacheEntry> &entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_pod(out, kCacheMagic);
  write_pod(out, kCacheVersion);
  write_pod(out, static_cast<uint32_t>(width));
  write_pod(out, static_cast<uint32_t>(radius));
  write_pod(out, static_cast<uint64_t>(entries.size()));
  for (const auto &entry : entries) {
    if (entry.fingerprint.width() != width) {
      throw Error("cache entry width mismatch");
    }
    write_pod(out, static_cast<uint32_t>(entry.canonical.size()));
    out.write(entry.canonical.data(),
              static_cast<std::streamsize>(entry.canonical.size()));
    for (uint64_t word : entry.fingerprint.words()) write_pod(out, word);
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<FingerprintCacheEntry> read_fingerprint_cache(const std::string &path,
                                                          int *width_out,
                                                          int *radius_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  if (read_pod<uint32_t>(in, path) != kCacheMagic) {
    throw IoError("not a fingerprint cache: " + path);
  }
  if (read_pod<uint32_t>(in, path) != kCacheVersion) {
    throw IoError("unsupported cache version: " + path);
  }
  const int width = static_cast<int>(read_pod<uint32_t>(in, path));
  const int radius = static_cast<int>(read_pod<uint32_t>(in, path));
  const uint64_t count = read_pod<uint64_t>(in, path);
  if (width_out != nullptr) *width_out = width;
  if (radius_out != nullptr) *radius_out = radius;

  std::vector<FingerprintCacheEntry> entries;
  entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const uint32_t len = read_pod<uint32_t>(in, path);
    std::string canonical(len, '\0');
    in.read(canonical.data(), len);
    if (!in) throw IoError("truncated fingerprint cache: " + path);
    Fingerprint fp(width, radius);
    for (int b = 0; b < width; b += 64) {
      const uint64_t word = read_pod<uint64_t>(in, path);
      for (int k = 0; k < 64 && b + k < width; ++k) {
        if ((word >> k) & 1) fp.set(b + k);
      }
    }
    entries.push_back({std::move(canonical), std::move(fp)});
  }
  return entries;
}

}  // namespace scpt
