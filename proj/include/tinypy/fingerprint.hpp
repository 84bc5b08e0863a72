#ifndef TINYPY_FINGERPRINT_HPP
#define TINYPY_FINGERPRINT_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace tinypy {

// 128-bit content digest used for deduplication. The function is fixed as
// MurmurHash3 x64_128 with seed 0 over the exact snippet bytes; at one
// million snippets the collision probability is far below 1e-24, so equal
// digests are treated as equal snippets.
struct Fingerprint {
    uint64_t h1 = 0;
    uint64_t h2 = 0;

    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

Fingerprint fingerprint(std::string_view bytes);

// Open-addressing set of fingerprints; 16 bytes per slot, so memory use is
// exactly capacity_bytes(). Grows by doubling at 3/4 load.
class FingerprintSet {
public:
    FingerprintSet();

    // True when the fingerprint was absent and has been added.
    bool insert(const Fingerprint& fp);
    bool contains(const Fingerprint& fp) const;
    size_t size() const { return size_; }
    uint64_t capacity_bytes() const { return slots_.size() * sizeof(Fingerprint); }

private:
    // The all-zero digest (which fingerprint() can produce only with
    // probability 2^-128) is the empty-slot marker; track it separately.
    std::vector<Fingerprint> slots_;
    size_t size_ = 0;
    size_t mask_ = 0;
    bool has_zero_ = false;

    void grow();
    size_t probe(const Fingerprint& fp) const;
};

}  // namespace tinypy

#endif  // TINYPY_FINGERPRINT_HPP
