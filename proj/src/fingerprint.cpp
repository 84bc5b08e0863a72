#include "tinypy/fingerprint.hpp"

#include <cstring>

namespace tinypy {

namespace {

inline uint64_t rotl64(uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

inline uint64_t fmix64(uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdull;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ull;
    k ^= k >> 33;
    return k;
}

inline uint64_t load64(const char* p) {
    uint64_t v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

}  // namespace

// MurmurHash3 x64_128 (Appleby's public-domain algorithm), seed 0.
Fingerprint fingerprint(std::string_view bytes) {
    const char* data = bytes.data();
    const size_t len = bytes.size();
    const size_t nblocks = len / 16;

    uint64_t h1 = 0, h2 = 0;
    const uint64_t c1 = 0x87c37b91114253d5ull;
    const uint64_t c2 = 0x4cf5ad432745937full;

    for (size_t i = 0; i < nblocks; ++i) {
        uint64_t k1 = load64(data + i * 16);
        uint64_t k2 = load64(data + i * 16 + 8);
        k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
        h1 = rotl64(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52dce729;
        k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2;
        h2 = rotl64(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495ab5;
    }

    const auto* tail = reinterpret_cast<const unsigned char*>(data + nblocks * 16);
    uint64_t k1 = 0, k2 = 0;
    switch (len & 15) {
        case 15: k2 ^= uint64_t(tail[14]) << 48; [[fallthrough]];
        case 14: k2 ^= uint64_t(tail[13]) << 40; [[fallthrough]];
        case 13: k2 ^= uint64_t(tail[12]) << 32; [[fallthrough]];
        case 12: k2 ^= uint64_t(tail[11]) << 24; [[fallthrough]];
        case 11: k2 ^= uint64_t(tail[10]) << 16; [[fallthrough]];
        case 10: k2 ^= uint64_t(tail[9]) << 8; [[fallthrough]];
        case 9:
            k2 ^= uint64_t(tail[8]);
            k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2;
            [[fallthrough]];
        case 8: k1 ^= uint64_t(tail[7]) << 56; [[fallthrough]];
        case 7: k1 ^= uint64_t(tail[6]) << 48; [[fallthrough]];
        case 6: k1 ^= uint64_t(tail[5]) << 40; [[fallthrough]];
        case 5: k1 ^= uint64_t(tail[4]) << 32; [[fallthrough]];
        case 4: k1 ^= uint64_t(tail[3]) << 24; [[fallthrough]];
        case 3: k1 ^= uint64_t(tail[2]) << 16; [[fallthrough]];
        case 2: k1 ^= uint64_t(tail[1]) << 8; [[fallthrough]];
        case 1:
            k1 ^= uint64_t(tail[0]);
            k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
            break;
        case 0: break;
    }

    h1 ^= len;
    h2 ^= len;
    h1 += h2;
    h2 += h1;
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 += h2;
    h2 += h1;
    return {h1, h2};
}

// ---------------------------------------------------------------------------

FingerprintSet::FingerprintSet() : slots_(1024), mask_(1023) {}

size_t FingerprintSet::probe(const Fingerprint& fp) const {
    size_t i = fp.h1 & mask_;
    while (true) {
        const Fingerprint& s = slots_[i];
        if ((s.h1 == 0 && s.h2 == 0) || s == fp) return i;
        i = (i + 1) & mask_;
    }
}

bool FingerprintSet::contains(const Fingerprint& fp) const {
    if (fp.h1 == 0 && fp.h2 == 0) return has_zero_;
    const Fingerprint& s = slots_[probe(fp)];
    return !(s.h1 == 0 && s.h2 == 0);
}

bool FingerprintSet::insert(const Fingerprint& fp) {
    if (fp.h1 == 0 && fp.h2 == 0) {
        if (has_zero_) return false;
        has_zero_ = true;
        ++size_;
        return true;
    }
    size_t i = probe(fp);
    if (slots_[i] == fp) return false;
    slots_[i] = fp;
    ++size_;
    if (size_ * 4 >= slots_.size() * 3) grow();
    return true;
}

void FingerprintSet::grow() {
    std::vector<Fingerprint> old = std::move(slots_);
    slots_.assign(old.size() * 2, Fingerprint{});
    mask_ = slots_.size() - 1;
    for (const Fingerprint& fp : old)
        if (!(fp.h1 == 0 && fp.h2 == 0)) slots_[probe(fp)] = fp;
}

}  // namespace tinypy
