#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mdcw {

// Fixed-width bit vector sized at construction. Holds the per-entity flag
// sets of an attacker state (devices in use, connected services, ...) in a
// form that is cheap to copy, compare and hash during search.
class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    std::size_t size() const { return n_; }

    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { w_[i >> 6] |= std::uint64_t(1) << (i & 63); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }

    bool any() const {
        for (auto w : w_)
            if (w) return true;
        return false;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : w_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool is_subset_of(const Bits& o) const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    // Low word, used as a cache key when the set is known to fit 64 bits.
    std::uint64_t low_word() const { return w_.empty() ? 0 : w_[0]; }

    const std::vector<std::uint64_t>& words() const { return w_; }

    bool operator==(const Bits& o) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

inline std::uint64_t hash_bits(std::uint64_t h, const Bits& b) {
    for (auto w : b.words()) h = hash_mix(h, w);
    return h;
}

} // namespace mdcw
