#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace tep {

// Fixed-size bit set over row indices. std::vector<bool> is too slow for
// the unions the cover search performs in its inner loop.
class BitSet {
  public:
    BitSet() = default;
    explicit BitSet(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    std::size_t size() const { return bits_; }

    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }

    bool test(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    BitSet& operator|=(const BitSet& other) {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
        return *this;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    // |this ∪ other| without materializing the union.
    std::size_t union_count(const BitSet& other) const {
        std::size_t n = 0;
        for (std::size_t w = 0; w < words_.size(); ++w)
            n += static_cast<std::size_t>(std::popcount(words_[w] | other.words_[w]));
        return n;
    }

    bool operator==(const BitSet& other) const = default;

  private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace tep
