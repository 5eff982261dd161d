#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace sokgen {

/// Levenshtein distance against a fixed pattern using the bit-parallel
/// block algorithm (Myers/Hyyrö). Build once per pattern, then compare
/// against many texts in O(ceil(m/64) * n).
class EditDistancePattern {
  public:
    explicit EditDistancePattern(std::string_view pattern)
        : length_(pattern.size()), blocks_((pattern.size() + 63) / 64), peq_(256 * blocks_, 0) {
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            const auto ch = static_cast<unsigned char>(pattern[i]);
            peq_[ch * blocks_ + i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }

    std::size_t length() const noexcept { return length_; }

    int distance(std::string_view text) const {
        if (length_ == 0) return static_cast<int>(text.size());
        if (text.empty()) return static_cast<int>(length_);

        std::vector<std::uint64_t> pv(blocks_, ~std::uint64_t{0});
        std::vector<std::uint64_t> mv(blocks_, 0);
        const std::uint64_t last_bit = std::uint64_t{1} << ((length_ - 1) % 64);
        int score = static_cast<int>(length_);

        for (char c : text) {
            const std::uint64_t* eq_row = &peq_[static_cast<unsigned char>(c) * blocks_];
            int carry = 1;  // the top boundary row grows by one per column
            for (std::size_t b = 0; b < blocks_; ++b) {
                const std::uint64_t high = b + 1 == blocks_ ? last_bit : std::uint64_t{1} << 63;
                carry = advance_block(pv[b], mv[b], eq_row[b], carry, high);
            }
            score += carry;
        }
        return score;
    }

  private:
    // One column step for a 64-row block; returns the horizontal delta
    // leaving the block's highest row.
    static int advance_block(std::uint64_t& pv, std::uint64_t& mv, std::uint64_t eq, int hin, std::uint64_t high) {
        const std::uint64_t xv = eq | mv;
        if (hin < 0) eq |= 1;
        const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
        std::uint64_t ph = mv | ~(xh | pv);
        std::uint64_t mh = pv & xh;

        int hout = 0;
        if (ph & high) hout = 1;
        if (mh & high) hout = -1;

        ph <<= 1;
        mh <<= 1;
        if (hin < 0) {
            mh |= 1;
        } else if (hin > 0) {
            ph |= 1;
        }
        pv = mh | ~(xv | ph);
        mv = ph & xv;
        return hout;
    }

    std::size_t length_;
    std::size_t blocks_;
    std::vector<std::uint64_t> peq_;
};

inline int edit_distance(std::string_view a, std::string_view b) {
    // The shorter string as the pattern keeps the block count down.
    if (a.size() > b.size()) return EditDistancePattern(b).distance(a);
    return EditDistancePattern(a).distance(b);
}

}  // namespace sokgen
