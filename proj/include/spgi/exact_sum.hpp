#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

namespace spgi {

/// Exact floating-point accumulator (Shewchuk expansion arithmetic). The
/// running sum is kept as a nonoverlapping expansion, so the correctly
/// rounded total is independent of the order terms arrive in. Used where a
/// result must be bit-identical under permutations of its inputs.
class ExactAccumulator {
public:
    void add(double x) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < size_; ++i) {
            const double a = parts_[i];
            const double s = a + x;
            const double bv = s - a;
            const double err = (a - (s - bv)) + (x - bv);
            if (err != 0.0) parts_[k++] = err;
            x = s;
        }
        if (k >= parts_.size()) throw std::length_error("ExactAccumulator overflow");
        parts_[k++] = x;
        size_ = k;
    }

    /// Correctly rounded value of the exact sum (Shewchuk COMPRESS).
    double round() const {
        if (size_ == 0) return 0.0;
        std::array<double, kCapacity> g{};
        std::size_t m = size_;
        double q = parts_[m - 1];
        std::size_t bottom = m - 1;
        for (std::size_t i = m - 1; i-- > 0;) {
            const double s = q + parts_[i];
            const double err = parts_[i] - (s - q);
            q = s;
            if (err != 0.0) {
                g[bottom--] = q;
                q = err;
            }
        }
        g[bottom] = q;
        double lead = g[bottom];
        for (std::size_t i = bottom + 1; i < m; ++i) {
            const double s = g[i] + lead;
            lead = s;
        }
        return lead;
    }

private:
    // Nonoverlapping doubles span at most ~40 binades; 64 leaves headroom.
    static constexpr std::size_t kCapacity = 64;
    std::array<double, kCapacity> parts_{};
    std::size_t size_ = 0;
};

}  // namespace spgi
