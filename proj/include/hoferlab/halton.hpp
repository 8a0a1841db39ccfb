#pragma once

#include "hoferlab/types.hpp"

#include <cmath>
#include <cstdint>

namespace hoferlab {

// Halton low-discrepancy sequence.  A seed only offsets the start index, so
// fixed seed means a fixed point stream.
class Halton {
public:
    explicit Halton(int dim, uint64_t seed = 0)
        : dim_(dim), index_(1 + seed % 8191) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("halton: bad dimension");
    }

    // Next point in the unit cube [0,1)^dim.
    Vec next() {
        Vec p(dim_);
        for (int d = 0; d < dim_; ++d) p[d] = radical_inverse(index_, kPrimes[d]);
        ++index_;
        return p;
    }

    Vec next_in_box(const Box& b) {
        Vec u = next();
        return b.lo.array() + u.array() * (b.hi - b.lo).array();
    }

    // Uniform point of the ball, via normal directions (Box-Muller on Halton
    // coordinates) and a radial correction.
    Vec next_in_ball(const Vec& center, double radius) {
        int n = static_cast<int>(center.size());
        Vec dir(n);
        for (int i = 0; i < n; i += 2) {
            double u1 = std::max(radical_inverse(index_, kPrimes[i]), 1e-12);
            double u2 = radical_inverse(index_, kPrimes[(i + 1) % kMaxDim]);
            double r = std::sqrt(-2.0 * std::log(u1));
            dir[i] = r * std::cos(2.0 * M_PI * u2);
            if (i + 1 < n) dir[i + 1] = r * std::sin(2.0 * M_PI * u2);
        }
        double u = radical_inverse(index_, kPrimes[n % kMaxDim]);
        ++index_;
        double nrm = dir.norm();
        if (nrm < 1e-300) { dir.setZero(); dir[0] = 1.0; nrm = 1.0; }
        double rad = radius * std::pow(u, 1.0 / n);
        return center + (rad / nrm) * dir;
    }

private:
    static constexpr int kPrimes[kMaxDim] = {2,  3,  5,  7,  11, 13, 17, 19,
                                             23, 29, 31, 37, 41, 43, 47, 53};
    int dim_;
    uint64_t index_;

    static double radical_inverse(uint64_t i, int base) {
        double inv = 1.0 / base, f = inv, x = 0.0;
        while (i > 0) {
            x += f * static_cast<double>(i % base);
            i /= base;
            f *= inv;
        }
        return x;
    }
};

}  // namespace hoferlab
