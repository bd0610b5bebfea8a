#include "qtunnel/geometry.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qtunnel/error.hpp"

namespace qtunnel {

WellGeometry::WellGeometry(double total_length, double barrier_left, double barrier_width,
                           double barrier_height)
    : total_length_(total_length),
      barrier_left_(barrier_left),
      barrier_width_(barrier_width),
      barrier_height_(barrier_height) {
  if (!std::isfinite(total_length) || !(total_length > 0.0))
    throw DomainError("total length must be positive", "total_length");
  if (!std::isfinite(barrier_left) || !(barrier_left > 0.0))
    throw DomainError("barrier left edge must be positive", "barrier_left");
  if (!std::isfinite(barrier_width) || barrier_width < 0.0)
    throw DomainError("barrier width must be non-negative", "barrier_width");
  if (!std::isfinite(barrier_height) || barrier_height < 0.0)
    throw DomainError("barrier height must be non-negative", "barrier_height");
  if (!(barrier_left + barrier_width < total_length))
    throw DomainError("barrier must end inside the box (c + b < L)", "barrier_left");
}

WellGeometry WellGeometry::symmetric(double half_width, double barrier_width,
                                     double barrier_height) {
  return WellGeometry(2.0 * half_width + barrier_width, half_width, barrier_width,
                      barrier_height);
}

bool WellGeometry::is_symmetric() const {
  return std::fabs(left_half() - right_half()) <= 1e-12 * total_length_;
}

std::array<Interval, 3> WellGeometry::regions() const {
  return {Interval{0.0, barrier_left_}, Interval{barrier_left_, barrier_right()},
          Interval{barrier_right(), total_length_}};
}

Region WellGeometry::region_of(double x) const {
  if (x <= barrier_left_) return Region::left_well;
  if (x <= barrier_right()) return Region::barrier;
  return Region::right_well;
}

WellGeometry WellGeometry::with_barrier_left(double c) const {
  return WellGeometry(total_length_, c, barrier_width_, barrier_height_);
}

std::uint64_t WellGeometry::hash() const {
  // FNV-1a over the bit patterns
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : {total_length_, barrier_left_, barrier_width_, barrier_height_}) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace qtunnel
