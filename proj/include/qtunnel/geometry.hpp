#pragma once

#include <array>
#include <cstdint>

namespace qtunnel {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class Region { left_well, barrier, right_well };

/// Infinite well [0, L] with a square barrier of height V0 on [c, c+b].
class WellGeometry {
 public:
  WellGeometry(double total_length, double barrier_left, double barrier_width,
               double barrier_height);

  /// The paper's symmetric double well: c = a, L = 2a + b.
  static WellGeometry symmetric(double half_width, double barrier_width, double barrier_height);

  double total_length() const { return total_length_; }
  double barrier_left() const { return barrier_left_; }
  double barrier_width() const { return barrier_width_; }
  double barrier_height() const { return barrier_height_; }
  double barrier_right() const { return barrier_left_ + barrier_width_; }
  double left_half() const { return barrier_left_; }
  double right_half() const { return total_length_ - barrier_left_ - barrier_width_; }
  double center() const { return 0.5 * total_length_; }

  /// Barrier centred in the box (to 1e-12 relative).
  bool is_symmetric() const;
  /// b = 0 or V0 = 0: the spectrum is the plain infinite well.
  bool is_free_box() const { return barrier_width_ == 0.0 || barrier_height_ == 0.0; }

  std::array<Interval, 3> regions() const;
  Interval region(Region r) const { return regions()[static_cast<int>(r)]; }
  Region region_of(double x) const;

  /// Same geometry with the barrier moved so that its left edge sits at c.
  WellGeometry with_barrier_left(double c) const;

  std::uint64_t hash() const;

  friend bool operator==(const WellGeometry&, const WellGeometry&) = default;

 private:
  double total_length_;
  double barrier_left_;
  double barrier_width_;
  double barrier_height_;
};

}  // namespace qtunnel
