#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "mpqkd/channel.hpp"

namespace mpqkd {

enum class Variant { Original, SixState };

// Intensity-sum label for one side of a pair. For Z-type pairs Mu means the
// two pulses were {mu, 0}; for X-type pairs it means {mu, mu}. Vac is both
// pulses vacuum on that side.
enum class SumLabel : int { Mu = 0, Nu = 1, Vac = 2 };

inline constexpr std::array<SumLabel, 3> kSumLabels = {
    SumLabel::Mu, SumLabel::Nu, SumLabel::Vac};

struct IntensityClass {
  SumLabel a = SumLabel::Vac;
  SumLabel b = SumLabel::Vac;

  friend bool operator==(const IntensityClass&, const IntensityClass&) =
      default;
};

// Dense per-class table with a fixed (row-major) iteration order so that
// class sums are reproducible bit-for-bit.
class ClassGrid {
 public:
  static std::size_t index(SumLabel a, SumLabel b) {
    return 3 * static_cast<std::size_t>(a) + static_cast<std::size_t>(b);
  }

  double& at(SumLabel a, SumLabel b) { return v_[index(a, b)]; }
  double at(SumLabel a, SumLabel b) const { return v_[index(a, b)]; }
  double& at(IntensityClass c) { return at(c.a, c.b); }
  double at(IntensityClass c) const { return at(c.a, c.b); }

  ClassGrid transposed() const {
    ClassGrid t;
    for (SumLabel a : kSumLabels)
      for (SumLabel b : kSumLabels) t.at(b, a) = at(a, b);
    return t;
  }

  // Sum over the four signal classes (both labels non-vacuum), fixed order.
  double signal_sum() const {
    return at(SumLabel::Mu, SumLabel::Mu) + at(SumLabel::Mu, SumLabel::Nu) +
           at(SumLabel::Nu, SumLabel::Mu) + at(SumLabel::Nu, SumLabel::Nu);
  }

  ClassGrid scaled(double factor) const {
    ClassGrid s;
    for (std::size_t k = 0; k < 9; ++k) s.v_[k] = v_[k] * factor;
    return s;
  }

  friend bool operator==(const ClassGrid&, const ClassGrid&) = default;

 private:
  std::array<double, 9> v_{};
};

struct ProtocolConfig {
  ChannelParams channel;
  IntensityProfile intensities_a;
  IntensityProfile intensities_b;
  MisalignmentParams misalignment;
  double total_rounds = 0.0;           // N
  std::uint64_t max_pair_interval = 1; // l
  double delta = 0.0;                  // phase post-selection half-width
  Variant variant = Variant::Original;

  void validate() const;
};

}  // namespace mpqkd
