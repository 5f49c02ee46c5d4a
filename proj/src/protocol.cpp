#include "mpqkd/protocol.hpp"

#include <numbers>
#include <stdexcept>

namespace mpqkd {

void ProtocolConfig::validate() const {
  channel.validate();
  intensities_a.validate();
  intensities_b.validate();
  misalignment.validate();
  if (!(total_rounds >= 1.0))
    throw std::invalid_argument("total_rounds must be >= 1");
  if (max_pair_interval < 1)
    throw std::invalid_argument("max_pair_interval must be >= 1");
  const double delta_max =
      variant == Variant::Original ? std::numbers::pi / 2 : std::numbers::pi / 4;
  if (!(delta > 0.0 && delta < delta_max))
    throw std::invalid_argument(
        "delta must lie in (0, pi/2) for the original protocol and "
        "(0, pi/4) for the six-state protocol");
}

}  // namespace mpqkd
