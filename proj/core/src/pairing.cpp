#include <stdexcept>

#include "twp/peer.hpp"

namespace twp {

std::optional<NodeId> partner_at_tick(NodeId self, std::size_t roster_size,
                                      uint64_t tick) {
  if (roster_size < 2) throw std::invalid_argument("roster_size must be >= 2");
  // Pad odd rosters with a dummy slot; its partner idles that tick.
  std::size_t m = roster_size % 2 == 0 ? roster_size : roster_size + 1;
  std::size_t rounds = m - 1;
  std::size_t r = static_cast<std::size_t>(tick % rounds);

  std::size_t partner;
  if (self == m - 1) {
    partner = r;
  } else {
    // Fixed node m-1 meets r; the rest pair up as i + j = 2r (mod m-1).
    std::size_t j = (2 * r + rounds - self % rounds) % rounds;
    partner = (j == self) ? m - 1 : j;
  }
  if (partner >= roster_size) return std::nullopt;  // paired with the dummy
  return static_cast<NodeId>(partner);
}

NodeId initiator_of(NodeId i, NodeId j, std::size_t roster_size) {
  if (i == j) throw SameNodeError("initiator_of: i == j");
  if (i >= roster_size || j >= roster_size)
    throw std::invalid_argument("node id outside roster");
  std::size_t n = roster_size;
  std::size_t d = (static_cast<std::size_t>(j) + n - i) % n;
  if (d >= 1 && d <= (n - 1) / 2) return i;
  if (n % 2 == 0 && d == n / 2) return i < j ? i : j;
  return j;
}

}  // namespace twp
