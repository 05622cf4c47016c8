#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "incsolve/rng.hpp"

namespace incsolve {

// Component visiting order within one epoch.
//   Cyclic:           0, 1, ..., m-1 every epoch.
//   ShuffledPerEpoch: an independent uniform permutation per epoch.
//   IID:              m independent uniform indices per epoch (the
//                     stochastic counterpart under epoch-fair accounting).
// Orders are a pure function of (seed, epoch), so runs stay reproducible
// no matter how epochs are scheduled.
struct OrderPolicy {
  enum class Kind { Cyclic, ShuffledPerEpoch, IID };

  Kind kind = Kind::Cyclic;
  std::uint64_t seed = 0;

  std::vector<int> epoch_order(int epoch, int m) const {
    if (m < 1) throw std::invalid_argument("epoch_order: m must be >= 1");
    if (epoch < 0) throw std::invalid_argument("epoch_order: epoch must be >= 0");
    std::vector<int> order(static_cast<std::size_t>(m));
    switch (kind) {
      case Kind::Cyclic:
        std::iota(order.begin(), order.end(), 0);
        break;
      case Kind::ShuffledPerEpoch: {
        std::iota(order.begin(), order.end(), 0);
        CounterRng rng(seed, static_cast<std::uint64_t>(epoch));
        for (int i = m - 1; i > 0; --i) {
          const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
          std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        break;
      }
      case Kind::IID: {
        CounterRng rng(seed, static_cast<std::uint64_t>(epoch));
        for (auto& idx : order)
          idx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
        break;
      }
    }
    return order;
  }
};

}  // namespace incsolve
