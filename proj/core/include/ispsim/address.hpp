#pragma once

#include <cstdint>

namespace ispsim {

// Physical NAND page location: (channel, block-in-channel, page-in-block).
struct PageAddress {
  std::int32_t channel = 0;
  std::int32_t block = 0;
  std::int32_t page = 0;

  friend bool operator==(const PageAddress&, const PageAddress&) = default;
};

}  // namespace ispsim
