#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ispsim/address.hpp"
#include "ispsim/sim_time.hpp"

namespace ispsim {

struct NandGeometry {
  int num_channels = 1;
  int blocks_per_channel = 1;
  int pages_per_block = 128;
  int page_size_bytes = 8192;

  std::int64_t pages_per_channel() const {
    return static_cast<std::int64_t>(blocks_per_channel) * pages_per_block;
  }
  std::int64_t total_pages() const { return pages_per_channel() * num_channels; }

  void validate() const;  // throws ConfigError
};

struct NandTiming {
  SimDuration t_read = SimDuration::from_us(75.0);
  SimDuration t_prog = SimDuration::from_us(300.0);
  SimDuration t_erase = SimDuration::from_ms(5.0);

  void validate() const;
};

// Byte store with the NAND program/erase state machine. Latencies are
// returned to the caller; occupancy of the channel is the fabric's job.
// Erased pages read back as all zeros so unwritten pad regions decode as
// zero-valued features.
class NandArray {
 public:
  NandArray(NandGeometry geometry, NandTiming timing);

  struct ReadResult {
    std::vector<std::uint8_t> data;
    SimDuration latency;
  };

  ReadResult read_page(const PageAddress& addr) const;
  SimDuration program_page(const PageAddress& addr, std::span<const std::uint8_t> data);
  SimDuration erase_block(int channel, int block);

  // Out-of-band load before the simulation starts: zero simulated time,
  // ignores the erased-state rule. Throws DataError once sealed.
  void preload(const PageAddress& addr, std::span<const std::uint8_t> data);

  // Called when the simulation clock starts; preload is rejected afterwards.
  void seal() { sealed_ = true; }
  bool sealed() const { return sealed_; }

  const NandGeometry& geometry() const { return geometry_; }
  const NandTiming& timing() const { return timing_; }

  bool is_written(const PageAddress& addr) const;

 private:
  std::size_t flat_index(const PageAddress& addr) const;  // bounds-checked
  void check_bounds(const PageAddress& addr) const;

  NandGeometry geometry_;
  NandTiming timing_;
  std::vector<std::vector<std::uint8_t>> contents_;  // empty vector = reads as zeros
  std::vector<std::uint8_t> written_;                // 0 = erased, 1 = programmed
  bool sealed_ = false;
};

}  // namespace ispsim
