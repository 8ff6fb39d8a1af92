#include "ispsim/nand.hpp"

#include <string>

#include "ispsim/errors.hpp"

namespace ispsim {

namespace {
std::string addr_str(const PageAddress& a) {
  return "(ch " + std::to_string(a.channel) + ", blk " + std::to_string(a.block) + ", pg " +
         std::to_string(a.page) + ")";
}
}  // namespace

void NandGeometry::validate() const {
  if (num_channels < 1) throw ConfigError("nand: num_channels must be >= 1");
  if (blocks_per_channel < 1) throw ConfigError("nand: blocks_per_channel must be >= 1");
  if (pages_per_block < 1) throw ConfigError("nand: pages_per_block must be >= 1");
  if (page_size_bytes < 1) throw ConfigError("nand: page_size_bytes must be >= 1");
}

void NandTiming::validate() const {
  if (t_read.ps <= 0 || t_prog.ps <= 0 || t_erase.ps <= 0) {
    throw ConfigError("nand: timing constants must be strictly positive");
  }
}

NandArray::NandArray(NandGeometry geometry, NandTiming timing)
    : geometry_(geometry), timing_(timing) {
  geometry_.validate();
  timing_.validate();
  const auto total = static_cast<std::size_t>(geometry_.total_pages());
  contents_.resize(total);
  written_.assign(total, 0);
}

void NandArray::check_bounds(const PageAddress& addr) const {
  if (addr.channel < 0 || addr.channel >= geometry_.num_channels || addr.block < 0 ||
      addr.block >= geometry_.blocks_per_channel || addr.page < 0 ||
      addr.page >= geometry_.pages_per_block) {
    throw DataError("nand: address out of bounds " + addr_str(addr));
  }
}

std::size_t NandArray::flat_index(const PageAddress& addr) const {
  check_bounds(addr);
  return (static_cast<std::size_t>(addr.channel) * static_cast<std::size_t>(geometry_.blocks_per_channel) +
          static_cast<std::size_t>(addr.block)) *
             static_cast<std::size_t>(geometry_.pages_per_block) +
         static_cast<std::size_t>(addr.page);
}

NandArray::ReadResult NandArray::read_page(const PageAddress& addr) const {
  const std::size_t idx = flat_index(addr);
  ReadResult r;
  if (contents_[idx].empty()) {
    r.data.assign(static_cast<std::size_t>(geometry_.page_size_bytes), 0);
  } else {
    r.data = contents_[idx];
  }
  r.latency = timing_.t_read;
  return r;
}

SimDuration NandArray::program_page(const PageAddress& addr, std::span<const std::uint8_t> data) {
  const std::size_t idx = flat_index(addr);
  if (data.size() != static_cast<std::size_t>(geometry_.page_size_bytes)) {
    throw DataError("nand: program data length " + std::to_string(data.size()) +
                    " != page size " + std::to_string(geometry_.page_size_bytes));
  }
  if (written_[idx]) {
    throw DataError("nand: program of non-erased page " + addr_str(addr));
  }
  contents_[idx].assign(data.begin(), data.end());
  written_[idx] = 1;
  return timing_.t_prog;
}

SimDuration NandArray::erase_block(int channel, int block) {
  if (channel < 0 || channel >= geometry_.num_channels || block < 0 ||
      block >= geometry_.blocks_per_channel) {
    throw DataError("nand: erase out of bounds (ch " + std::to_string(channel) + ", blk " +
                    std::to_string(block) + ")");
  }
  const PageAddress first{channel, block, 0};
  const std::size_t base = flat_index(first);
  for (int p = 0; p < geometry_.pages_per_block; ++p) {
    contents_[base + static_cast<std::size_t>(p)].clear();
    written_[base + static_cast<std::size_t>(p)] = 0;
  }
  return timing_.t_erase;
}

void NandArray::preload(const PageAddress& addr, std::span<const std::uint8_t> data) {
  if (sealed_) {
    throw DataError("nand: preload after simulation start");
  }
  const std::size_t idx = flat_index(addr);
  if (data.size() > static_cast<std::size_t>(geometry_.page_size_bytes)) {
    throw DataError("nand: preload data exceeds page size");
  }
  auto& page = contents_[idx];
  page.assign(static_cast<std::size_t>(geometry_.page_size_bytes), 0);
  std::copy(data.begin(), data.end(), page.begin());
  written_[idx] = 1;
}

bool NandArray::is_written(const PageAddress& addr) const { return written_[flat_index(addr)] != 0; }

}  // namespace ispsim
