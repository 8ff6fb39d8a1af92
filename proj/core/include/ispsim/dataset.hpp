#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ispsim/model.hpp"
#include "ispsim/nand.hpp"

namespace ispsim {

// Decoded IDX container (big-endian header: magic, one 32-bit size per
// dimension, then unsigned-byte payload).
struct IdxData {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

IdxData read_idx_file(const std::string& path);

// Pairs an image file (count x rows x cols) with a label file (count).
// Features are pixel/255 in [0,1]. Throws DataError with the failing byte
// offset / mismatch details.
std::vector<Sample> parse_idx(const std::string& image_path, const std::string& label_path);

// In-flash record: input_dim feature bytes then one label byte, no header.
struct PackedPage {
  std::vector<std::uint8_t> bytes;  // padded to page size with zeros
  int sample_count = 0;
};

inline int record_size_bytes(int input_dim) { return input_dim + 1; }

// b, the page-minibatch capacity: floor(page_size / record_size)
int samples_per_page(int page_size_bytes, int input_dim);

std::vector<PackedPage> pack_pages(const std::vector<Sample>& samples, int page_size_bytes,
                                   int input_dim);

PageMinibatch decode_page(const std::vector<std::uint8_t>& bytes, int sample_count,
                          const PageAddress& source, int input_dim, int num_classes);

struct DatasetLayout {
  struct PageRef {
    std::int64_t page_index = 0;  // index into the packed-page list
    PageAddress addr;
    int sample_count = 0;
  };
  std::vector<std::vector<PageRef>> channels;  // per-channel visit order
  std::int64_t total_samples = 0;
  std::vector<std::int64_t> samples_per_channel;
};

// Round-robin page striping (page p -> channel p mod n), after an optional
// seeded shuffle of page order. Channel-local slots fill blocks sequentially.
DatasetLayout stripe_across_channels(const std::vector<PackedPage>& pages,
                                     const NandGeometry& geometry, std::uint64_t seed,
                                     bool shuffle);

// Writes every laid-out page into the NAND array (zero simulated time) and
// verifies the bytes read back. Throws DataError if the dataset does not fit.
void preload_nand(const DatasetLayout& layout, const std::vector<PackedPage>& pages,
                  NandArray& nand);

// `page_index channel block page sample_count` per line
void write_layout_manifest(const DatasetLayout& layout, std::ostream& out);

// Smallest geometry holding `num_pages` striped pages over n channels with
// ~25% slack, given the page/block shape.
NandGeometry geometry_for_dataset(std::int64_t num_pages, int num_channels, int page_size_bytes,
                                  int pages_per_block);

}  // namespace ispsim
