#include "ispsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "ispsim/errors.hpp"

namespace ispsim {

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

}  // namespace

IdxData read_idx_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("idx: cannot open " + path);
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (raw.size() < 4) {
    throw DataError("idx: " + path + " truncated at byte offset " + std::to_string(raw.size()) +
                    " (header magic needs 4 bytes)");
  }
  if (raw[0] != 0 || raw[1] != 0) {
    throw DataError("idx: " + path + " bad magic at byte offset 0");
  }
  if (raw[2] != 0x08) {
    throw DataError("idx: " + path + " unsupported element type 0x" +
                    std::to_string(static_cast<int>(raw[2])) +
                    " at byte offset 2 (expected 0x08 unsigned byte)");
  }
  const int ndims = raw[3];
  if (ndims < 1) throw DataError("idx: " + path + " zero dimensions at byte offset 3");
  const std::size_t header = 4 + 4 * static_cast<std::size_t>(ndims);
  if (raw.size() < header) {
    throw DataError("idx: " + path + " truncated at byte offset " + std::to_string(raw.size()) +
                    " (expected " + std::to_string(header) + "-byte header)");
  }
  IdxData data;
  std::size_t expected = 1;
  for (int d = 0; d < ndims; ++d) {
    const std::uint32_t v = read_be32(raw.data() + 4 + 4 * static_cast<std::size_t>(d));
    data.dims.push_back(v);
    expected *= v;
  }
  if (raw.size() != header + expected) {
    throw DataError("idx: " + path + " payload is " + std::to_string(raw.size() - header) +
                    " bytes at byte offset " + std::to_string(header) + ", header promises " +
                    std::to_string(expected));
  }
  data.payload.assign(raw.begin() + static_cast<std::ptrdiff_t>(header), raw.end());
  return data;
}

std::vector<Sample> parse_idx(const std::string& image_path, const std::string& label_path) {
  const IdxData images = read_idx_file(image_path);
  const IdxData labels = read_idx_file(label_path);
  if (images.dims.size() != 3) {
    throw DataError("idx: " + image_path + " must be count x rows x cols (got " +
                    std::to_string(images.dims.size()) + " dims)");
  }
  if (labels.dims.size() != 1) {
    throw DataError("idx: " + label_path + " must be one-dimensional");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw DataError("idx: sample count mismatch, " + std::to_string(images.dims[0]) +
                    " images vs " + std::to_string(labels.dims[0]) + " labels");
  }
  const std::size_t count = images.dims[0];
  const std::size_t dim = static_cast<std::size_t>(images.dims[1]) * images.dims[2];
  std::vector<Sample> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample& s = samples[i];
    s.features.resize(dim);
    const std::uint8_t* px = images.payload.data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      s.features[j] = static_cast<double>(px[j]) / 255.0;
    }
    s.label = labels.payload[i];
  }
  return samples;
}

int samples_per_page(int page_size_bytes, int input_dim) {
  return page_size_bytes / record_size_bytes(input_dim);
}

std::vector<PackedPage> pack_pages(const std::vector<Sample>& samples, int page_size_bytes,
                                   int input_dim) {
  if (samples.empty()) throw DataError("pack: no samples");
  const int rec = record_size_bytes(input_dim);
  if (rec > page_size_bytes) {
    throw DataError("pack: sample record (" + std::to_string(rec) +
                    " bytes) larger than a page (" + std::to_string(page_size_bytes) + ")");
  }
  const int b = samples_per_page(page_size_bytes, input_dim);
  std::vector<PackedPage> pages;
  pages.reserve((samples.size() + static_cast<std::size_t>(b) - 1) / static_cast<std::size_t>(b));
  for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(b)) {
    PackedPage page;
    page.bytes.assign(static_cast<std::size_t>(page_size_bytes), 0);
    const std::size_t n = std::min(static_cast<std::size_t>(b), samples.size() - i);
    for (std::size_t k = 0; k < n; ++k) {
      const Sample& s = samples[i + k];
      if (s.features.size() != static_cast<std::size_t>(input_dim)) {
        throw DataError("pack: sample " + std::to_string(i + k) + " has " +
                        std::to_string(s.features.size()) + " features, expected " +
                        std::to_string(input_dim));
      }
      std::uint8_t* out = page.bytes.data() + k * static_cast<std::size_t>(rec);
      for (int j = 0; j < input_dim; ++j) {
        out[j] = static_cast<std::uint8_t>(std::llround(s.features[static_cast<std::size_t>(j)] * 255.0));
      }
      out[input_dim] = static_cast<std::uint8_t>(s.label);
    }
    page.sample_count = static_cast<int>(n);
    pages.push_back(std::move(page));
  }
  return pages;
}

PageMinibatch decode_page(const std::vector<std::uint8_t>& bytes, int sample_count,
                          const PageAddress& source, int input_dim, int num_classes) {
  const int rec = record_size_bytes(input_dim);
  if (static_cast<std::size_t>(rec) * static_cast<std::size_t>(sample_count) > bytes.size()) {
    throw DataError("decode: page too small for " + std::to_string(sample_count) + " records");
  }
  PageMinibatch mb;
  mb.source_page = source;
  mb.samples.resize(static_cast<std::size_t>(sample_count));
  for (int k = 0; k < sample_count; ++k) {
    const std::uint8_t* in = bytes.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(rec);
    Sample& s = mb.samples[static_cast<std::size_t>(k)];
    s.features.resize(static_cast<std::size_t>(input_dim));
    for (int j = 0; j < input_dim; ++j) {
      s.features[static_cast<std::size_t>(j)] = static_cast<double>(in[j]) / 255.0;
    }
    s.label = in[input_dim];
    if (s.label >= num_classes) {
      throw DataError("decode: label " + std::to_string(s.label) + " out of range (" +
                      std::to_string(num_classes) + " classes)");
    }
  }
  return mb;
}

DatasetLayout stripe_across_channels(const std::vector<PackedPage>& pages,
                                     const NandGeometry& geometry, std::uint64_t seed,
                                     bool shuffle) {
  geometry.validate();
  const int n = geometry.num_channels;
  std::vector<std::int64_t> order(pages.size());
  std::iota(order.begin(), order.end(), std::int64_t{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  DatasetLayout layout;
  layout.channels.resize(static_cast<std::size_t>(n));
  layout.samples_per_channel.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    const int channel = static_cast<int>(p % static_cast<std::size_t>(n));
    const std::int64_t slot = static_cast<std::int64_t>(p / static_cast<std::size_t>(n));
    DatasetLayout::PageRef ref;
    ref.page_index = order[p];
    ref.addr.channel = channel;
    ref.addr.block = static_cast<std::int32_t>(slot / geometry.pages_per_block);
    ref.addr.page = static_cast<std::int32_t>(slot % geometry.pages_per_block);
    ref.sample_count = pages[static_cast<std::size_t>(order[p])].sample_count;
    layout.channels[static_cast<std::size_t>(channel)].push_back(ref);
    layout.samples_per_channel[static_cast<std::size_t>(channel)] += ref.sample_count;
    layout.total_samples += ref.sample_count;
  }
  return layout;
}

void preload_nand(const DatasetLayout& layout, const std::vector<PackedPage>& pages,
                  NandArray& nand) {
  std::int64_t needed = 0;
  for (const auto& ch : layout.channels) {
    std::int64_t max_slot = 0;
    for (const auto& ref : ch) {
      const std::int64_t slot =
          static_cast<std::int64_t>(ref.addr.block) * nand.geometry().pages_per_block +
          ref.addr.page;
      max_slot = std::max(max_slot, slot + 1);
    }
    needed = std::max(needed, max_slot);
  }
  if (needed > nand.geometry().pages_per_channel()) {
    throw DataError("preload: dataset needs " + std::to_string(needed) +
                    " pages per channel, geometry provides " +
                    std::to_string(nand.geometry().pages_per_channel()));
  }
  for (const auto& ch : layout.channels) {
    for (const auto& ref : ch) {
      const auto& page = pages[static_cast<std::size_t>(ref.page_index)];
      nand.preload(ref.addr, page.bytes);
      const auto back = nand.read_page(ref.addr);
      if (back.data != page.bytes) {
        throw DataError("preload: read-back verification failed");
      }
    }
  }
}

void write_layout_manifest(const DatasetLayout& layout, std::ostream& out) {
  for (const auto& ch : layout.channels) {
    for (const auto& ref : ch) {
      out << ref.page_index << ' ' << ref.addr.channel << ' ' << ref.addr.block << ' '
          << ref.addr.page << ' ' << ref.sample_count << '\n';
    }
  }
}

NandGeometry geometry_for_dataset(std::int64_t num_pages, int num_channels, int page_size_bytes,
                                  int pages_per_block) {
  NandGeometry g;
  g.num_channels = num_channels;
  g.page_size_bytes = page_size_bytes;
  g.pages_per_block = pages_per_block;
  const std::int64_t per_channel =
      (num_pages + num_channels - 1) / num_channels;
  const std::int64_t with_slack = per_channel + (per_channel + 3) / 4;  // ~25% slack
  g.blocks_per_channel =
      static_cast<int>(std::max<std::int64_t>(1, (with_slack + pages_per_block - 1) / pages_per_block));
  return g;
}

}  // namespace ispsim
