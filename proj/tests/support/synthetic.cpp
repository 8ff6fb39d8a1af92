#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "ispsim/errors.hpp"
#include "ispsim/sgd.hpp"

namespace ispsim::testsupport {

namespace {

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>((v >> 24) & 0xff), static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 8) & 0xff), static_cast<char>(v & 0xff)};
  out.write(bytes, 4);
}

std::uint8_t quantize(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::llround(v * 255.0));
}

}  // namespace

void write_idx_images(const std::filesystem::path& path, const std::vector<Sample>& samples,
                      int rows, int cols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.put(0).put(0).put(0x08).put(0x03);
  put_be32(out, static_cast<std::uint32_t>(samples.size()));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  for (const auto& s : samples) {
    for (double f : s.features) out.put(static_cast<char>(quantize(f)));
  }
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.put(0).put(0).put(0x08).put(0x01);
  put_be32(out, static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) out.put(static_cast<char>(s.label));
}

DatasetFiles write_dataset(const std::filesystem::path& dir, const std::string& stem,
                           const std::vector<Sample>& samples, int rows, int cols) {
  std::filesystem::create_directories(dir);
  DatasetFiles files;
  files.images = (dir / (stem + "-images.idx")).string();
  files.labels = (dir / (stem + "-labels.idx")).string();
  write_idx_images(files.images, samples, rows, cols);
  write_idx_labels(files.labels, samples);
  return files;
}

std::vector<Sample> random_samples(std::size_t count, int input_dim, int num_classes,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> label(0, num_classes - 1);
  std::vector<Sample> samples(count);
  for (auto& s : samples) {
    s.features.resize(static_cast<std::size_t>(input_dim));
    for (auto& f : s.features) f = byte(rng) / 255.0;
    s.label = label(rng);
  }
  return samples;
}

std::vector<Sample> toy_separable(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  std::vector<Sample> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample& s = samples[i];
    s.label = static_cast<int>(i % 2);
    const double cx = s.label == 0 ? 0.25 : 0.75;
    const double cy = s.label == 0 ? 0.75 : 0.25;
    s.features = {quantize(cx + jitter(rng)) / 255.0, quantize(cy + jitter(rng)) / 255.0};
  }
  return samples;
}

std::vector<Sample> synthetic_mnist(std::size_t count, std::uint64_t seed) {
  constexpr int kSide = 28;
  constexpr int kDim = kSide * kSide;
  constexpr int kClasses = 10;
  constexpr int kShared = 16;  // stroke fields reused across classes
  constexpr int kSharedPerClass = 3;
  constexpr int kPrivatePerClass = 2;
  constexpr int kStrokesPerClass = kSharedPerClass + kPrivatePerClass;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(6.0, 21.0);
  std::uniform_real_distribution<double> width(2.0, 3.6);
  std::uniform_real_distribution<double> weight(0.4, 1.0);

  const auto make_field = [&](std::array<double, kDim>& field) {
    const double cx = center(rng), cy = center(rng), sg = width(rng);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        const double dx = x - cx, dy = y - cy;
        field[static_cast<std::size_t>(y * kSide + x)] =
            std::exp(-(dx * dx + dy * dy) / (2.0 * sg * sg));
      }
    }
  };

  // shared strokes make classes confusable; two private strokes per class
  // keep them separable in principle
  std::vector<std::array<double, kDim>> fields(kShared + kClasses * kPrivatePerClass);
  for (auto& f : fields) make_field(f);

  std::array<std::array<int, kStrokesPerClass>, kClasses> strokes{};
  std::array<std::array<double, kStrokesPerClass>, kClasses> stroke_w{};
  std::uniform_int_distribution<int> pick(0, kShared - 1);
  for (int c = 0; c < kClasses; ++c) {
    for (int k = 0; k < kSharedPerClass; ++k) {
      strokes[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = pick(rng);
      stroke_w[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = weight(rng);
    }
    for (int k = 0; k < kPrivatePerClass; ++k) {
      strokes[static_cast<std::size_t>(c)][static_cast<std::size_t>(kSharedPerClass + k)] =
          kShared + c * kPrivatePerClass + k;
      stroke_w[static_cast<std::size_t>(c)][static_cast<std::size_t>(kSharedPerClass + k)] =
          weight(rng);
    }
  }

  std::uniform_int_distribution<int> label_dist(0, kClasses - 1);
  std::uniform_int_distribution<int> global_shift(-2, 2);
  std::uniform_int_distribution<int> stroke_jitter(-1, 1);
  std::uniform_real_distribution<double> intensity(0.75, 1.25);
  std::normal_distribution<double> noise(0.0, 0.08);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Sample> samples(count);
  for (auto& s : samples) {
    const int c = label_dist(rng);
    s.label = c;
    if (unit(rng) < 0.015) s.label = label_dist(rng);
    const int gx = global_shift(rng);
    const int gy = global_shift(rng);
    const double gain = intensity(rng);
    std::array<int, kStrokesPerClass> jx, jy;
    for (int k = 0; k < kStrokesPerClass; ++k) {
      jx[static_cast<std::size_t>(k)] = gx + stroke_jitter(rng);
      jy[static_cast<std::size_t>(k)] = gy + stroke_jitter(rng);
    }
    s.features.resize(kDim);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        double v = 0.0;
        for (int k = 0; k < kStrokesPerClass; ++k) {
          const int sx = x - jx[static_cast<std::size_t>(k)];
          const int sy = y - jy[static_cast<std::size_t>(k)];
          if (sx >= 0 && sx < kSide && sy >= 0 && sy < kSide) {
            v += stroke_w[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] *
                 fields[static_cast<std::size_t>(
                     strokes[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])]
                     [static_cast<std::size_t>(sy * kSide + sx)];
          }
        }
        v = v * gain + noise(rng);
        s.features[static_cast<std::size_t>(y * kSide + x)] = quantize(v) / 255.0;
      }
    }
  }
  return samples;
}

DatasetLayout replicated_layout(const std::vector<PackedPage>& pages, NandArray& nand) {
  const auto& geom = nand.geometry();
  DatasetLayout layout;
  layout.channels.resize(static_cast<std::size_t>(geom.num_channels));
  layout.samples_per_channel.assign(static_cast<std::size_t>(geom.num_channels), 0);
  for (int c = 0; c < geom.num_channels; ++c) {
    for (std::size_t i = 0; i < pages.size(); ++i) {
      DatasetLayout::PageRef ref;
      ref.page_index = static_cast<std::int64_t>(i);
      ref.addr.channel = c;
      ref.addr.block = static_cast<std::int32_t>(i / static_cast<std::size_t>(geom.pages_per_block));
      ref.addr.page = static_cast<std::int32_t>(i % static_cast<std::size_t>(geom.pages_per_block));
      ref.sample_count = pages[i].sample_count;
      nand.preload(ref.addr, pages[i].bytes);
      layout.channels[static_cast<std::size_t>(c)].push_back(ref);
      layout.samples_per_channel[static_cast<std::size_t>(c)] += ref.sample_count;
      layout.total_samples += ref.sample_count;
    }
  }
  return layout;
}

std::vector<double> oracle_forward(const ParamVector& params, const std::vector<double>& x,
                                   const ModelConfig& model) {
  const std::size_t per_class = static_cast<std::size_t>(model.input_dim) + 1;
  std::vector<double> scores(static_cast<std::size_t>(model.num_classes));
  for (int c = 0; c < model.num_classes; ++c) {
    double z = 0.0;
    for (int j = 0; j < model.input_dim; ++j) {
      z += params[static_cast<std::size_t>(c) * per_class + static_cast<std::size_t>(j)] *
           x[static_cast<std::size_t>(j)];
    }
    z += params[static_cast<std::size_t>(c) * per_class + static_cast<std::size_t>(model.input_dim)];
    scores[static_cast<std::size_t>(c)] = apply_sigmoid(z, model.sigmoid_mode);
  }
  return scores;
}

double oracle_loss(const ParamVector& params, const PageMinibatch& batch,
                   const ModelConfig& model) {
  double total = 0.0;
  for (const auto& s : batch.samples) {
    const auto scores = oracle_forward(params, s.features, model);
    for (int c = 0; c < model.num_classes; ++c) {
      const double y = (s.label == c) ? 1.0 : 0.0;
      double p = scores[static_cast<std::size_t>(c)];
      if (p < 1e-12) p = 1e-12;
      if (p > 1.0 - 1e-12) p = 1.0 - 1e-12;
      total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  double result = total / static_cast<double>(batch.samples.size());
  if (model.regularizer_kind == RegularizerKind::L2) {
    const std::size_t per_class = static_cast<std::size_t>(model.input_dim) + 1;
    double sq = 0.0;
    for (int c = 0; c < model.num_classes; ++c) {
      for (int j = 0; j < model.input_dim; ++j) {
        const double w =
            params[static_cast<std::size_t>(c) * per_class + static_cast<std::size_t>(j)];
        sq += w * w;
      }
    }
    result += 0.5 * model.regularizer_coeff * sq;
  }
  return result;
}

ParamVector oracle_gradient(const ParamVector& params, const Sample& sample,
                            const ModelConfig& model) {
  const std::size_t per_class = static_cast<std::size_t>(model.input_dim) + 1;
  ParamVector g(model.param_count());
  const auto scores = oracle_forward(params, sample.features, model);
  for (int c = 0; c < model.num_classes; ++c) {
    const double err = scores[static_cast<std::size_t>(c)] - ((sample.label == c) ? 1.0 : 0.0);
    for (int j = 0; j < model.input_dim; ++j) {
      const std::size_t k = static_cast<std::size_t>(c) * per_class + static_cast<std::size_t>(j);
      g[k] = err * sample.features[static_cast<std::size_t>(j)];
      if (model.regularizer_kind == RegularizerKind::L2) {
        g[k] += model.regularizer_coeff * params[k];
      }
    }
    g[static_cast<std::size_t>(c) * per_class + static_cast<std::size_t>(model.input_dim)] = err;
  }
  return g;
}

std::vector<ParamVector> sequential_sgd_reference(const std::vector<PageMinibatch>& minibatches,
                                                  const ModelConfig& model, double eta,
                                                  std::size_t num_updates) {
  std::vector<ParamVector> trajectory;
  trajectory.reserve(num_updates);
  ParamVector theta(model.param_count());
  for (std::size_t u = 0; u < num_updates; ++u) {
    const PageMinibatch& mb = minibatches[u % minibatches.size()];
    ParamVector delta(model.param_count());
    for (const auto& s : mb.samples) {
      const ParamVector g = oracle_gradient(theta, s, model);
      for (std::size_t k = 0; k < delta.size(); ++k) delta[k] += eta * g[k];
    }
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= delta[k];
    trajectory.push_back(theta);
  }
  return trajectory;
}

ParamVector finite_difference_gradient(const ParamVector& params, const Sample& sample,
                                       const ModelConfig& model, double h) {
  PageMinibatch single;
  single.samples.push_back(sample);
  ParamVector g(model.param_count());
  ParamVector work = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = work[k];
    work[k] = saved + h;
    const double up = oracle_loss(work, single, model);
    work[k] = saved - h;
    const double down = oracle_loss(work, single, model);
    work[k] = saved;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace ispsim::testsupport
