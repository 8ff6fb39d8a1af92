#include "ispsim/algorithms.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

#include "ispsim/errors.hpp"
#include "ispsim/sgd.hpp"

namespace ispsim {

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Synchronous: return "sync";
    case AlgorithmKind::Downpour: return "downpour";
    case AlgorithmKind::Easgd: return "easgd";
  }
  return "?";
}

AlgorithmKind parse_algorithm(const std::string& name) {
  if (name == "sync" || name == "synchronous") return AlgorithmKind::Synchronous;
  if (name == "downpour") return AlgorithmKind::Downpour;
  if (name == "easgd") return AlgorithmKind::Easgd;
  throw ConfigError("unknown algorithm '" + name + "' (expected sync|downpour|easgd)");
}

void AlgorithmConfig::validate() const {
  hyper.validate(kind == AlgorithmKind::Easgd);
  if (max_epochs && *max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
}

const DatasetLayout::PageRef& PagePassIterator::next() {
  if (empty()) throw std::logic_error("page pass: empty channel");
  const auto& ref = (*pages_)[pos_];
  if (++pos_ == pages_->size()) {
    pos_ = 0;
    ++epochs_;
  }
  return ref;
}

std::vector<PagePassIterator> data_pass_controller(const DatasetLayout& layout) {
  std::vector<PagePassIterator> iters;
  iters.reserve(layout.channels.size());
  for (const auto& ch : layout.channels) iters.emplace_back(&ch);
  return iters;
}

namespace {

// Pairwise (binary tree) sum over slave-id order: deterministic, and exact
// for identical addends when the count is a power of two.
ParamVector tree_sum(const std::vector<const ParamVector*>& parts) {
  if (parts.empty()) throw std::logic_error("tree_sum: no deltas");
  std::vector<ParamVector> work;
  work.reserve(parts.size());
  for (const ParamVector* p : parts) work.push_back(*p);
  std::size_t count = work.size();
  while (count > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < count; i += 2) {
      for (std::size_t k = 0; k < work[i].size(); ++k) {
        work[i][k] += work[i + 1][k];
      }
      if (out != i) work[out] = std::move(work[i]);
      ++out;
    }
    if (count % 2 == 1) {
      if (out != count - 1) work[out] = std::move(work[count - 1]);
      ++out;
    }
    count = out;
  }
  return std::move(work[0]);
}

class DriverBase : public AlgorithmDriver {
 public:
  DriverBase(const DatasetLayout& layout, const ModelConfig& model, const AlgorithmConfig& algo)
      : layout_(&layout), model_(model), algo_(algo) {
    model_.validate();
    algo_.validate();
  }

 protected:
  void common_start(Fabric& f, int slave_param_buffers) {
    const auto& cm = f.cost();
    const std::int64_t page = f.nand().geometry().page_size_bytes;
    const std::int64_t vec = cm.param_payload_bytes(model_.param_count());
    passes_ = data_pass_controller(*layout_);
    if (passes_.size() != static_cast<std::size_t>(f.num_slaves())) {
      throw ConfigError("layout has " + std::to_string(passes_.size()) +
                        " channels, fabric has " + std::to_string(f.num_slaves()));
    }
    pending_ref_.resize(static_cast<std::size_t>(f.num_slaves()));
    if (!algo_.initial_params.values.empty()) {
      if (algo_.initial_params.size() != model_.param_count()) {
        throw ConfigError("initial parameter vector length mismatch");
      }
      f.master().central_params = algo_.initial_params;
    }
    for (int i = 0; i < f.num_slaves(); ++i) {
      const std::int64_t used = page + slave_param_buffers * vec;
      f.record_peak_memory(i, used);
      if (used > f.slave(i).mem_budget_bytes) {
        f.add_warning("channel controller " + std::to_string(i) + " models " +
                      std::to_string(used) + " bytes, budget " +
                      std::to_string(f.slave(i).mem_budget_bytes));
      }
    }
    const std::int64_t master_used = master_param_buffers(f.num_slaves()) * vec;
    f.record_peak_memory(f.master_id(), master_used);
    if (master_used > f.master().mem_budget_bytes) {
      f.add_warning("cache controller models " + std::to_string(master_used) + " bytes, budget " +
                    std::to_string(f.master().mem_budget_bytes));
    }
  }

  virtual std::int64_t master_param_buffers(int) const { return 2; }  // central + one in-flight

  // Hands out the next page read, honoring the epoch limit; halts the slave
  // when its channel is empty or the limit is reached.
  bool issue_read(Fabric& f, int slave) {
    auto& pass = passes_[static_cast<std::size_t>(slave)];
    if (pass.empty()) {
      f.add_warning("channel " + std::to_string(slave) + " holds no pages; slave idle");
      f.slave(slave).halted = true;
      return false;
    }
    if (algo_.max_epochs && pass.epochs_handed_out() >= *algo_.max_epochs) {
      f.slave(slave).halted = true;
      return false;
    }
    const auto& ref = pass.next();
    pending_ref_[static_cast<std::size_t>(slave)] = ref;
    f.slave(slave).epochs_done = pass.epochs_handed_out();
    f.slave_read_page(slave, ref.addr);
    return true;
  }

  void decode_current_page(Fabric& f, int slave) {
    const auto& ref = pending_ref_[static_cast<std::size_t>(slave)];
    f.slave(slave).minibatch = decode_page(f.slave(slave).page_buffer, ref.sample_count, ref.addr,
                                           model_.input_dim, model_.num_classes);
  }

  SimDuration minibatch_cost(const Fabric& f, std::int64_t samples) const {
    const auto& cm = f.cost();
    return cm.compute_cost(cm.minibatch_flops(samples, model_.param_count()),
                           cm.minibatch_sigmoid_evals(samples, model_.num_classes));
  }

  // one pass over the parameter vector per `passes` (add/scale/subtract)
  SimDuration per_param_cost(const Fabric& f, std::int64_t passes) const {
    return f.cost().compute_cost(passes * static_cast<std::int64_t>(model_.param_count()), 0);
  }

  int active_count(Fabric& f) const {
    int n = 0;
    for (int i = 0; i < f.num_slaves(); ++i) {
      if (!f.slave(i).halted) ++n;
    }
    return n;
  }

  const DatasetLayout* layout_;
  ModelConfig model_;
  AlgorithmConfig algo_;
  std::vector<PagePassIterator> passes_;
  std::vector<DatasetLayout::PageRef> pending_ref_;
};

// Every minibatch each slave reads its page, pulls theta_cache, accumulates
// its delta over the b samples, pushes, and waits; the master averages the
// deltas (pairwise sum in slave-id order, scaled by 1/count), subtracts, and
// releases every waiting slave at the same timestamp.
class SyncDriver : public DriverBase {
 public:
  using DriverBase::DriverBase;

  void start(Fabric& f) override {
    common_start(f, /*slave_param_buffers=*/2);
    for (int i = 0; i < f.num_slaves(); ++i) issue_read(f, i);
  }

  std::int64_t master_param_buffers(int n) const override { return n + 1; }

  void on_event(Fabric& f, const Event& ev) override {
    switch (ev.kind) {
      case EventKind::PageReadDone: {
        decode_current_page(f, ev.target);
        f.master_pull(ev.target);
        return;
      }
      case EventKind::MsgDelivered: {
        if (msg_code(ev.aux) == MsgCode::PullReply) {
          const int i = ev.target;
          auto& s = f.slave(i);
          s.local_params = f.master().central_params;
          s.accum = accumulate_minibatch_gradient(s.local_params, s.minibatch,
                                                  algo_.hyper.learning_rate, model_);
          f.slave_compute(
              i, minibatch_cost(f, static_cast<std::int64_t>(s.minibatch.samples.size())));
          return;
        }
        if (msg_code(ev.aux) == MsgCode::PushApply) {
          on_push_arrived(f, msg_slave(ev.aux));
          return;
        }
        throw std::logic_error("sync: unexpected message");
      }
      case EventKind::ComputeDone: {
        if (ev.target == f.master_id()) {
          apply_aggregate(f);
          return;
        }
        const int i = ev.target;
        f.count_minibatch(i);
        f.slave(i).outbound_pushes.push_back(f.slave(i).accum);
        f.master_push(i, SimDuration{}, /*notify_sender=*/false);  // slave blocks at the barrier
        return;
      }
      case EventKind::BarrierRelease: {
        issue_read(f, ev.target);
        return;
      }
      default:
        throw std::logic_error("sync: unexpected event kind");
    }
  }

 private:
  void on_push_arrived(Fabric& f, int slave) {
    auto& m = f.master();
    m.barrier_deltas[static_cast<std::size_t>(slave)] =
        std::move(f.slave(slave).outbound_pushes.front());
    f.slave(slave).outbound_pushes.pop_front();
    m.barrier_arrived[static_cast<std::size_t>(slave)] = 1;
    ++m.pending_pushes;
    if (m.pending_pushes < active_count(f)) return;
    // Last arrival. Aggregation: (count-1) adds + scale + subtract per param,
    // so release time = last push arrival + aggregation compute cost.
    const std::int64_t count = m.pending_pushes;
    const SimTime agg_done = f.master_occupy(per_param_cost(f, count + 1));
    f.schedule(agg_done, f.master_id(), EventKind::ComputeDone);  // applies before the releases
    for (int i = 0; i < f.num_slaves(); ++i) {
      if (m.barrier_arrived[static_cast<std::size_t>(i)]) {
        f.schedule(agg_done, i, EventKind::BarrierRelease);
      }
    }
  }

  void apply_aggregate(Fabric& f) {
    auto& m = f.master();
    std::vector<const ParamVector*> parts;
    for (int i = 0; i < f.num_slaves(); ++i) {
      if (m.barrier_arrived[static_cast<std::size_t>(i)]) {
        parts.push_back(&m.barrier_deltas[static_cast<std::size_t>(i)]);
      }
    }
    const ParamVector sum = tree_sum(parts);
    const double inv = 1.0 / static_cast<double>(parts.size());
    auto& theta = m.central_params;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      theta[k] -= inv * sum[k];
    }
    ensure_finite(theta, "theta_cache (sync aggregate)");
    f.notify_master_updated();
    m.pending_pushes = 0;
    std::fill(m.barrier_arrived.begin(), m.barrier_arrived.end(), 0);
  }
};

// Slaves loop minibatches without barriers. Default mode keeps a working copy
// theta^i, applies each page's gradient locally, and on every tau-th
// minibatch pushes the accumulated delta and re-pulls; strict mode re-pulls
// before every minibatch and drops unsent gradients, as printed. The next
// page read has no data dependency on an in-flight exchange, so it overlaps
// the push/pull; the minibatch compute waits for both the page and the
// refreshed theta^i.
class DownpourDriver : public DriverBase {
 public:
  using DriverBase::DriverBase;

  enum Phase {
    Plain = 0,   // no exchange pending; page completion starts the compute
    InitPull,    // variant: waiting for the t=0 seed pull
    StrictPull,  // strict: per-minibatch pull between read and compute
    Resync,      // variant: read and post-push pull both in flight
  };

  void start(Fabric& f) override {
    common_start(f, /*slave_param_buffers=*/2);
    for (int i = 0; i < f.num_slaves(); ++i) {
      if (algo_.strict_downpour) {
        f.slave(i).phase = Plain;
        issue_read(f, i);
      } else {
        f.slave(i).phase = InitPull;
        f.master_pull(i);
      }
    }
    have_page_.assign(static_cast<std::size_t>(f.num_slaves()), 0);
    have_params_.assign(static_cast<std::size_t>(f.num_slaves()), 0);
  }

  void on_event(Fabric& f, const Event& ev) override {
    switch (ev.kind) {
      case EventKind::PageReadDone: {
        const int i = ev.target;
        decode_current_page(f, i);
        auto& s = f.slave(i);
        if (algo_.strict_downpour) {
          s.phase = StrictPull;
          f.master_pull(i);
        } else if (s.phase == Resync) {
          have_page_[static_cast<std::size_t>(i)] = 1;
          maybe_compute(f, i);
        } else {
          compute_minibatch(f, i);
        }
        return;
      }
      case EventKind::ComputeDone: {
        const int i = ev.target;
        f.count_minibatch(i);
        auto& s = f.slave(i);
        if (s.minibatches_done % algo_.hyper.comm_period == 0) {
          s.outbound_pushes.push_back(s.accum);
          s.accum.fill_zero();
          // push first so the resync pull is serialized behind the apply,
          // then start the next read concurrently with both
          f.master_push(i, per_param_cost(f, 1), /*notify_sender=*/false);
          if (algo_.strict_downpour) {
            s.phase = Plain;
            issue_read(f, i);
          } else {
            s.phase = Resync;
            have_page_[static_cast<std::size_t>(i)] = 0;
            have_params_[static_cast<std::size_t>(i)] = 0;
            f.master_pull(i);
            issue_read(f, i);
          }
        } else {
          s.phase = Plain;
          issue_read(f, i);
        }
        return;
      }
      case EventKind::MsgDelivered: {
        const MsgCode code = msg_code(ev.aux);
        if (code == MsgCode::PushApply) {
          const int i = msg_slave(ev.aux);
          auto& m = f.master();
          const ParamVector delta = std::move(f.slave(i).outbound_pushes.front());
          f.slave(i).outbound_pushes.pop_front();
          for (std::size_t k = 0; k < m.central_params.size(); ++k) {
            m.central_params[k] -= delta[k];
          }
          ensure_finite(m.central_params, "theta_cache (downpour apply)");
          f.notify_master_updated();
          return;
        }
        if (code == MsgCode::PullReply) {
          const int i = ev.target;
          auto& s = f.slave(i);
          s.local_params = f.master().central_params;
          if (s.phase == StrictPull) {
            compute_minibatch(f, i);
          } else if (s.phase == Resync) {
            have_params_[static_cast<std::size_t>(i)] = 1;
            maybe_compute(f, i);
          } else {  // InitPull
            s.phase = Plain;
            issue_read(f, i);
          }
          return;
        }
        throw std::logic_error("downpour: unexpected message");
      }
      default:
        throw std::logic_error("downpour: unexpected event kind");
    }
  }

 private:
  void maybe_compute(Fabric& f, int i) {
    if (have_page_[static_cast<std::size_t>(i)] && have_params_[static_cast<std::size_t>(i)]) {
      compute_minibatch(f, i);
    }
  }

  void compute_minibatch(Fabric& f, int i) {
    auto& s = f.slave(i);
    if (s.halted) return;
    const ParamVector page_grad = accumulate_minibatch_gradient(
        s.local_params, s.minibatch, algo_.hyper.learning_rate, model_);
    SimDuration cost = minibatch_cost(f, static_cast<std::int64_t>(s.minibatch.samples.size()));
    if (algo_.strict_downpour) {
      s.accum = page_grad;  // fresh every minibatch; unsent deltas are dropped
    } else {
      for (std::size_t k = 0; k < s.accum.size(); ++k) s.accum[k] += page_grad[k];
      for (std::size_t k = 0; k < s.local_params.size(); ++k) s.local_params[k] -= page_grad[k];
      ensure_finite(s.local_params, "theta^i (downpour local)");
      cost += per_param_cost(f, 1);  // local apply
    }
    s.phase = Plain;
    f.slave_compute(i, cost);
  }

  std::vector<std::uint8_t> have_page_;
  std::vector<std::uint8_t> have_params_;
};

// Slaves train their own theta^i (mean of the page's scaled gradients) and on
// every tau-th minibatch exchange an elastic delta alpha(theta^i -
// theta_cache) with the master, which adds it to theta_cache. The next page
// read overlaps the exchange; the next minibatch compute waits for both the
// page and the post-exchange theta^i.
class EasgdDriver : public DriverBase {
 public:
  using DriverBase::DriverBase;

  enum Phase {
    Plain = 0,        // page completion starts the local compute directly
    InitPull,         // t=0 seed pull so local models start from the center
    LocalCompute,
    Exchanging,       // pull/delta/push in flight, next read possibly too
  };

  void start(Fabric& f) override {
    common_start(f, /*slave_param_buffers=*/3);
    have_page_.assign(static_cast<std::size_t>(f.num_slaves()), 0);
    exchange_done_.assign(static_cast<std::size_t>(f.num_slaves()), 0);
    exchange_computed_.assign(static_cast<std::size_t>(f.num_slaves()), 0);
    for (int i = 0; i < f.num_slaves(); ++i) {
      f.slave(i).phase = InitPull;
      f.master_pull(i);
    }
  }

  void on_event(Fabric& f, const Event& ev) override {
    switch (ev.kind) {
      case EventKind::PageReadDone: {
        const int i = ev.target;
        decode_current_page(f, i);
        auto& s = f.slave(i);
        if (s.phase == Exchanging) {
          have_page_[static_cast<std::size_t>(i)] = 1;
          maybe_local_compute(f, i);
        } else {
          local_compute(f, i);
        }
        return;
      }
      case EventKind::ComputeDone: {
        const int i = ev.target;
        auto& s = f.slave(i);
        if (s.phase == LocalCompute) {
          f.count_minibatch(i);
          if (s.minibatches_done % algo_.hyper.comm_period == 0) {
            s.phase = Exchanging;
            have_page_[static_cast<std::size_t>(i)] = 0;
            exchange_done_[static_cast<std::size_t>(i)] = 0;
            exchange_computed_[static_cast<std::size_t>(i)] = 0;
            f.master_pull(i);
            issue_read(f, i);  // the read does not depend on the exchange
          } else {
            s.phase = Plain;
            issue_read(f, i);
          }
          return;
        }
        if (s.phase == Exchanging && exchange_computed_[static_cast<std::size_t>(i)] == 0) {
          exchange_computed_[static_cast<std::size_t>(i)] = 1;
          f.master_push(i, per_param_cost(f, 1), /*notify_sender=*/true);
          return;
        }
        throw std::logic_error("easgd: compute done in unexpected phase");
      }
      case EventKind::MsgDelivered: {
        const MsgCode code = msg_code(ev.aux);
        if (code == MsgCode::PullReply) {
          const int i = ev.target;
          auto& s = f.slave(i);
          if (s.phase == InitPull) {
            s.local_params = f.master().central_params;
            s.phase = Plain;
            issue_read(f, i);
            return;
          }
          // delta = alpha (theta^i - theta_cache); theta^i -= delta
          ParamVector delta =
              elastic_delta(s.local_params, f.master().central_params, algo_.hyper.moving_rate);
          for (std::size_t k = 0; k < s.local_params.size(); ++k) {
            s.local_params[k] -= delta[k];
          }
          ensure_finite(s.local_params, "theta^i (easgd exchange)");
          s.outbound_pushes.push_back(std::move(delta));
          f.slave_compute(i, per_param_cost(f, 3));
          return;
        }
        if (code == MsgCode::PushApply) {
          const int i = msg_slave(ev.aux);
          auto& m = f.master();
          const ParamVector delta = std::move(f.slave(i).outbound_pushes.front());
          f.slave(i).outbound_pushes.pop_front();
          for (std::size_t k = 0; k < m.central_params.size(); ++k) {
            m.central_params[k] += delta[k];
          }
          ensure_finite(m.central_params, "theta_cache (easgd apply)");
          f.notify_master_updated();
          return;
        }
        if (code == MsgCode::PushSent) {
          const int i = ev.target;
          exchange_done_[static_cast<std::size_t>(i)] = 1;
          maybe_local_compute(f, i);
          return;
        }
        throw std::logic_error("easgd: unexpected message");
      }
      default:
        throw std::logic_error("easgd: unexpected event kind");
    }
  }

 private:
  void maybe_local_compute(Fabric& f, int i) {
    if (have_page_[static_cast<std::size_t>(i)] && exchange_done_[static_cast<std::size_t>(i)]) {
      local_compute(f, i);
    }
  }

  // temp <- sum_k eta grad F; theta^i <- theta^i - temp / samples
  void local_compute(Fabric& f, int i) {
    auto& s = f.slave(i);
    if (s.halted) return;
    s.accum = accumulate_minibatch_gradient(s.local_params, s.minibatch,
                                            algo_.hyper.learning_rate, model_);
    const double inv = 1.0 / static_cast<double>(s.minibatch.samples.size());
    for (std::size_t k = 0; k < s.local_params.size(); ++k) {
      s.local_params[k] -= inv * s.accum[k];
    }
    ensure_finite(s.local_params, "theta^i (easgd local)");
    s.phase = LocalCompute;
    f.slave_compute(
        i, minibatch_cost(f, static_cast<std::int64_t>(s.minibatch.samples.size())) +
               per_param_cost(f, 2));
    return;
  }

  std::vector<std::uint8_t> have_page_;
  std::vector<std::uint8_t> exchange_done_;
  std::vector<std::uint8_t> exchange_computed_;
};

}  // namespace

MetricsLog run_algorithm(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                         const AlgorithmConfig& algo, const StopCondition& stop,
                         Fabric::EvalFn eval, SimDuration eval_cadence) {
  std::unique_ptr<DriverBase> driver;
  switch (algo.kind) {
    case AlgorithmKind::Synchronous:
      driver = std::make_unique<SyncDriver>(layout, model, algo);
      break;
    case AlgorithmKind::Downpour:
      driver = std::make_unique<DownpourDriver>(layout, model, algo);
      break;
    case AlgorithmKind::Easgd:
      driver = std::make_unique<EasgdDriver>(layout, model, algo);
      break;
  }
  return fabric.run(*driver, stop, std::move(eval), eval_cadence);
}

MetricsLog run_sync_sgd(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                        const AlgorithmConfig& algo, const StopCondition& stop,
                        Fabric::EvalFn eval, SimDuration eval_cadence) {
  AlgorithmConfig a = algo;
  a.kind = AlgorithmKind::Synchronous;
  a.hyper.comm_period = 1;  // tau is meaningless under the barrier
  return run_algorithm(fabric, layout, model, a, stop, std::move(eval), eval_cadence);
}

MetricsLog run_downpour(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                        const AlgorithmConfig& algo, const StopCondition& stop,
                        Fabric::EvalFn eval, SimDuration eval_cadence) {
  AlgorithmConfig a = algo;
  a.kind = AlgorithmKind::Downpour;
  return run_algorithm(fabric, layout, model, a, stop, std::move(eval), eval_cadence);
}

MetricsLog run_easgd(Fabric& fabric, const DatasetLayout& layout, const ModelConfig& model,
                     const AlgorithmConfig& algo, const StopCondition& stop, Fabric::EvalFn eval,
                     SimDuration eval_cadence) {
  AlgorithmConfig a = algo;
  a.kind = AlgorithmKind::Easgd;
  return run_algorithm(fabric, layout, model, a, stop, std::move(eval), eval_cadence);
}

}  // namespace ispsim
