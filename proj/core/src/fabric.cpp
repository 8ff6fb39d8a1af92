#include "ispsim/fabric.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ispsim/errors.hpp"

namespace ispsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::PageReadDone: return "page_read_done";
    case EventKind::ComputeDone: return "compute_done";
    case EventKind::MsgDelivered: return "msg_delivered";
    case EventKind::BarrierRelease: return "barrier_release";
    case EventKind::EvalCheckpoint: return "eval_checkpoint";
  }
  return "?";
}

std::int64_t encode_msg(MsgCode code, int slave) {
  return static_cast<std::int64_t>(code) | (static_cast<std::int64_t>(slave) << 8);
}

MsgCode msg_code(std::int64_t aux) { return static_cast<MsgCode>(aux & 0xff); }

int msg_slave(std::int64_t aux) { return static_cast<int>(aux >> 8); }

Fabric::Fabric(NandArray& nand, CostModel cost, std::size_t param_count)
    : nand_(&nand), cost_(cost), param_count_(param_count) {
  cost_.validate();
  const int n = nand.geometry().num_channels;
  slaves_.resize(static_cast<std::size_t>(n));
  channel_busy_until_.assign(static_cast<std::size_t>(n), SimTime::origin());
  for (int i = 0; i < n; ++i) {
    auto& s = slaves_[static_cast<std::size_t>(i)];
    s.id = i;
    s.local_params = ParamVector(param_count_);
    s.accum = ParamVector(param_count_);
    s.page_buffer.resize(static_cast<std::size_t>(nand.geometry().page_size_bytes));
  }
  master_.central_params = ParamVector(param_count_);
  master_.mem_budget_bytes =
      static_cast<std::int64_t>(n + 1) * nand.geometry().page_size_bytes;
  master_.barrier_deltas.resize(static_cast<std::size_t>(n));
  master_.barrier_arrived.assign(static_cast<std::size_t>(n), 0);
}

void Fabric::schedule(SimTime t, int target, EventKind kind, std::int64_t aux) {
  if (t < now_) {
    throw std::logic_error("fabric: scheduling an event in the past (" + format_ns(t) +
                           " ns < now " + format_ns(now_) + " ns)");
  }
  Event ev{t, next_seq_++, target, kind, aux};
  queue_.push(ev);
  if (kind != EventKind::EvalCheckpoint) ++non_eval_pending_;
}

void Fabric::slave_read_page(int slave_id, const PageAddress& addr) {
  auto& s = slaves_[static_cast<std::size_t>(slave_id)];
  if (addr.channel != slave_id) {
    throw std::logic_error("fabric: slave " + std::to_string(slave_id) +
                           " asked to read channel " + std::to_string(addr.channel));
  }
  auto result = nand_->read_page(addr);
  s.page_buffer = std::move(result.data);
  auto& busy = channel_busy_until_[static_cast<std::size_t>(slave_id)];
  const SimTime start = std::max(busy, now_);
  const SimTime done = start + result.latency + cost_.read_overhead;
  busy = done;
  schedule(done, slave_id, EventKind::PageReadDone);
}

void Fabric::slave_compute(int slave_id, SimDuration cost, std::int64_t aux) {
  schedule(now_ + cost, slave_id, EventKind::ComputeDone, aux);
}

SimTime Fabric::master_pull(int slave_id) {
  // zero-byte request, parameter-sized reply
  const SimTime start = std::max(master_.busy_until, now_);
  const SimTime done = start + cost_.transfer_cost(param_payload());
  master_.busy_until = done;
  bytes_transferred_ += param_payload();
  schedule(done, slave_id, EventKind::MsgDelivered, encode_msg(MsgCode::PullReply, slave_id));
  return done;
}

SimTime Fabric::master_push(int slave_id, SimDuration apply_cost, bool notify_sender) {
  const SimTime arrival = now_ + cost_.transfer_cost(param_payload());
  bytes_transferred_ += param_payload();
  const SimTime start = std::max(master_.busy_until, arrival);
  const SimTime done = start + apply_cost;
  master_.busy_until = done;
  schedule(done, master_id(), EventKind::MsgDelivered, encode_msg(MsgCode::PushApply, slave_id));
  if (notify_sender) {
    schedule(arrival, slave_id, EventKind::MsgDelivered, encode_msg(MsgCode::PushSent, slave_id));
  }
  return done;
}

SimTime Fabric::master_occupy(SimDuration cost) {
  const SimTime start = std::max(master_.busy_until, now_);
  const SimTime done = start + cost;
  master_.busy_until = done;
  return done;
}

void Fabric::add_warning(std::string text) { log_.warnings.push_back(std::move(text)); }

void Fabric::notify_master_updated() {
  if (master_observer_) master_observer_(master_.central_params);
}

void Fabric::record_peak_memory(int controller, std::int64_t bytes) {
  auto& peaks = log_.peak_mem_bytes_per_controller;
  if (peaks.size() <= static_cast<std::size_t>(controller)) {
    peaks.resize(static_cast<std::size_t>(controller) + 1, 0);
  }
  peaks[static_cast<std::size_t>(controller)] =
      std::max(peaks[static_cast<std::size_t>(controller)], bytes);
}

void Fabric::append_metrics_record(double accuracy) {
  MetricsRecord r;
  r.sim_time = now_;
  r.minibatches_per_slave.reserve(slaves_.size());
  for (const auto& s : slaves_) r.minibatches_per_slave.push_back(s.minibatches_done);
  r.test_accuracy = accuracy;
  r.reads = reads_completed_;
  r.pushes = pushes_applied_;
  r.bytes_transferred = bytes_transferred_;
  log_.records.push_back(std::move(r));
}

MetricsLog Fabric::run(AlgorithmDriver& driver, const StopCondition& stop, EvalFn eval,
                       SimDuration eval_cadence) {
  nand_->seal();
  driver.start(*this);
  if (eval && eval_cadence.ps > 0) {
    schedule(SimTime::origin() + eval_cadence, master_id(), EventKind::EvalCheckpoint);
  }

  const std::optional<SimTime> deadline =
      stop.deadline ? std::optional<SimTime>(SimTime::origin() + *stop.deadline) : std::nullopt;

  while (!queue_.empty()) {
    const Event ev = queue_.top();
    if (deadline && ev.time > *deadline) break;
    queue_.pop();
    if (ev.time < now_) {
      throw std::logic_error("fabric: event time moved backwards");
    }
    now_ = ev.time;
    if (trace_) trace_(ev);

    if (ev.kind == EventKind::EvalCheckpoint) {
      const double acc = eval(master_.central_params);
      log_.final_accuracy = acc;
      append_metrics_record(acc);
      if (stop.target_accuracy && acc >= *stop.target_accuracy) break;
      // keep evaluating only while simulated work remains
      if (non_eval_pending_ > 0) {
        schedule(now_ + eval_cadence, master_id(), EventKind::EvalCheckpoint);
      }
      continue;
    }

    --non_eval_pending_;
    if (ev.kind == EventKind::PageReadDone) ++reads_completed_;
    if (ev.kind == EventKind::MsgDelivered && msg_code(ev.aux) == MsgCode::PushApply) {
      ++pushes_applied_;
    }
    driver.on_event(*this, ev);
  }

  log_.end_time = now_;
  log_.epochs_per_slave.clear();
  for (const auto& s : slaves_) log_.epochs_per_slave.push_back(s.epochs_done);
  return log_;
}

}  // namespace ispsim
