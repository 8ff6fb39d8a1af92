#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "ispsim/cost_model.hpp"
#include "ispsim/metrics.hpp"
#include "ispsim/model.hpp"
#include "ispsim/nand.hpp"
#include "ispsim/sim_time.hpp"

namespace ispsim {

enum class EventKind : std::uint8_t {
  PageReadDone,
  ComputeDone,
  MsgDelivered,
  BarrierRelease,
  EvalCheckpoint,
};

const char* to_string(EventKind kind);

// Message delivery sub-codes carried in Event::aux (low bits = code,
// high bits = originating slave id).
enum class MsgCode : std::int64_t {
  PullReply = 1,  // delivered to the slave; snapshot theta_cache now
  PushApply = 2,  // delivered to the master; apply the slave's delta now
  PushSent = 3,   // the slave's outbound transfer finished; it may resume
};

std::int64_t encode_msg(MsgCode code, int slave);
MsgCode msg_code(std::int64_t aux);
int msg_slave(std::int64_t aux);

struct Event {
  SimTime time;
  std::uint64_t seq = 0;  // assigned at schedule time; total order is (time, seq)
  int target = 0;         // slave id, or the master id (= num_slaves)
  EventKind kind = EventKind::PageReadDone;
  std::int64_t aux = 0;
};

// Per-channel-controller (slave) state. `phase` and the vectors are owned by
// the algorithm driver; the fabric only provides the storage.
struct ChannelControllerState {
  int id = 0;
  ParamVector local_params;  // theta^i
  ParamVector accum;         // running delta / temp accumulator
  std::vector<std::uint8_t> page_buffer;
  PageMinibatch minibatch;
  std::deque<ParamVector> outbound_pushes;  // in-flight deltas, FIFO to the master
  std::int64_t minibatches_done = 0;
  std::int64_t epochs_done = 0;
  int phase = 0;
  bool halted = false;
  std::int64_t mem_budget_bytes = 24576;  // 8KB page buffer + 16KB ISP memory
};

// Cache-controller (master) state. Single-server: pulls and push-applies are
// serialized through busy_until in arrival order, which makes theta_cache
// updates linearizable and deterministic.
struct CacheControllerState {
  ParamVector central_params;  // theta_cache
  SimTime busy_until;
  std::int64_t pending_pushes = 0;  // barrier bookkeeping (synchronous mode)
  std::vector<ParamVector> barrier_deltas;
  std::vector<std::uint8_t> barrier_arrived;
  std::int64_t mem_budget_bytes = 0;  // (n+1) x page size
};

struct StopCondition {
  std::optional<SimDuration> deadline;      // events strictly after it do not run
  std::optional<double> target_accuracy;    // checked at eval checkpoints
  std::optional<std::int64_t> max_epochs;   // enforced by the algorithm driver
};

class Fabric;

// One parallel-SGD choreography, driven by fabric events.
class AlgorithmDriver {
 public:
  virtual ~AlgorithmDriver() = default;
  virtual void start(Fabric& fabric) = 0;
  virtual void on_event(Fabric& fabric, const Event& ev) = 0;
};

// Deterministic discrete-event engine for the SSD controller complex:
// n channel controllers (slaves), one cache controller (master), the NAND
// array behind the slaves, and the on-chip parameter bus between them.
class Fabric {
 public:
  Fabric(NandArray& nand, CostModel cost, std::size_t param_count);

  // --- static topology ---
  int num_slaves() const { return static_cast<int>(slaves_.size()); }
  int master_id() const { return num_slaves(); }
  const CostModel& cost() const { return cost_; }
  NandArray& nand() { return *nand_; }

  ChannelControllerState& slave(int id) { return slaves_[static_cast<std::size_t>(id)]; }
  CacheControllerState& master() { return master_; }
  const CacheControllerState& master() const { return master_; }

  // --- clock & queue ---
  SimTime now() const { return now_; }
  void schedule(SimTime t, int target, EventKind kind, std::int64_t aux = 0);

  // --- slave-side primitives (charge simulated time) ---
  // Reads addr into the slave's page buffer; PageReadDone fires when the
  // channel has been busy for t_read (+ per-read overhead). Reads on distinct
  // channels overlap; reads on one channel serialize.
  void slave_read_page(int slave_id, const PageAddress& addr);
  // Occupies the slave's FPU; ComputeDone(aux) fires at now + cost.
  void slave_compute(int slave_id, SimDuration cost, std::int64_t aux = 0);

  // --- master transactions (serialized on the master) ---
  // Request now, reply transfer serialized behind earlier master work;
  // MsgDelivered(PullReply) fires at completion. Returns the delivery time.
  SimTime master_pull(int slave_id);
  // The slave's outbound transfer takes transfer_cost(payload); the apply is
  // then serialized on the master for apply_cost. MsgDelivered(PushApply)
  // fires at apply completion; if notify_sender, MsgDelivered(PushSent) fires
  // at transfer completion so the slave can resume without waiting.
  SimTime master_push(int slave_id, SimDuration apply_cost, bool notify_sender);
  // Occupy the master for `cost` starting no earlier than now (aggregation).
  SimTime master_occupy(SimDuration cost);

  // --- counters / logging ---
  void count_minibatch(int slave_id) { ++slaves_[static_cast<std::size_t>(slave_id)].minibatches_done; }
  void add_warning(std::string text);
  std::int64_t reads_completed() const { return reads_completed_; }
  std::int64_t pushes_applied() const { return pushes_applied_; }
  std::int64_t bytes_transferred() const { return bytes_transferred_; }

  using EvalFn = std::function<double(const ParamVector&)>;
  using TraceFn = std::function<void(const Event&)>;
  using MasterUpdateFn = std::function<void(const ParamVector&)>;

  void set_trace_sink(TraceFn fn) { trace_ = std::move(fn); }
  // invoked by drivers after every theta_cache mutation (test/trace hook)
  void notify_master_updated();
  void set_master_update_observer(MasterUpdateFn fn) { master_observer_ = std::move(fn); }

  void record_peak_memory(int controller, std::int64_t bytes);

  // Runs the driver until the queue drains, the deadline passes, or an eval
  // checkpoint reaches the target accuracy. Returns the metrics log.
  MetricsLog run(AlgorithmDriver& driver, const StopCondition& stop, EvalFn eval,
                 SimDuration eval_cadence);

 private:
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::int64_t param_payload() const {
    return cost_.param_payload_bytes(param_count_);
  }
  void append_metrics_record(double accuracy);

  NandArray* nand_;
  CostModel cost_;
  std::size_t param_count_;

  std::vector<ChannelControllerState> slaves_;
  std::vector<SimTime> channel_busy_until_;
  CacheControllerState master_;

  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::int64_t non_eval_pending_ = 0;

  std::int64_t reads_completed_ = 0;
  std::int64_t pushes_applied_ = 0;
  std::int64_t bytes_transferred_ = 0;

  MetricsLog log_;
  TraceFn trace_;
  MasterUpdateFn master_observer_;
};

}  // namespace ispsim
