#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "ispsim/errors.hpp"
#include "ispsim/ihp.hpp"

using namespace ispsim;

namespace {

ReplayConfig make_config(int channels, int blocks = 64, int pages = 16) {
  ReplayConfig rc;
  rc.geometry.num_channels = channels;
  rc.geometry.blocks_per_channel = blocks;
  rc.geometry.pages_per_block = pages;
  rc.geometry.page_size_bytes = 8192;
  return rc;
}

std::vector<IoTraceRecord> reads_at_zero(int count, std::int64_t page_size = 8192) {
  std::vector<IoTraceRecord> trace;
  for (int i = 0; i < count; ++i) {
    trace.push_back({0, IoOp::Read, i * page_size, page_size});
  }
  return trace;
}

}  // namespace

TEST_CASE("parse_trace: empty, single line, comments, normalization") {
  {
    std::istringstream in("");
    CHECK(parse_trace(in, "t").empty());
  }
  {
    std::istringstream in("0 R 0 8192\n");
    const auto t = parse_trace(in, "t");
    REQUIRE(t.size() == 1);
    CHECK(t[0].issue_time_ns == 0);
    CHECK(t[0].op == IoOp::Read);
    CHECK(t[0].offset_bytes == 0);
    CHECK(t[0].length_bytes == 8192);
  }
  {
    std::istringstream in("# header comment\n500 W 8192 4096 # trailing comment\n\n100 r 0 512\n");
    const auto t = parse_trace(in, "t");
    REQUIRE(t.size() == 2);
    CHECK(t[0].issue_time_ns == 100);  // stable sort by issue time
    CHECK(t[1].issue_time_ns == 500);
    CHECK(t[1].op == IoOp::Write);
  }
}

TEST_CASE("parse_trace: malformed lines name the line number") {
  {
    std::istringstream in("0 R 0 8192\n17 X 0 512\n");
    CHECK_THROWS_WITH_AS((void)parse_trace(in, "trace.txt"), doctest::Contains("trace.txt:2"),
                         DataError);
  }
  {
    std::istringstream in("0 R 0\n");
    CHECK_THROWS_WITH_AS((void)parse_trace(in, "t"), doctest::Contains("t:1"), DataError);
  }
  {
    std::istringstream in("0 R 0 -4\n");
    CHECK_THROWS_AS((void)parse_trace(in, "t"), DataError);
  }
  {
    std::istringstream in("0 R 0 8192 junk\n");
    CHECK_THROWS_WITH_AS((void)parse_trace(in, "t"), doctest::Contains("trailing"), DataError);
  }
}

TEST_CASE("replay: single 8KB read costs t_read on any channel count") {
  for (int n : {1, 4, 16}) {
    CAPTURE(n);
    const auto t = replay_trace(reads_at_zero(1), make_config(n));
    CHECK(t.ps == 75'000'000);
  }
}

TEST_CASE("replay: sixteen reads — parallel over 16 channels, serial over 1") {
  const auto trace = reads_at_zero(16);
  CHECK(replay_trace(trace, make_config(16)).ps == 75'000'000);
  CHECK(replay_trace(trace, make_config(1)).ps == 16 * 75'000'000LL);  // 1.2 ms
}

TEST_CASE("replay: a fresh-page write costs t_prog; erase is charged on exhaustion") {
  {
    std::vector<IoTraceRecord> one_write{{0, IoOp::Write, 0, 8192}};
    CHECK(replay_trace(one_write, make_config(1)).ps == 300'000'000);
  }
  {
    // capacity: 1 block x 2 pages on one channel; third write pays the erase
    std::vector<IoTraceRecord> writes{{0, IoOp::Write, 0, 8192},
                                      {0, IoOp::Write, 8192, 8192},
                                      {0, IoOp::Write, 16384, 8192}};
    const auto t = replay_trace(writes, make_config(1, 1, 2));
    CHECK(t.ps == (300 + 300 + 5000 + 300) * 1'000'000LL);
  }
}

TEST_CASE("replay: issue times are honored") {
  std::vector<IoTraceRecord> trace{{0, IoOp::Read, 0, 8192},
                                   {200'000, IoOp::Read, 8192, 8192}};  // arrives after 1st done
  const auto t = replay_trace(trace, make_config(1));
  CHECK(t.ps == 275'000'000);  // second starts at 200 us, finishes at 275 us
}

TEST_CASE("replay: partial pages round up to whole page operations") {
  std::vector<IoTraceRecord> trace{{0, IoOp::Read, 100, 8192}};  // straddles two pages
  CHECK(replay_trace(trace, make_config(1)).ps == 2 * 75'000'000LL);
  CHECK(replay_trace(trace, make_config(2)).ps == 75'000'000);  // pages land on two channels
}

TEST_CASE("replay monotonicity: more records never finish sooner") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> page(0, 63), when(0, 1'000'000);
  std::vector<IoTraceRecord> trace;
  SimDuration prev{};
  const auto rc = make_config(4);
  for (int i = 0; i < 60; ++i) {
    trace.push_back({when(rng), (rng() & 1) ? IoOp::Write : IoOp::Read, page(rng) * 8192, 8192});
    auto sorted = trace;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const IoTraceRecord& a, const IoTraceRecord& b) {
                       return a.issue_time_ns < b.issue_time_ns;
                     });
    const auto t = replay_trace(sorted, rc);
    CHECK(t.ps >= prev.ps);
    prev = t;
  }
}

TEST_CASE("replay: n channels never lose to one channel") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> page(0, 127);
  std::vector<IoTraceRecord> trace;
  for (int i = 0; i < 40; ++i) trace.push_back({0, IoOp::Read, page(rng) * 8192, 8192});
  const auto wide = replay_trace(trace, make_config(8));
  const auto narrow = replay_trace(trace, make_config(1));
  CHECK(wide.ps <= narrow.ps);
}

TEST_CASE("expected_ihp_time: worked examples and error paths") {
  IhpMeasurement m;
  m.t_total = SimDuration::from_ms(100'000.0);  // 100 s
  m.t_io = SimDuration::from_ms(30'000.0);
  CHECK(expected_ihp_time(m, SimDuration::from_ms(12'000.0)).ps ==
        SimDuration::from_ms(82'000.0).ps);
  CHECK(expected_ihp_time(m, m.t_io).ps == m.t_total.ps);  // identity case

  IhpMeasurement all_io;
  all_io.t_total = SimDuration::from_ms(10'000.0);
  all_io.t_io = all_io.t_total;
  CHECK(expected_ihp_time(all_io, SimDuration{}).ps == 0);

  IhpMeasurement bad;
  bad.t_total = SimDuration::from_ms(5.0);
  bad.t_io = SimDuration::from_ms(9.0);
  CHECK_THROWS_AS((void)expected_ihp_time(bad, SimDuration{}), DataError);
}

TEST_CASE("expected_ihp_time is exact over random integer triples") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::int64_t> ns(0, 4'000'000'000'000LL);
  for (int i = 0; i < 1000; ++i) {
    std::int64_t total = ns(rng), io = ns(rng) % (total + 1), sim = ns(rng);
    IhpMeasurement m;
    m.t_total = SimDuration::from_ps(total * 1000);
    m.t_io = SimDuration::from_ps(io * 1000);
    const auto got = expected_ihp_time(m, SimDuration::from_ps(sim * 1000));
    CHECK(got.ps == (total - io + sim) * 1000);
  }
}

TEST_CASE("synth_trace: patterns, determinism, alignment") {
  const auto seq = synth_trace(TracePattern::SequentialRead, 65'536, 8192, 1);
  REQUIRE(seq.size() == 8);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].offset_bytes == static_cast<std::int64_t>(i) * 8192);
    CHECK(seq[i].op == IoOp::Read);
    CHECK(seq[i].issue_time_ns == 0);
  }

  const auto a = synth_trace(TracePattern::RandomRead, 1 << 20, 8192, 77);
  const auto b = synth_trace(TracePattern::RandomRead, 1 << 20, 8192, 77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].offset_bytes == b[i].offset_bytes);
    CHECK(a[i].offset_bytes % 8192 == 0);
    CHECK(a[i].offset_bytes + a[i].length_bytes <= (1 << 20));
  }

  const auto mixed = synth_trace(TracePattern::Mixed, 1 << 20, 8192, 3);
  bool has_read = false, has_write = false;
  for (const auto& r : mixed) {
    has_read |= r.op == IoOp::Read;
    has_write |= r.op == IoOp::Write;
  }
  CHECK(has_read);
  CHECK(has_write);

  CHECK_THROWS_AS((void)synth_trace(TracePattern::SequentialRead, 100, 8192, 1), ConfigError);
}

TEST_CASE("report writers include every field") {
  IhpMeasurement m;
  m.t_total = SimDuration::from_ms(100.0);
  m.t_io = SimDuration::from_ms(40.0);
  const auto report = make_ihp_report(m, reads_at_zero(2), make_config(2));
  CHECK(report.t_iosim.ps == 75'000'000);
  CHECK(report.t_nonio().ps == SimDuration::from_ms(60.0).ps);
  CHECK(report.expected.ps == SimDuration::from_ms(60.075).ps);

  std::ostringstream text, csv;
  write_ihp_report_text(report, text);
  write_ihp_report_csv(report, csv);
  CHECK(text.str().find("T_IOsim") != std::string::npos);
  CHECK(csv.str().find("t_total_ns,t_io_ns,t_nonio_ns,t_iosim_ns,expected_ihp_time_ns") == 0);
  CHECK(csv.str().find("75000") != std::string::npos);
}
