#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ispsim/commands.hpp"
#include "ispsim/errors.hpp"
#include "synthetic.hpp"

using namespace ispsim;
namespace ts = ispsim::testsupport;
namespace fs = std::filesystem;

namespace {

fs::path temp_root() {
  const auto dir = fs::temp_directory_path() / "ispsim_cmd_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// small 3-class dataset; input_dim 16 keeps the runs quick
RunConfig desk_config(const fs::path& root, const std::string& tag) {
  static ts::DatasetFiles train = ts::write_dataset(
      temp_root() / "data", "train", ts::random_samples(240, 16, 3, 1), 4, 4);
  static ts::DatasetFiles test = ts::write_dataset(
      temp_root() / "data", "test", ts::random_samples(60, 16, 3, 2), 4, 4);
  RunConfig cfg;
  cfg.algorithm = AlgorithmKind::Easgd;
  cfg.channels = 2;
  cfg.eta = 0.1;
  cfg.tau = 1;
  cfg.alpha = 0.01;
  cfg.seed = 5;
  cfg.train_images = train.images;
  cfg.train_labels = train.labels;
  cfg.test_images = test.images;
  cfg.test_labels = test.labels;
  cfg.page_size = 64;          // 3 samples per 17-byte record page... 64/17 = 3
  cfg.pages_per_block = 8;
  cfg.max_epochs = 3;
  cfg.eval_cadence_ns = 1'000'000;  // 1 ms
  cfg.out_dir = (root / tag).string();
  return cfg;
}

}  // namespace

TEST_CASE("config echo reloads to an identical echo") {
  RunConfig cfg = desk_config(temp_root(), "echo");
  cfg.deadline_ns = 123456;
  cfg.target_accuracy = 0.7;
  cfg.cost.read_overhead = SimDuration::from_ns(12.5);
  std::ostringstream first;
  write_config_echo(cfg, first);

  const auto path = temp_root() / "echo.cfg";
  std::ofstream(path) << first.str();
  const RunConfig reloaded = parse_config_file(path.string());
  std::ostringstream second;
  write_config_echo(reloaded, second);
  CHECK(first.str() == second.str());
}

TEST_CASE("config parser rejects unknown keys and bad values") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_config_line(cfg, "run.bogus", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_line(cfg, "run.eta", "fast"), ConfigError);
  CHECK_THROWS_AS(apply_config_line(cfg, "run.algorithm", "adam"), ConfigError);
  CHECK_NOTHROW(apply_config_line(cfg, "nand.t_read_us", "75"));
  CHECK(cfg.t_read_us == 75.0);

  const auto path = temp_root() / "bad.cfg";
  std::ofstream(path) << "run.eta 0.1\n";
  CHECK_THROWS_WITH_AS((void)parse_config_file(path.string()), doctest::Contains("key = value"),
                       ConfigError);
}

TEST_CASE("a run without any stop condition is a config error") {
  RunConfig cfg = desk_config(temp_root(), "nostop");
  cfg.max_epochs.reset();
  CHECK_THROWS_WITH_AS((void)cmd_run(cfg), doctest::Contains("stop condition"), ConfigError);
}

TEST_CASE("cmd_run writes the advertised files; repeat runs are byte-identical") {
  const auto root = temp_root();
  RunConfig cfg = desk_config(root, "det_a");
  const auto a = cmd_run(cfg);
  CHECK(fs::exists(a.out_dir / "metrics.csv"));
  CHECK(fs::exists(a.out_dir / "config.echo"));
  CHECK(fs::exists(a.out_dir / "summary.txt"));
  CHECK(fs::exists(a.out_dir / "convergence.svg"));
  CHECK_FALSE(a.log.records.empty());

  RunConfig cfg_b = cfg;
  cfg_b.out_dir = (root / "det_b").string();
  const auto b = cmd_run(cfg_b);
  CHECK(slurp(a.out_dir / "metrics.csv") == slurp(b.out_dir / "metrics.csv"));
  CHECK(slurp(a.out_dir / "convergence.svg") == slurp(b.out_dir / "convergence.svg"));
  CHECK(a.log == b.log);

  const std::string csv = slurp(a.out_dir / "metrics.csv");
  CHECK(csv.rfind("sim_time_ns,minibatches_done,test_accuracy,reads,pushes,bytes_transferred\n",
                  0) == 0);
}

TEST_CASE("deadline 0 produces a header-only CSV") {
  RunConfig cfg = desk_config(temp_root(), "deadline0");
  cfg.max_epochs.reset();
  cfg.deadline_ns = 0;
  const auto result = cmd_run(cfg);
  CHECK(result.log.records.empty());
  CHECK(slurp(result.out_dir / "metrics.csv") ==
        "sim_time_ns,minibatches_done,test_accuracy,reads,pushes,bytes_transferred\n");
}

TEST_CASE("missing dataset paths fail with a config error") {
  RunConfig cfg = desk_config(temp_root(), "missing");
  cfg.train_images.clear();
  CHECK_THROWS_AS((void)cmd_run(cfg), ConfigError);

  RunConfig cfg2 = desk_config(temp_root(), "gone");
  cfg2.train_images = "/nonexistent/file.idx";
  CHECK_THROWS_AS((void)cmd_run(cfg2), DataError);
}

TEST_CASE("event trace dump has `time seq target kind` lines") {
  RunConfig cfg = desk_config(temp_root(), "trace");
  cfg.max_epochs = 1;
  cfg.trace_path = (temp_root() / "events.trace").string();
  (void)cmd_run(cfg);
  std::ifstream in(cfg.trace_path);
  std::string line;
  REQUIRE(std::getline(in, line));
  std::istringstream ls(line);
  std::string time_field, seq, target, kind;
  REQUIRE((ls >> time_field >> seq >> target >> kind));
  CHECK((kind == "page_read_done" || kind == "msg_delivered" || kind == "compute_done" ||
         kind == "barrier_release" || kind == "eval_checkpoint"));
}

TEST_CASE("cmd_sweep: per-point dirs, combined CSV, thread-count independence") {
  const auto root = temp_root();
  RunConfig base = desk_config(root, "sweep1");
  base.target_accuracy = 0.05;  // trivially reachable; keeps the speedup table populated
  const auto run_with_threads = [&](const char* threads, const std::string& tag) {
    setenv("ISPSIM_THREADS", threads, 1);
    RunConfig b = base;
    b.out_dir = (root / tag).string();
    const auto sweep = cmd_sweep(b, "channels", {"1", "2"});
    unsetenv("ISPSIM_THREADS");
    return slurp(sweep.combined_csv);
  };
  const std::string serial = run_with_threads("1", "sweep_serial");
  const std::string parallel = run_with_threads("4", "sweep_parallel");
  CHECK(serial == parallel);
  CHECK(serial.rfind("axis_value,sim_time_ns,", 0) == 0);
  CHECK(fs::exists(root / "sweep_serial" / "channels_1" / "metrics.csv"));
  CHECK(fs::exists(root / "sweep_serial" / "channels_2" / "metrics.csv"));
  CHECK(fs::exists(root / "sweep_serial" / "sweep_summary.txt"));
}

TEST_CASE("cmd_sweep rejects bad axes, empty values, missing target") {
  RunConfig base = desk_config(temp_root(), "sweep_bad");
  base.target_accuracy = 0.5;
  CHECK_THROWS_AS((void)cmd_sweep(base, "voltage", {}), ConfigError);
  RunConfig no_target = base;
  no_target.target_accuracy.reset();
  CHECK_THROWS_AS((void)cmd_sweep(no_target, "channels", {"1"}), ConfigError);
}

TEST_CASE("cmd_compare_ihp reproduces the identity and worked examples") {
  const auto root = temp_root();
  const auto mfile = root / "measure.txt";
  const auto tfile = root / "trace.txt";
  std::ofstream(mfile) << "t_total_ns = 100000000000\nt_io_ns = 30000000000\n";
  std::ofstream(tfile) << "0 R 0 8192\n";
  RunConfig cfg;
  cfg.channels = 4;
  cfg.out_dir = (root / "ihp").string();
  const auto report = cmd_compare_ihp(mfile.string(), tfile.string(), cfg);
  CHECK(report.t_iosim.ps == 75'000'000);
  CHECK(report.expected.ps == (100'000'000'000LL - 30'000'000'000LL + 75'000LL) * 1000);
  CHECK(fs::exists(root / "ihp" / "report.txt"));
  CHECK(fs::exists(root / "ihp" / "report.csv"));

  std::ofstream(tfile) << "bogus line\n";
  CHECK_THROWS_WITH_AS((void)cmd_compare_ihp(mfile.string(), tfile.string(), cfg),
                       doctest::Contains(":1"), DataError);

  std::ofstream(mfile) << "t_total_ns = 5\n";
  std::ofstream(tfile) << "0 R 0 8192\n";
  CHECK_THROWS_AS((void)cmd_compare_ihp(mfile.string(), tfile.string(), cfg), DataError);
}

TEST_CASE("cmd_plot: determinism, legend order, schema checking") {
  const auto root = temp_root();
  RunConfig cfg = desk_config(root, "plotsrc");
  const auto run = cmd_run(cfg);
  const std::string csv = (run.out_dir / "metrics.csv").string();

  const auto svg_a = root / "a.svg";
  const auto svg_b = root / "b.svg";
  cmd_plot({csv, csv, csv}, svg_a.string(), "three series");
  cmd_plot({csv, csv, csv}, svg_b.string(), "three series");
  const std::string a = slurp(svg_a);
  CHECK(a == slurp(svg_b));
  CHECK(a.find("<polyline") != std::string::npos);
  // one legend label per input, in input order
  std::size_t count = 0, pos = 0;
  while ((pos = a.find(">metrics<", pos)) != std::string::npos) {
    ++count;
    pos += 1;
  }
  CHECK(count == 3);

  const auto bad = root / "bad.csv";
  std::ofstream(bad) << "time,acc\n1,2\n";
  CHECK_THROWS_WITH_AS(cmd_plot({bad.string()}, (root / "c.svg").string(), ""),
                       doctest::Contains("schema"), DataError);
  CHECK_THROWS_AS(cmd_plot({}, (root / "d.svg").string(), ""), ConfigError);
}

TEST_CASE("cmd_pack writes a manifest consistent with the dataset") {
  const auto root = temp_root();
  RunConfig cfg = desk_config(root, "pack");
  const auto result = cmd_pack(cfg, (root / "layout.manifest").string());
  CHECK(result.samples == 240);
  CHECK(result.samples_per_page == 64 / 17);
  CHECK(result.pages == (240 + result.samples_per_page - 1) / result.samples_per_page);
  const std::string manifest = slurp(root / "layout.manifest");
  std::istringstream in(manifest);
  std::string line;
  std::int64_t lines = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::int64_t a, b, c, d, e;
    REQUIRE((ls >> a >> b >> c >> d >> e));
    ++lines;
  }
  CHECK(lines == result.pages);
}
