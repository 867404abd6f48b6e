#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "clric/cli/app.hpp"
#include "clric/io/bitstream.hpp"
#include "clric/io/byte_io.hpp"
#include "clric/io/latent_file.hpp"
#include "clric/model/synthetic.hpp"
#include "clric/rng.hpp"

namespace clric {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "clric");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("clric_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv("CLRIC_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv("CLRIC_SEED");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small smooth latent, C=2, 16x24, from a 128x192 image.
  std::string small_latent(const std::string& name = "y.clrt") {
    const std::string p = path(name);
    const auto r = run_cli({"make-synthetic", "--out", p, "--channels", "2", "--height", "16", "--width", "24",
                            "--image-height", "128", "--image-width", "192", "--sigma", "3", "--seed", "5"});
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }

  RunResult encode(const std::string& latent, const std::string& out, const std::string& lambda,
                   std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"encode", "--latent", latent, "--out", out, "--lambda", lambda,
                                     "--preset", "smoke", "--iters", "100", "--quiet"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  }

  fs::path dir_;
};

std::vector<std::uint8_t> slurp(const std::string& p) { return io::read_file(p); }

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"encode", "--out", path("x.clrc")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"encode", "--latent", "a", "--out", "b", "--lambda", "-1"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"encode", "--latent", "a", "--out", "b", "--preset", "huge"}).code, cli::kExitUsage);
}

TEST_F(Cli, EncodeWritesBitstreamAndRunRecord) {
  const std::string y = small_latent();
  const RunResult r = encode(y, path("y.clrc"), "0.05", {"--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.j();
  EXPECT_EQ(j["schema_version"], cli::kJsonSchemaVersion);
  EXPECT_EQ(j["command"], "encode");
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["config"]["main_iterations"], 100);
  EXPECT_EQ(j["optimizer_steps"], 2 * 50 + 50 + 100);
  const auto bytes = slurp(path("y.clrc"));
  EXPECT_EQ(j["bytes"], bytes.size());
  EXPECT_GT(j["bpp"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j["bpp"].get<double>(), io::bits_per_pixel(bytes.size(), 128, 192));
  const double est = j["rate_estimate_bits"], actual = j["actual_bits"];
  EXPECT_LE(std::abs(est - actual), std::max(64.0, 0.01 * actual));
  for (const auto& [key, value] : j.items()) {
    if (value.is_number()) {
      EXPECT_TRUE(std::isfinite(value.get<double>())) << key;
    }
  }
  EXPECT_TRUE(r.err.empty());
}

TEST_F(Cli, DecodeReproducesTheEncoderReconstruction) {
  const std::string y = small_latent();
  const RunResult enc = encode(y, path("y.clrc"), "0.05", {"--recon-out", path("enc_rec.clrt")});
  ASSERT_EQ(enc.code, 0) << enc.err;
  const RunResult d1 = run_cli({"decode", "--in", path("y.clrc"), "--latent-out", path("rec1.clrt")});
  const RunResult d2 = run_cli({"decode", "--in", path("y.clrc"), "--latent-out", path("rec2.clrt")});
  ASSERT_EQ(d1.code, 0) << d1.err;
  ASSERT_EQ(d2.code, 0) << d2.err;
  EXPECT_EQ(d1.j()["yhat_fnv1a64"], enc.j()["yhat_fnv1a64"]);
  EXPECT_EQ(slurp(path("rec1.clrt")), slurp(path("rec2.clrt")));
  EXPECT_EQ(slurp(path("rec1.clrt")), slurp(path("enc_rec.clrt")));
  const LatentTensor rec = io::read_latent(path("rec1.clrt"));
  EXPECT_EQ(rec.image_height, 128);
  EXPECT_EQ(rec.image_width, 192);
  EXPECT_EQ(d1.j()["bpp"], enc.j()["bpp"]);
}

TEST_F(Cli, InspectPrintsTheHeader) {
  const std::string y = small_latent();
  ASSERT_EQ(encode(y, path("y.clrc"), "0.05").code, 0);
  const RunResult r = run_cli({"inspect", "--in", path("y.clrc")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json h = r.j()["header"];
  EXPECT_EQ(h["channels"], 2);
  EXPECT_EQ(h["latent_height"], 16);
  EXPECT_EQ(h["latent_width"], 24);
  EXPECT_EQ(h["num_grids"], 7);
  EXPECT_EQ(h["header_bytes"], io::BitstreamHeader::size_for(7));
  EXPECT_EQ(h["grid_bounds"].size(), 7u);
  EXPECT_EQ(h["segment_lengths"].size(), 10u);
  EXPECT_EQ(r.j()["bytes"], slurp(path("y.clrc")).size());
}

TEST_F(Cli, CorruptAndMissingInputsMapToExitCodes) {
  const std::string y = small_latent();
  ASSERT_EQ(encode(y, path("y.clrc"), "0.05").code, 0);
  auto bytes = slurp(path("y.clrc"));
  bytes.resize(bytes.size() - 3);
  io::write_file(path("cut.clrc"), bytes);
  EXPECT_EQ(run_cli({"decode", "--in", path("cut.clrc"), "--latent-out", path("r.clrt")}).code, cli::kExitCorrupt);
  EXPECT_FALSE(fs::exists(path("r.clrt")));
  EXPECT_EQ(run_cli({"inspect", "--in", path("cut.clrc")}).code, cli::kExitCorrupt);
  EXPECT_EQ(run_cli({"decode", "--in", y, "--latent-out", path("r.clrt")}).code, cli::kExitCorrupt);  // wrong magic
  EXPECT_EQ(run_cli({"decode", "--in", path("none.clrc"), "--latent-out", path("r.clrt")}).code, cli::kExitUsage);

  const RunResult missing = encode(path("none.clrt"), path("out.clrc"), "0.05");
  EXPECT_EQ(missing.code, cli::kExitUsage);
  EXPECT_FALSE(fs::exists(path("out.clrc")));
  EXPECT_FALSE(missing.err.empty());
}

TEST_F(Cli, TrainingFailureIsExitFour) {
  LatentTensor t = make_smooth_latent(1, 8, 8, 2.0, 1, 64, 64);
  for (auto& v : t.values) v *= 1e30f;
  io::write_latent(path("huge.clrt"), t);
  EXPECT_EQ(encode(path("huge.clrt"), path("out.clrc"), "0.05").code, cli::kExitTraining);
  EXPECT_FALSE(fs::exists(path("out.clrc")));
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  const std::string y = small_latent();
  ASSERT_EQ(encode(y, path("flag.clrc"), "0.05", {"--seed", "17"}).code, 0);
  ::setenv("CLRIC_SEED", "17", 1);
  const RunResult env = encode(y, path("env.clrc"), "0.05");
  ASSERT_EQ(env.code, 0) << env.err;
  EXPECT_EQ(env.j()["seed"], 17);
  EXPECT_EQ(slurp(path("flag.clrc")), slurp(path("env.clrc")));
  ::setenv("CLRIC_SEED", "seventeen", 1);
  EXPECT_EQ(encode(y, path("bad.clrc"), "0.05").code, cli::kExitUsage);
}

TEST_F(Cli, ZeroLambdaIsTheHighestQualityPoint) {
  const std::string y = small_latent();
  const RunResult zero = encode(y, path("a.clrc"), "0", {"--seed", "1"});
  const RunResult high = encode(y, path("b.clrc"), "5", {"--seed", "1"});
  ASSERT_EQ(zero.code, 0) << zero.err;
  ASSERT_EQ(high.code, 0) << high.err;
  EXPECT_LE(zero.j()["latent_mse"].get<double>(), high.j()["latent_mse"].get<double>());
}

std::vector<std::vector<std::string>> read_csv(const std::string& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST_F(Cli, RdSweepCsvRoundTripsAndRepeatsDuplicates) {
  const std::string y = small_latent();
  const RunResult r = run_cli({"rd-sweep", "--latent", y, "--lambdas", "0.05,0.05,2", "--out", path("rd.csv"),
                               "--preset", "smoke", "--iters", "100", "--quiet", "--bitstream-dir", path("bits")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path("rd.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "bpp", "latent_mse", "bytes", "rate_estimate_bits", "status"}));
  const json runs = r.j()["runs"];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const json& run = runs[i - 1];
    EXPECT_EQ(std::stod(rows[i][0]), run["config"]["lambda"].get<double>());
    EXPECT_EQ(std::stod(rows[i][1]), run["bpp"].get<double>());
    EXPECT_EQ(std::stod(rows[i][2]), run["latent_mse"].get<double>());
    EXPECT_EQ(std::stoull(rows[i][3]), run["bytes"].get<std::uint64_t>());
    EXPECT_EQ(std::stod(rows[i][4]), run["rate_estimate_bits"].get<double>());
    EXPECT_EQ(rows[i][5], "ok");
    EXPECT_EQ(fs::file_size(path("bits/lambda_" + std::to_string(i - 1) + ".clrc")), run["bytes"].get<std::uint64_t>());
  }
  EXPECT_EQ(rows[1], rows[2]);
  EXPECT_EQ(slurp(path("bits/lambda_0.clrc")), slurp(path("bits/lambda_1.clrc")));
}

TEST_F(Cli, RdSweepRejectsBadLambdaLists) {
  const std::string y = small_latent();
  for (const char* list : {"0.1", "0.1,x", "0.1,-2", "0.1,,0.2", "0.1,nan"}) {
    EXPECT_EQ(run_cli({"rd-sweep", "--latent", y, "--lambdas", list, "--out", path("rd.csv")}).code, cli::kExitUsage)
        << list;
  }
  EXPECT_FALSE(fs::exists(path("rd.csv")));
}

TEST_F(Cli, RdSweepReportsFailedRows) {
  LatentTensor t = make_smooth_latent(1, 8, 8, 2.0, 1, 64, 64);
  for (auto& v : t.values) v *= 1e30f;
  io::write_latent(path("huge.clrt"), t);
  const RunResult r = run_cli({"rd-sweep", "--latent", path("huge.clrt"), "--lambdas", "0.1,0.2", "--out",
                               path("rd.csv"), "--preset", "smoke", "--iters", "10", "--quiet"});
  EXPECT_EQ(r.code, cli::kExitTraining);
  const auto rows = read_csv(path("rd.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].back(), "error");
  EXPECT_EQ(rows[2].back(), "error");
}

TEST_F(Cli, CountMacsBreakdownSumsToTotal) {
  const RunResult r = run_cli({"count-macs", "--image-height", "1363", "--image-width", "2048", "--latent-height",
                               "171", "--latent-width", "256"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = r.j()["mac_per_pixel"];
  const double sum = m["arm"].get<double>() + m["upsampler"].get<double>() + m["synthesis"].get<double>() +
                     m["fixed"].get<double>();
  EXPECT_NEAR(sum, m["total"].get<double>(), 1e-9);
  EXPECT_GE(m["total"].get<double>(), 20.0);
  EXPECT_LE(m["total"].get<double>(), 30.0);

  const RunResult wide = run_cli({"count-macs", "--hidden", "32"});
  const RunResult base = run_cli({"count-macs"});
  EXPECT_GT(wide.j()["mac_per_pixel"]["synthesis"].get<double>(), base.j()["mac_per_pixel"]["synthesis"].get<double>());
}

TEST_F(Cli, CountMacsReadsABitstreamHeader) {
  const std::string y = small_latent();
  ASSERT_EQ(encode(y, path("y.clrc"), "0.05").code, 0);
  const RunResult from_file = run_cli({"count-macs", "--in", path("y.clrc")});
  const RunResult from_flags = run_cli({"count-macs", "--channels", "2", "--latent-height", "16", "--latent-width",
                                        "24", "--image-height", "128", "--image-width", "192"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.j()["mac_per_pixel"], from_flags.j()["mac_per_pixel"]);
  EXPECT_EQ(run_cli({"count-macs", "--in", path("y.clrc"), "--hidden", "4"}).code, cli::kExitUsage);
}

TEST_F(Cli, EvalMetrics) {
  LatentTensor ref = make_smooth_latent(3, 6, 5, 1.0, 9, 48, 40);
  io::write_latent(path("ref.clrt"), ref);
  RunResult same = run_cli({"eval", "--ref", path("ref.clrt"), "--rec", path("ref.clrt")});
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_EQ(same.j()["latent_mse"], 0.0);
  EXPECT_EQ(same.j()["latent_psnr"], "inf");

  LatentTensor shifted = ref;
  for (auto& v : shifted.values) v += 1.0f;
  io::write_latent(path("shift.clrt"), shifted);
  const json s = run_cli({"eval", "--ref", path("ref.clrt"), "--rec", path("shift.clrt")}).j();
  EXPECT_NEAR(s["latent_mse"].get<double>(), 1.0, 1e-6);

  // Independent computation on a random pair.
  LatentTensor noisy = ref;
  Rng rng(77);
  for (auto& v : noisy.values) v += static_cast<float>(rng.normal() * 0.3);
  io::write_latent(path("noisy.clrt"), noisy);
  const json n = run_cli({"eval", "--ref", path("ref.clrt"), "--rec", path("noisy.clrt")}).j();
  long double total = 0, lo = ref.values[0], hi = ref.values[0];
  std::vector<long double> per(3, 0);
  for (std::size_t i = 0; i < ref.values.size(); ++i) {
    const long double d = static_cast<long double>(ref.values[i]) - noisy.values[i];
    total += d * d;
    per[i / 30] += d * d;
    lo = std::min<long double>(lo, ref.values[i]);
    hi = std::max<long double>(hi, ref.values[i]);
  }
  const long double mse = total / ref.values.size();
  EXPECT_NEAR(n["latent_mse"].get<double>(), static_cast<double>(mse), 1e-6);
  EXPECT_NEAR(n["latent_psnr"].get<double>(), static_cast<double>(10 * std::log10((hi - lo) * (hi - lo) / mse)), 1e-6);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(n["per_channel_mse"][c].get<double>(), static_cast<double>(per[c] / 30), 1e-6);

  io::write_latent(path("other.clrt"), make_smooth_latent(2, 6, 5, 1.0, 9, 48, 40));
  EXPECT_EQ(run_cli({"eval", "--ref", path("ref.clrt"), "--rec", path("other.clrt")}).code, cli::kExitUsage);
}

TEST_F(Cli, MakeSyntheticDefaultIsTheReferenceLatent) {
  const RunResult r = run_cli({"make-synthetic", "--out", path("ref.clrt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("ref.clrt")), io::encode_latent(make_reference_latent()));
  const LatentTensor t = io::read_latent(path("ref.clrt"));
  EXPECT_EQ(t.channels, 4);
  EXPECT_EQ(t.height, 64);
  EXPECT_EQ(t.width, 96);
  EXPECT_EQ(t.image_height, 512);
  EXPECT_EQ(t.image_width, 768);
}

TEST(Fnv1a64, KnownValues) {
  EXPECT_EQ(cli::fnv1a64({}), 0xCBF29CE484222325ull);
  // Bytes 00 00 80 3F, hashed by hand with the 64-bit FNV-1a constants.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::uint8_t b : {0x00, 0x00, 0x80, 0x3F}) h = (h ^ b) * 0x100000001B3ull;
  const float one = 1.0f;
  EXPECT_EQ(cli::fnv1a64(std::span(&one, 1)), h);
}

}  // namespace
}  // namespace clric
