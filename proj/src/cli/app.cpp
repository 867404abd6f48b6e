#include "clric/cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clric/error.hpp"
#include "clric/io/bitstream.hpp"
#include "clric/io/byte_io.hpp"
#include "clric/io/latent_file.hpp"
#include "clric/model/complexity.hpp"
#include "clric/model/forward.hpp"
#include "clric/model/synthetic.hpp"
#include "clric/train/trainer.hpp"

namespace clric::cli {

using json = nlohmann::ordered_json;

namespace {

// Carries an exit code chosen by the command.
struct ExitError {
  int code;
  std::string message;
};

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::kTraining ? kExitTraining : kExitUsage;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("CLRIC_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t v = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  require(ec == std::errc() && ptr == end, ErrorKind::kUsage, std::string("CLRIC_SEED is not an integer: ") + env);
  return v;
}

io::ParsedBitstream load_bitstream(const std::string& path) {
  const auto bytes = io::read_file(path);
  try {
    return io::parse_bitstream(bytes);
  } catch (const Error& e) {
    throw ExitError{kExitCorrupt, path + ": " + e.what()};
  }
}

io::BitstreamHeader load_header(const std::string& path) {
  const auto bytes = io::read_file(path);
  try {
    return io::parse_header(bytes);
  } catch (const Error& e) {
    throw ExitError{kExitCorrupt, path + ": " + e.what()};
  }
}

double mean_squared_error(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

json number_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

json header_json(const io::BitstreamHeader& h) {
  json bounds = json::array();
  for (int k = 0; k < h.arch.num_grids; ++k) {
    bounds.push_back({{"grid", k}, {"min", h.grid_bounds[k].min}, {"max", h.grid_bounds[k].max}});
  }
  json scales = json::array();
  for (auto s : h.weight_scales) scales.push_back(s / 256.0);
  return {{"image_height", h.image_height},
          {"image_width", h.image_width},
          {"channels", h.channels},
          {"latent_height", h.latent_height},
          {"latent_width", h.latent_width},
          {"num_grids", h.arch.num_grids},
          {"architecture_id", h.arch.id},
          {"synthesis_hidden", h.arch.synthesis_hidden},
          {"step_exponents", h.step_exponents},
          {"weight_scales", scales},
          {"grid_bounds", bounds},
          {"segment_lengths", h.segment_lengths},
          {"header_bytes", h.size()},
          {"payload_bytes", h.payload_size()}};
}

json mac_json(const MacReport& m) {
  return {{"arm", m.per_pixel(m.arm)},
          {"upsampler", m.per_pixel(m.upsampler)},
          {"synthesis", m.per_pixel(m.synthesis)},
          {"fixed", m.per_pixel(m.fixed)},
          {"total", m.total_per_pixel()},
          {"total_macs", m.total},
          {"image_pixels", m.image_pixels}};
}

struct TrainFlags {
  std::string preset = "smoke";
  double lambda = 0.0;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool quiet = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda, "rate weight (>= 0)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--preset", preset, "training budget: smoke or paper")->check(CLI::IsMember({"smoke", "paper"}));
    cmd->add_option("--iters", iters, "main-phase iterations (overrides the preset)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "run seed (default: $CLRIC_SEED, else 0)");
    cmd->add_option("--threads", threads, "candidates trained concurrently")->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet", quiet, "no progress on stderr");
  }

  train::RdConfig config(double lam) const {
    train::RdConfig c = train::preset_by_name(preset);
    c.lambda = lam;
    c.seed = resolve_seed(seed);
    c.threads = threads;
    if (iters) {
      c.main_iters = *iters;
      c.hard_quant_tail = std::min(c.hard_quant_tail, c.main_iters);
      c.total_iterations = static_cast<int>(c.scheduled_steps());
    }
    return c;
  }
};

json config_json(const train::RdConfig& c, const std::string& preset) {
  return {{"preset", preset},
          {"lambda", c.lambda},
          {"seed", c.seed},
          {"total_iterations", c.total_iterations},
          {"warmup", {{"candidates", c.warmup_candidates}, {"iterations", c.warmup_iters}}},
          {"finalists", {{"count", c.finalist_count}, {"iterations", c.finalist_iters}}},
          {"main_iterations", c.main_iters},
          {"hard_quant_tail", c.hard_quant_tail},
          {"initial_lr", c.initial_lr},
          {"threads", c.threads},
          {"num_grids", c.arch.num_grids},
          {"synthesis_hidden", c.arch.synthesis_hidden}};
}

json run_record(const train::TrainingResult& r, const train::RdConfig& c, const std::string& preset) {
  const auto& rep = r.report;
  const std::size_t bytes = r.bitstream.bytes.size();
  return {{"schema_version", kJsonSchemaVersion},
          {"command", "encode"},
          {"config", config_json(c, preset)},
          {"seed", c.seed},
          {"bytes", bytes},
          {"bpp", rep.bpp},
          {"latent_mse", rep.distortion},
          {"rate_estimate_bits", rep.estimate_bits},
          {"actual_bits", rep.file_bits},
          {"grid_bits", rep.grid_payload_bits},
          {"weight_bits", rep.weight_payload_bits},
          {"step_exponents", rep.step_exponents},
          {"optimizer_steps", rep.optimizer_steps},
          {"chosen_candidate", rep.chosen_candidate},
          {"initial_loss", rep.initial_loss},
          {"final_loss", rep.final_loss},
          {"clamped_symbols", rep.clamped_symbols},
          {"yhat_fnv1a64", hex64(fnv1a64(r.reconstruction))},
          {"wall_seconds", rep.wall_seconds}};
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && !item.empty() && std::isfinite(v) && v >= 0.0, ErrorKind::kUsage,
            "bad lambda '" + item + "'");
    out.push_back(v);
  }
  require(out.size() >= 2, ErrorKind::kUsage, "rd-sweep needs at least two lambda values");
  return out;
}

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

}  // namespace

std::uint64_t fnv1a64(std::span<const float> values) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
  return h;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-image overfitted latent codec"};
  app.name("clric");
  app.require_subcommand(1);

  // encode
  auto* encode = app.add_subcommand("encode", "fit a latent and write a bitstream");
  std::string latent_path, out_path, recon_path;
  TrainFlags flags;
  encode->add_option("--latent", latent_path, "input .clrt")->required();
  encode->add_option("--out", out_path, "output .clrc")->required();
  encode->add_option("--recon-out", recon_path, "also write the decoded latent (.clrt)");
  flags.add_to(encode);

  // decode
  auto* decode = app.add_subcommand("decode", "reconstruct a latent from a bitstream");
  std::string in_path, latent_out;
  decode->add_option("--in", in_path, "input .clrc")->required();
  decode->add_option("--latent-out", latent_out, "output .clrt")->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print a bitstream header");
  std::string inspect_path;
  inspect->add_option("--in", inspect_path, "input .clrc")->required();

  // rd-sweep
  auto* sweep = app.add_subcommand("rd-sweep", "encode one latent at several lambdas");
  std::string sweep_latent, sweep_out, lambdas_text, sweep_dir;
  TrainFlags sweep_flags;
  sweep->add_option("--latent", sweep_latent, "input .clrt")->required();
  sweep->add_option("--lambdas", lambdas_text, "comma-separated lambda values")->required();
  sweep->add_option("--out", sweep_out, "output CSV")->required();
  sweep->add_option("--bitstream-dir", sweep_dir, "keep each bitstream here as lambda_<i>.clrc");
  sweep_flags.add_to(sweep);
  sweep->remove_option(sweep->get_option("--lambda"));

  // count-macs
  auto* macs = app.add_subcommand("count-macs", "analytic decoder MAC/pixel");
  std::string macs_in;
  ArchitectureConfig macs_arch;
  int macs_c = 4, macs_lh = 64, macs_lw = 96, macs_ih = 512, macs_iw = 768;
  auto* macs_in_opt = macs->add_option("--in", macs_in, "take every extent from a .clrc header");
  std::vector<CLI::Option*> macs_cfg = {
      macs->add_option("--channels", macs_c, "latent channels")->check(CLI::PositiveNumber),
      macs->add_option("--latent-height", macs_lh)->check(CLI::PositiveNumber),
      macs->add_option("--latent-width", macs_lw)->check(CLI::PositiveNumber),
      macs->add_option("--image-height", macs_ih)->check(CLI::PositiveNumber),
      macs->add_option("--image-width", macs_iw)->check(CLI::PositiveNumber),
      macs->add_option("--grids", macs_arch.num_grids)->check(CLI::PositiveNumber),
      macs->add_option("--hidden", macs_arch.synthesis_hidden, "synthesis width")->check(CLI::PositiveNumber)};
  for (auto* o : macs_cfg) o->excludes(macs_in_opt);

  // eval
  auto* eval = app.add_subcommand("eval", "compare two latent files");
  std::string ref_path, rec_path;
  eval->add_option("--ref", ref_path, "reference .clrt")->required();
  eval->add_option("--rec", rec_path, "reconstruction .clrt")->required();

  // make-synthetic
  auto* synth = app.add_subcommand("make-synthetic", "write a smooth Gaussian-field latent");
  std::string synth_out;
  int s_c = 4, s_h = 64, s_w = 96, s_ih = 512, s_iw = 768;
  double s_sigma = 8.0;
  std::uint64_t s_seed = 2024;
  synth->add_option("--out", synth_out, "output .clrt")->required();
  synth->add_option("--channels", s_c)->check(CLI::PositiveNumber);
  synth->add_option("--height", s_h)->check(CLI::PositiveNumber);
  synth->add_option("--width", s_w)->check(CLI::PositiveNumber);
  synth->add_option("--image-height", s_ih)->check(CLI::PositiveNumber);
  synth->add_option("--image-width", s_iw)->check(CLI::PositiveNumber);
  synth->add_option("--sigma", s_sigma, "blur standard deviation in latent pixels")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", s_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*encode) {
      const LatentTensor y = io::read_latent(latent_path);
      const train::RdConfig config = flags.config(flags.lambda);
      train::ProgressFn progress;
      if (!flags.quiet) progress = [&](const std::string& m) { err << "[encode] " << m << "\n"; };
      const train::TrainingResult r = train::train(y, config, progress);
      io::write_file(out_path, r.bitstream.bytes);
      if (!recon_path.empty()) {
        LatentTensor rec = y;
        rec.values = r.reconstruction;
        io::write_latent(recon_path, rec);
      }
      out << run_record(r, config, flags.preset).dump(2) << "\n";
    } else if (*decode) {
      const io::ParsedBitstream p = load_bitstream(in_path);
      LatentTensor rec;
      rec.channels = p.header.channels;
      rec.height = p.header.latent_height;
      rec.width = p.header.latent_width;
      rec.image_height = p.header.image_height;
      rec.image_width = p.header.image_width;
      rec.values = decode_latent(p.params);
      io::write_latent(latent_out, rec);
      const std::uint64_t bytes = p.header.size() + p.header.payload_size();
      out << json{{"schema_version", kJsonSchemaVersion},
                  {"command", "decode"},
                  {"bytes", bytes},
                  {"bpp", io::bits_per_pixel(bytes, rec.image_height, rec.image_width)},
                  {"yhat_fnv1a64", hex64(fnv1a64(rec.values))}}
                 .dump(2)
          << "\n";
    } else if (*inspect) {
      const io::BitstreamHeader h = load_header(inspect_path);
      const std::uint64_t bytes = h.size() + h.payload_size();
      json j = {{"schema_version", kJsonSchemaVersion}, {"command", "inspect"}};
      j["header"] = header_json(h);
      j["bytes"] = bytes;
      j["bpp"] = io::bits_per_pixel(bytes, h.image_height, h.image_width);
      out << j.dump(2) << "\n";
    } else if (*sweep) {
      const LatentTensor y = io::read_latent(sweep_latent);
      const auto lambdas = parse_lambdas(lambdas_text);
      if (!sweep_dir.empty()) std::filesystem::create_directories(sweep_dir);
      std::ostringstream csv;
      csv << "lambda,bpp,latent_mse,bytes,rate_estimate_bits,status\n";
      json rows = json::array();
      bool any_failed = false;
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const train::RdConfig config = sweep_flags.config(lambdas[i]);
        try {
          train::ProgressFn progress;
          if (!sweep_flags.quiet) {
            progress = [&](const std::string& m) { err << "[rd-sweep " << i << "] " << m << "\n"; };
          }
          const auto r = train::train(y, config, progress);
          if (!sweep_dir.empty()) {
            io::write_file(sweep_dir + "/lambda_" + std::to_string(i) + ".clrc", r.bitstream.bytes);
          }
          csv << csv_number(lambdas[i]) << "," << csv_number(r.report.bpp) << "," << csv_number(r.report.distortion)
              << "," << r.bitstream.bytes.size() << "," << csv_number(r.report.estimate_bits) << ",ok\n";
          rows.push_back(run_record(r, config, sweep_flags.preset));
        } catch (const Error& e) {
          any_failed = true;
          err << "clric: lambda " << lambdas[i] << ": " << e.what() << "\n";
          csv << csv_number(lambdas[i]) << ",,,,,error\n";
          rows.push_back({{"lambda", lambdas[i]}, {"status", "error"}, {"error", e.what()}});
        }
      }
      const std::string text = csv.str();
      io::write_file(sweep_out, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
      out << json{{"schema_version", kJsonSchemaVersion}, {"command", "rd-sweep"}, {"csv", sweep_out}, {"runs", rows}}
                 .dump(2)
          << "\n";
      if (any_failed) return kExitTraining;
    } else if (*macs) {
      if (!macs_in.empty()) {
        const io::BitstreamHeader h = load_header(macs_in);
        macs_arch = h.arch;
        macs_c = h.channels;
        macs_lh = h.latent_height;
        macs_lw = h.latent_width;
        macs_ih = h.image_height;
        macs_iw = h.image_width;
      }
      const MacReport m = count_macs(macs_arch, macs_lh, macs_lw, macs_c, macs_ih, macs_iw);
      out << json{{"schema_version", kJsonSchemaVersion},
                  {"command", "count-macs"},
                  {"latent", {macs_c, macs_lh, macs_lw}},
                  {"image", {macs_ih, macs_iw}},
                  {"num_grids", macs_arch.num_grids},
                  {"synthesis_hidden", macs_arch.synthesis_hidden},
                  {"mac_per_pixel", mac_json(m)}}
                 .dump(2)
          << "\n";
    } else if (*eval) {
      const LatentTensor ref = io::read_latent(ref_path);
      const LatentTensor rec = io::read_latent(rec_path);
      require(ref.channels == rec.channels && ref.height == rec.height && ref.width == rec.width,
              ErrorKind::kUsage, "latent shapes differ");
      const double mse = mean_squared_error(ref.values, rec.values);
      const auto [lo, hi] = std::minmax_element(ref.values.begin(), ref.values.end());
      const double peak = static_cast<double>(*hi) - *lo;
      const double psnr = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(peak * peak / mse);
      json per_channel = json::array();
      const std::size_t plane = static_cast<std::size_t>(ref.height) * ref.width;
      for (int c = 0; c < ref.channels; ++c) {
        per_channel.push_back(mean_squared_error(std::span(ref.values).subspan(c * plane, plane),
                                                 std::span(rec.values).subspan(c * plane, plane)));
      }
      out << json{{"schema_version", kJsonSchemaVersion},
                  {"command", "eval"},
                  {"latent_mse", mse},
                  {"latent_psnr", number_or_inf(psnr)},
                  {"peak", peak},
                  {"per_channel_mse", per_channel}}
                 .dump(2)
          << "\n";
    } else if (*synth) {
      const LatentTensor t = make_smooth_latent(s_c, s_h, s_w, s_sigma, s_seed, s_ih, s_iw);
      io::write_latent(synth_out, t);
      out << json{{"schema_version", kJsonSchemaVersion},
                  {"command", "make-synthetic"},
                  {"out", synth_out},
                  {"shape", {s_c, s_h, s_w}},
                  {"image", {s_ih, s_iw}},
                  {"sigma", s_sigma},
                  {"seed", s_seed}}
                 .dump(2)
          << "\n";
    }
  } catch (const ExitError& e) {
    err << "clric: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "clric: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "clric: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace clric::cli
