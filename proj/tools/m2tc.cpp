// Copyright 2026 The m2tc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// m2tc command line: schedule/qlds/layout inspection, toy training,
// encode/decode, sampling, schedule sweeps and MT-vs-M2T benchmarks.
// Exit codes: 0 ok, 2 usage, 3 file/format error, 4 contract violation.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "m2t/coder.hpp"
#include "m2t/net_io.hpp"
#include "m2t/qlds.hpp"
#include "m2t/synth.hpp"
#include "m2t/trainer.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Model math runs in double end to end; checkpoints store doubles, so the
// encoder and decoder see identical parameters.
using Model = m2t::ModelState<double>;

struct ModelFlags {
  std::string checkpoint;
  int w_t = 16;
  int channels = 2;
  int layers = 4;
  int width = 64;
  int mlp_hidden = 256;
  int heads = 4;
  int n_mix = 3;
  uint64_t init_seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--model", checkpoint, "checkpoint file (else a seeded default-init model)");
    app->add_option("--w_T", w_t, "tile side in tokens");
    app->add_option("--c", channels, "token channels");
    app->add_option("--layers", layers, "transformer layers");
    app->add_option("--width", width, "model width");
    app->add_option("--mlp", mlp_hidden, "mlp hidden dimension");
    app->add_option("--heads", heads, "attention heads");
    app->add_option("--n-mix", n_mix, "mixture components");
    app->add_option("--init-seed", init_seed, "seed for the default-init model");
  }

  Model load() const {
    if (!checkpoint.empty()) return m2t::load_checkpoint<double>(checkpoint);
    m2t::ModelConfig cfg;
    cfg.w_t = w_t;
    cfg.channels = channels;
    cfg.layers = layers;
    cfg.width = width;
    cfg.mlp_hidden = mlp_hidden;
    cfg.heads = heads;
    cfg.n_mix = n_mix;
    return m2t::init_model<double>(cfg, init_seed);
  }
};

struct ScheduleFlags {
  int steps = 12;
  double alpha = 2.2;
  std::string kind = "qlds";
  uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--steps", steps, "schedule steps S");
    app->add_option("--alpha", alpha, "power schedule exponent");
    app->add_option("--kind", kind, "location schedule: random|entropy|qlds");
    app->add_option("--seed", seed, "schedule seed (random kind)");
  }

  m2t::ScheduleKind kind_enum() const { return m2t::schedule_kind_from_name(kind); }
  uint32_t alpha_milli() const {
    return static_cast<uint32_t>(std::lround(alpha * 1000.0));
  }
};

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw m2t::FormatError("cannot open for writing: " + path);
  return file;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_gen(int h, int w, int c, uint64_t seed, double rho, double amp,
            int clamp, const std::string& out) {
  m2t::GaussMarkovSource src(h, w, c, seed, rho, amp, clamp);
  m2t::write_grid(src.next(), out);
  return 0;
}

int cmd_schedule(const ScheduleFlags& sf, int w_t, const std::string& out_path) {
  m2t::MaskSchedule s = m2t::make_schedule(sf.kind_enum(), sf.steps, sf.alpha,
                                           w_t, sf.seed);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "step,size,cumulative,positions\n";
  for (int i = 0; i < s.steps; ++i) {
    out << (i + 1) << ',' << s.groups.sizes[static_cast<size_t>(i)] << ','
        << s.groups.cumulative[static_cast<size_t>(i)] << ',';
    if (s.has_static_masks()) {
      const auto& m = s.masks[static_cast<size_t>(i)];
      for (size_t j = 0; j < m.size(); ++j) out << (j ? " " : "") << m[j];
    } else {
      out << "(resolved at coding time)";
    }
    out << '\n';
  }
  out << "\n# cumulative uncover curve\nstep,fraction\n";
  for (int i = 0; i < s.steps; ++i) {
    out << (i + 1) << ','
        << static_cast<double>(s.groups.cumulative[static_cast<size_t>(i)]) / s.total()
        << '\n';
  }
  return 0;
}

int cmd_qlds(int w_t, const std::string& prefixes_csv, const std::string& out_path) {
  m2t::QldsOrder o = m2t::qlds_order(w_t);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "# raw points consumed: " << o.consumed << "\n";
  out << "rank,row,col\n";
  for (size_t i = 0; i < o.cells.size(); ++i) {
    out << i << ',' << o.cells[i] / w_t << ',' << o.cells[i] % w_t << '\n';
  }
  std::vector<int> prefixes = parse_int_list(prefixes_csv);
  for (int prefix : prefixes) {
    if (prefix < 0 || prefix > w_t * w_t) continue;
    out << "\n# coverage after " << prefix << " cells\n";
    std::vector<char> mark(static_cast<size_t>(w_t) * w_t, 0);
    for (int i = 0; i < prefix; ++i) mark[static_cast<size_t>(o.cells[static_cast<size_t>(i)])] = 1;
    for (int r = 0; r < w_t; ++r) {
      for (int col = 0; col < w_t; ++col) {
        out << (mark[static_cast<size_t>(r) * w_t + col] ? 'x' : '.');
      }
      out << '\n';
    }
  }
  return 0;
}

int cmd_layout(const ScheduleFlags& sf, int w_t, const std::string& out_path) {
  m2t::MaskSchedule s = m2t::make_schedule(sf.kind_enum(), sf.steps, sf.alpha,
                                           w_t, sf.seed);
  m2t::M2TLayout lay = m2t::build_layout(s);
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "slot,group,input,pos_index,target\n";
  for (int j = 0; j < lay.total(); ++j) {
    out << j << ',' << lay.group_of_slot[static_cast<size_t>(j)] << ',';
    int fed = lay.input_token_pos[static_cast<size_t>(j)];
    if (fed == m2t::kMaskPad) {
      out << "PAD";
    } else {
      out << fed;
    }
    out << ',' << lay.pos_index[static_cast<size_t>(j)] << ','
        << lay.target_perm[static_cast<size_t>(j)] << '\n';
  }
  out << "\n# attention mask (rows attend to columns marked x)\n";
  m2t::AttnMask a = lay.attention_mask();
  for (int p = 0; p < lay.total(); ++p) {
    for (int q = 0; q < lay.total(); ++q) out << (a(p, q) ? 'x' : '.');
    out << '\n';
  }
  return 0;
}

int cmd_train(const ModelFlags& mf, const ScheduleFlags& sf,
              const std::string& mode, int steps, int batch, double lr,
              uint64_t seed, double rho, double amp, const std::string& out_model) {
  Model model = mf.load();
  m2t::GaussMarkovSource src(model.config.w_t, model.config.w_t,
                             model.config.channels, seed + 1000, rho, amp);
  m2t::TrainOptions opt;
  opt.mode = mode == "mt" ? m2t::TrainMode::kMt : m2t::TrainMode::kM2t;
  if (opt.mode == m2t::TrainMode::kM2t) {
    opt.schedule = m2t::make_schedule(sf.kind_enum(), sf.steps, sf.alpha,
                                      model.config.w_t, sf.seed);
  }
  opt.steps = steps;
  opt.batch = batch;
  opt.lr = lr;
  opt.seed = seed;
  std::cout << "step,bits_per_symbol\n";
  opt.on_log = [](int step, double loss) {
    std::cout << step << ',' << loss << std::endl;
  };
  m2t::train(model, src, opt);
  if (!out_model.empty()) m2t::save_checkpoint(model, out_model);
  return 0;
}

void print_report(const char* phase, const m2t::CodeStats& stats,
                  uint64_t grid_tokens, int steps, const ScheduleFlags& sf,
                  double wall_ms) {
  std::cout << "metric,value\n";
  std::cout << "phase," << phase << '\n';
  std::cout << "steps," << steps << '\n';
  std::cout << "alpha," << sf.alpha << '\n';
  std::cout << "kind," << sf.kind << '\n';
  std::cout << "coded_bits," << 8 * stats.payload_bytes << '\n';
  std::cout << "nll_bits," << stats.nll_bits << '\n';
  std::cout << "bits_per_token,"
            << static_cast<double>(8 * stats.payload_bytes) / static_cast<double>(grid_tokens)
            << '\n';
  std::cout << "model_tokens," << stats.model_tokens << '\n';
  std::cout << "sched_tokens," << stats.sched_tokens << '\n';
  std::cout << "wall_ms," << wall_ms << '\n';
}

int cmd_encode(const ModelFlags& mf, const ScheduleFlags& sf,
               const std::string& in_path, const std::string& out_path,
               const std::string& path_name, int precision, int threads) {
  Model model = mf.load();
  m2t::TokenGrid grid = m2t::read_grid(in_path);
  m2t::CodecParams p;
  p.path = m2t::path_mode_from_name(path_name);
  p.kind = sf.kind_enum();
  p.steps = sf.steps;
  p.alpha_milli = sf.alpha_milli();
  p.seed = sf.seed;
  p.precision = precision;
  p.threads = threads;
  Clock::time_point t0 = Clock::now();
  m2t::EncodedGrid enc = m2t::encode_grid(grid, model, p);
  double wall = ms_since(t0);
  std::vector<uint8_t> bytes = m2t::serialize_bitstream(enc.header, enc.payloads);
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw m2t::FormatError("cannot open for writing: " + out_path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  print_report("encode", enc.stats,
               static_cast<uint64_t>(grid.h) * static_cast<uint64_t>(grid.w),
               sf.steps, sf, wall);
  return 0;
}

int cmd_decode(const ModelFlags& mf, const std::string& in_path,
               const std::string& out_path, const std::string& path_name,
               int precision, int threads) {
  Model model = mf.load();
  std::ifstream f(in_path, std::ios::binary);
  if (!f) throw m2t::FormatError("cannot open: " + in_path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  m2t::BitstreamHeader header;
  std::vector<std::vector<uint8_t>> payloads;
  m2t::parse_bitstream(bytes, &header, &payloads);
  m2t::CodeStats stats;
  Clock::time_point t0 = Clock::now();
  m2t::TokenGrid grid = m2t::decode_grid(header, payloads, model,
                                         m2t::path_mode_from_name(path_name),
                                         precision, threads, &stats);
  double wall = ms_since(t0);
  m2t::write_grid(grid, out_path);
  ScheduleFlags sf;
  sf.steps = header.steps;
  sf.alpha = header.alpha();
  sf.kind = m2t::schedule_kind_name(header.kind);
  print_report("decode", stats,
               static_cast<uint64_t>(grid.h) * static_cast<uint64_t>(grid.w),
               header.steps, sf, wall);
  return 0;
}

int cmd_sample(const ModelFlags& mf, const ScheduleFlags& sf,
               const std::string& in_path, int n_samples, uint64_t sample_seed,
               const std::string& out_path) {
  Model model = mf.load();
  m2t::TokenGrid grid = m2t::read_grid(in_path);
  m2t::TileSet tiles = m2t::tile(grid, model.config.w_t);
  auto tokens = m2t::tokens_of_tile(tiles.tiles[0]);
  const int n = model.config.tokens();
  m2t::MaskSchedule sched = m2t::make_schedule(sf.kind_enum(), sf.steps,
                                               sf.alpha, model.config.w_t, sf.seed);
  m2t::check_contract(sched.has_static_masks(),
                      "sample: entropy schedules are not supported here");
  int16_t lo16, hi16;
  m2t::detail::symbol_range(tiles.tiles[0], &lo16, &hi16);
  const int lo = lo16, hi = hi16;

  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "step,known_tokens,known_nll_bits,row,col,ch,mean\n";
  std::vector<char> known(static_cast<size_t>(n), 0);
  m2t::SplitMix64 rng(sample_seed);
  double cum_bits = 0.0;
  int known_count = 0;
  for (int step = 0; step <= sched.steps; ++step) {
    if (step > 0) {
      // Price the group transmitted at this step with the PMFs the MT coder
      // would use, then uncover it.
      std::vector<m2t::TokenSlot<double>> slots;
      for (int p = 0; p < n; ++p) {
        slots.push_back(known[static_cast<size_t>(p)]
                            ? m2t::token_slot<double>(tokens[static_cast<size_t>(p)], p)
                            : m2t::masked_slot<double>(p));
      }
      auto params = m2t::forward_masked(model, slots, nullptr);
      const std::vector<int>& group = sched.masks[static_cast<size_t>(step - 1)];
      cum_bits += m2t::nll_mt_bits(tokens, group, params);
      for (int p : group) known[static_cast<size_t>(p)] = 1;
      known_count += static_cast<int>(group.size());
    }
    // Mean over samples of the remaining tokens given the known ones.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(model.config.channels, n);
    for (int s = 0; s < n_samples; ++s) {
      auto sample = m2t::sample_completion(model, tokens, known, lo, hi, rng);
      for (int p = 0; p < n; ++p) {
        for (int ch = 0; ch < model.config.channels; ++ch) {
          acc(ch, p) += sample[static_cast<size_t>(p)][static_cast<size_t>(ch)];
        }
      }
    }
    acc /= n_samples;
    for (int p = 0; p < n; ++p) {
      for (int ch = 0; ch < model.config.channels; ++ch) {
        out << step << ',' << known_count << ',' << cum_bits << ','
            << p / model.config.w_t << ',' << p % model.config.w_t << ',' << ch
            << ',' << acc(ch, p) << '\n';
      }
    }
  }
  return 0;
}

int cmd_sweep(const ModelFlags& mf, const std::string& grids_csv, int gen_grids,
              int gen_h, int gen_w, uint64_t gen_seed, const std::string& alphas_csv,
              const std::string& steps_csv, const std::string& kinds_csv,
              const std::string& path_name, int precision, int threads,
              const std::string& out_path) {
  Model model = mf.load();
  std::vector<m2t::TokenGrid> grids;
  for (const std::string& path : parse_string_list(grids_csv)) {
    grids.push_back(m2t::read_grid(path));
  }
  for (int i = 0; i < gen_grids; ++i) {
    m2t::GaussMarkovSource src(gen_h, gen_w, model.config.channels,
                               gen_seed + static_cast<uint64_t>(i));
    grids.push_back(src.next());
  }
  m2t::check_contract(!grids.empty(), "sweep: no grids (use --grids or --gen-grids)");

  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "alpha,steps,kind,path,bits_per_token,nll_bits_per_token,coded_bits,tokens\n";
  m2t::PathMode path = m2t::path_mode_from_name(path_name);
  for (double alpha : parse_double_list(alphas_csv)) {
    for (int steps : parse_int_list(steps_csv)) {
      for (const std::string& kind : parse_string_list(kinds_csv)) {
        uint64_t coded_bits = 0;
        double nll_bits = 0.0;
        uint64_t tokens = 0;
        for (const m2t::TokenGrid& grid : grids) {
          m2t::CodecParams p;
          p.path = path;
          p.kind = m2t::schedule_kind_from_name(kind);
          p.steps = steps;
          p.alpha_milli = static_cast<uint32_t>(std::lround(alpha * 1000.0));
          p.seed = 9;
          p.precision = precision;
          p.threads = threads;
          m2t::EncodedGrid enc = m2t::encode_grid(grid, model, p);
          coded_bits += 8 * enc.stats.payload_bytes;
          nll_bits += enc.stats.nll_bits;
          tokens += static_cast<uint64_t>(grid.h) * static_cast<uint64_t>(grid.w);
        }
        out << alpha << ',' << steps << ',' << kind << ',' << path_name << ','
            << static_cast<double>(coded_bits) / static_cast<double>(tokens) << ','
            << nll_bits / static_cast<double>(tokens) << ',' << coded_bits << ','
            << tokens << '\n';
      }
    }
  }
  return 0;
}

int cmd_bench(const ModelFlags& mf, const ScheduleFlags& sf,
              const std::string& grid_path, int gen_h, int gen_w,
              uint64_t gen_seed, const std::string& steps_csv, int precision,
              const std::string& out_path) {
  Model model = mf.load();
  m2t::TokenGrid grid;
  if (!grid_path.empty()) {
    grid = m2t::read_grid(grid_path);
  } else {
    m2t::GaussMarkovSource src(gen_h, gen_w, model.config.channels, gen_seed);
    grid = src.next();
  }
  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  out << "steps,path,encode_ms,decode_ms,model_tokens,sched_tokens,coded_bits\n";
  for (int steps : parse_int_list(steps_csv)) {
    for (auto path : {m2t::PathMode::kMt, m2t::PathMode::kM2t}) {
      m2t::CodecParams p;
      p.path = path;
      p.kind = sf.kind_enum();
      p.steps = steps;
      p.alpha_milli = sf.alpha_milli();
      p.seed = sf.seed;
      p.precision = precision;
      Clock::time_point t0 = Clock::now();
      m2t::EncodedGrid enc = m2t::encode_grid(grid, model, p);
      double enc_ms = ms_since(t0);
      m2t::CodeStats dec_stats;
      t0 = Clock::now();
      m2t::TokenGrid back = m2t::decode_grid(enc.header, enc.payloads, model,
                                             path, precision, 1, &dec_stats);
      double dec_ms = ms_since(t0);
      m2t::check_contract(back == grid, "bench: round trip failed");
      out << steps << ',' << m2t::path_mode_name(path) << ',' << enc_ms << ','
          << dec_ms << ',' << dec_stats.model_tokens << ','
          << dec_stats.sched_tokens << ',' << 8 * enc.stats.payload_bytes << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"m2tc: masked-transformer lossless codec for integer token grids"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic correlated grid");
  int gen_h = 32, gen_w = 32, gen_c = 2, gen_clamp = 12;
  uint64_t gen_seed = 1;
  double gen_rho = 0.9, gen_amp = 2.0;
  std::string gen_out;
  gen->add_option("--h", gen_h, "grid rows");
  gen->add_option("--w", gen_w, "grid cols");
  gen->add_option("--c", gen_c, "channels");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--rho", gen_rho, "neighbor correlation");
  gen->add_option("--amp", gen_amp, "amplitude before rounding");
  gen->add_option("--clamp", gen_clamp, "value clamp");
  gen->add_option("--out", gen_out, "output grid file")->required();

  // schedule
  auto* schedule = app.add_subcommand("schedule", "emit a masking schedule as CSV");
  ScheduleFlags sched_sf;
  sched_sf.attach(schedule);
  int sched_wt = 16;
  std::string sched_out;
  schedule->add_option("--w_T", sched_wt, "tile side in tokens");
  schedule->add_option("--out", sched_out, "output file (default stdout)");

  // qlds
  auto* qlds = app.add_subcommand("qlds", "dump the quantized low-discrepancy order");
  int qlds_wt = 16;
  std::string qlds_prefixes, qlds_out;
  qlds->add_option("--w_T", qlds_wt, "grid side");
  qlds->add_option("--prefixes", qlds_prefixes, "comma list of prefixes to render");
  qlds->add_option("--out", qlds_out, "output file (default stdout)");

  // layout
  auto* layout = app.add_subcommand("layout", "render the group-causal layout");
  ScheduleFlags lay_sf;
  lay_sf.attach(layout);
  int lay_wt = 8;
  std::string lay_out;
  layout->add_option("--w_T", lay_wt, "tile side in tokens");
  layout->add_option("--out", lay_out, "output file (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "train a toy model on synthetic tiles");
  ModelFlags train_mf;
  ScheduleFlags train_sf;
  train_mf.attach(train);
  train_sf.attach(train);
  std::string train_mode = "mt", train_out;
  int train_steps = 2000, train_batch = 8;
  double train_lr = 1e-3, train_rho = 0.9, train_amp = 2.0;
  uint64_t train_seed = 7;
  train->add_option("--mode", train_mode, "mt|m2t");
  train->add_option("--train-steps", train_steps, "optimizer steps");
  train->add_option("--batch", train_batch, "tiles per step");
  train->add_option("--lr", train_lr, "Adam learning rate");
  train->add_option("--train-seed", train_seed, "training seed");
  train->add_option("--rho", train_rho, "source neighbor correlation");
  train->add_option("--amp", train_amp, "source amplitude");
  train->add_option("--out-model", train_out, "checkpoint to write");

  // encode
  auto* encode = app.add_subcommand("encode", "compress a grid file");
  ModelFlags enc_mf;
  ScheduleFlags enc_sf;
  enc_mf.attach(encode);
  enc_sf.attach(encode);
  std::string enc_in, enc_out, enc_path = "m2t";
  int enc_precision = 16, enc_threads = 1;
  encode->add_option("--in", enc_in, "input grid")->required();
  encode->add_option("--out", enc_out, "output bitstream")->required();
  encode->add_option("--path", enc_path, "mt|m2t");
  encode->add_option("--precision", enc_precision, "coder precision bits [8,16]");
  encode->add_option("--threads", enc_threads, "tile workers");

  // decode
  auto* decode = app.add_subcommand("decode", "decompress a bitstream");
  ModelFlags dec_mf;
  dec_mf.attach(decode);
  std::string dec_in, dec_out, dec_path = "m2t";
  int dec_precision = 16, dec_threads = 1;
  decode->add_option("--in", dec_in, "input bitstream")->required();
  decode->add_option("--out", dec_out, "output grid")->required();
  decode->add_option("--path", dec_path, "mt|m2t (must match the encoder)");
  decode->add_option("--precision", dec_precision, "coder precision bits (must match)");
  decode->add_option("--threads", dec_threads, "tile workers");

  // sample
  auto* sample = app.add_subcommand("sample", "per-step sample means of untransmitted tokens");
  ModelFlags smp_mf;
  ScheduleFlags smp_sf;
  smp_mf.attach(sample);
  smp_sf.attach(sample);
  std::string smp_in, smp_out;
  int smp_n = 50;
  uint64_t smp_seed = 1;
  sample->add_option("--in", smp_in, "input grid (first tile is used)")->required();
  sample->add_option("--samples", smp_n, "samples per step");
  sample->add_option("--sample-seed", smp_seed, "sampling seed");
  sample->add_option("--out", smp_out, "output file (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "evaluate one model under many schedules");
  ModelFlags swp_mf;
  swp_mf.attach(sweep);
  std::string swp_grids, swp_alphas = "1,1.5,2.2", swp_steps = "1,2,4,8,12";
  std::string swp_kinds = "random,entropy,qlds", swp_path = "mt", swp_out;
  int swp_gen = 0, swp_gen_h = 32, swp_gen_w = 32, swp_precision = 16, swp_threads = 1;
  uint64_t swp_gen_seed = 100;
  sweep->add_option("--grids", swp_grids, "comma list of grid files");
  sweep->add_option("--gen-grids", swp_gen, "synthesize this many grids instead");
  sweep->add_option("--gen-h", swp_gen_h, "generated grid rows");
  sweep->add_option("--gen-w", swp_gen_w, "generated grid cols");
  sweep->add_option("--gen-seed", swp_gen_seed, "generator seed base");
  sweep->add_option("--alphas", swp_alphas, "comma list of alphas");
  sweep->add_option("--steps-list", swp_steps, "comma list of step counts");
  sweep->add_option("--kinds", swp_kinds, "comma list of schedule kinds");
  sweep->add_option("--path", swp_path, "mt|m2t");
  sweep->add_option("--precision", swp_precision, "coder precision bits");
  sweep->add_option("--threads", swp_threads, "tile workers");
  sweep->add_option("--out", swp_out, "output file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "MT vs M2T wall times");
  ModelFlags bch_mf;
  ScheduleFlags bch_sf;
  bch_mf.attach(bench);
  bch_sf.attach(bench);
  std::string bch_grid, bch_steps = "4,8,12", bch_out;
  int bch_gen_h = 32, bch_gen_w = 32, bch_precision = 16;
  uint64_t bch_gen_seed = 200;
  bench->add_option("--grid", bch_grid, "grid file (else synthesized)");
  bench->add_option("--gen-h", bch_gen_h, "generated grid rows");
  bench->add_option("--gen-w", bch_gen_w, "generated grid cols");
  bench->add_option("--gen-seed", bch_gen_seed, "generator seed");
  bench->add_option("--steps-list", bch_steps, "comma list of step counts");
  bench->add_option("--precision", bch_precision, "coder precision bits");
  bench->add_option("--out", bch_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_h, gen_w, gen_c, gen_seed, gen_rho, gen_amp, gen_clamp,
                     gen_out);
    }
    if (schedule->parsed()) return cmd_schedule(sched_sf, sched_wt, sched_out);
    if (qlds->parsed()) return cmd_qlds(qlds_wt, qlds_prefixes, qlds_out);
    if (layout->parsed()) return cmd_layout(lay_sf, lay_wt, lay_out);
    if (train->parsed()) {
      return cmd_train(train_mf, train_sf, train_mode, train_steps, train_batch,
                       train_lr, train_seed, train_rho, train_amp, train_out);
    }
    if (encode->parsed()) {
      return cmd_encode(enc_mf, enc_sf, enc_in, enc_out, enc_path, enc_precision,
                        enc_threads);
    }
    if (decode->parsed()) {
      return cmd_decode(dec_mf, dec_in, dec_out, dec_path, dec_precision,
                        dec_threads);
    }
    if (sample->parsed()) {
      return cmd_sample(smp_mf, smp_sf, smp_in, smp_n, smp_seed, smp_out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(swp_mf, swp_grids, swp_gen, swp_gen_h, swp_gen_w,
                       swp_gen_seed, swp_alphas, swp_steps, swp_kinds, swp_path,
                       swp_precision, swp_threads, swp_out);
    }
    if (bench->parsed()) {
      return cmd_bench(bch_mf, bch_sf, bch_grid, bch_gen_h, bch_gen_w,
                       bch_gen_seed, bch_steps, bch_precision, bch_out);
    }
  } catch (const m2t::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const m2t::ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
