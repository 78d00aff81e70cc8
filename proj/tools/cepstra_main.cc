// tools/cepstra_main.cc

// Copyright 2026  The Cepstra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// cepstra: synthetic corpora, noise mixing, feature extraction, GMM speaker
// models and noisy-condition identification experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cepstra/audio.h"
#include "cepstra/experiment.h"
#include "cepstra/features.h"
#include "cepstra/gmm.h"
#include "cepstra/noise.h"
#include "cepstra/text.h"

namespace fs = std::filesystem;
using namespace cepstra;

namespace {

// Bad flag values found after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t ResolveSeed(const std::optional<std::uint64_t> &seed) {
  const std::uint64_t s = seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^
                                             std::random_device{}();
  std::cerr << "seed: " << s << '\n';
  return s;
}

void WriteText(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

// "speakers=10,utterances=3,seconds=3,rate=16000"; omitted keys keep their
// defaults.
CorpusSpec ParseCorpusSpec(const std::string &text) {
  CorpusSpec spec;
  for (const auto &item : SplitList(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--spec: expected key=value, got '" + item + "'");
    const std::string key = Trim(item.substr(0, eq)), value = Trim(item.substr(eq + 1));
    try {
      if (key == "speakers") spec.num_speakers = ParseInt(value, key);
      else if (key == "utterances") spec.utterances_per_speaker = ParseInt(value, key);
      else if (key == "seconds") spec.utterance_seconds = ParseDouble(value, key);
      else if (key == "rate") spec.sample_rate = ParseInt(value, key);
      else throw UsageError("--spec: unknown key '" + key +
                            "' (speakers, utterances, seconds, rate)");
    } catch (const Error &e) {
      throw UsageError(std::string("--spec: ") + e.what());
    }
  }
  if (spec.num_speakers < 2 || spec.utterances_per_speaker < 1 ||
      !(spec.utterance_seconds > 0.0) || spec.sample_rate < 8000)
    throw UsageError("--spec: need speakers >= 2, utterances >= 1, seconds > 0, rate >= 8000");
  return spec;
}

std::vector<double> ParseSnrList(const std::string &text) {
  std::vector<double> out;
  for (const auto &tok : SplitList(text)) {
    try {
      out.push_back(ParseDouble(tok, "--snr"));
    } catch (const Error &e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--snr: empty list");
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw UsageError("--snr: duplicate level");
  return out;
}

FeatureSpec ParseFeature(const std::string &name) {
  try {
    return FeatureSpec::Parse(name);
  } catch (const Error &) {
    throw UsageError("--feature: unknown feature '" + name +
                     "'; valid names: " + JoinList(FeatureSpec::ValidNames()));
  }
}

// WAV files under `in` (or `in` itself), sorted.
std::vector<fs::path> CollectWavs(const fs::path &in) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(in)) {
    files.push_back(in);
  } else {
    Require(fs::is_directory(in), ErrorCode::kIo, "no such file or directory: " + in.string());
    for (const auto &e : fs::recursive_directory_iterator(in))
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  }
  Require(!files.empty(), ErrorCode::kInsufficientData, "no .wav files under " + in.string());
  return files;
}

AudioBuffer LoadAt(const fs::path &path, int rate) {
  AudioBuffer audio = LoadWav(path);
  return audio.sample_rate() == rate ? audio : Resample(audio, rate);
}

// Subcommands ---------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunSynth(const SynthArgs &a) {
  const CorpusSpec spec = ParseCorpusSpec(a.spec);
  const std::uint64_t seed = ResolveSeed(a.seed);
  const Corpus corpus = SynthCorpus(spec, seed);
  std::ostringstream manifest;
  manifest << "speaker,utterance,path,samples,sample_rate\n";
  for (const auto &u : corpus) {
    const fs::path rel = fs::path(u.speaker) / (u.utterance + ".wav");
    SaveWav(u.audio, fs::path(a.out) / rel);
    manifest << u.speaker << ',' << u.utterance << ',' << rel.generic_string() << ','
             << u.audio.size() << ',' << u.audio.sample_rate() << '\n';
  }
  WriteText(fs::path(a.out) / "manifest.csv", manifest.str());
  spdlog::info("wrote {} utterances to {}", corpus.size(), a.out);
  return 0;
}

struct MixArgs {
  std::string speech_dir, noise, snr, out, noise_name;
  double noise_seconds = 20.0;
  std::optional<std::uint64_t> seed;
};

int RunMix(const MixArgs &a) {
  const std::vector<double> levels = ParseSnrList(a.snr);
  const std::uint64_t seed = ResolveSeed(a.seed);
  const Corpus corpus = LoadCorpusDir(a.speech_dir, FrontEndConfig{}.sample_rate);
  const int rate = corpus.front().audio.sample_rate();

  std::string name = a.noise_name;
  AudioBuffer noise;
  if (a.noise.starts_with("synth:")) {
    const std::string kind = a.noise.substr(6);
    if (name.empty()) name = kind;
    const std::uint64_t s = DeriveSeed(seed, {"noise", name});
    if (kind == "white") noise = SynthWhiteNoise(a.noise_seconds, rate, s);
    else if (kind == "pink") noise = SynthPinkNoise(a.noise_seconds, rate, s);
    else if (kind == "babble") noise = SynthBabble(a.noise_seconds, rate, s);
    else throw UsageError("--noise: unknown synthetic noise '" + a.noise +
                          "' (synth:white, synth:pink, synth:babble or a WAV path)");
  } else {
    noise = LoadWav(a.noise);
    if (name.empty()) name = fs::path(a.noise).stem().string();
  }
  NoiseInventory inventory;
  inventory.Add(name, noise, rate);
  const AudioBuffer &resampled = inventory.at(name);

  std::ostringstream log;
  log << "file,gain,offset,scale,achieved_snr_db\n";
  for (double snr : levels) {
    const fs::path dir = fs::path(a.out) / name / (FormatDouble(snr) + "dB");
    for (const auto &u : corpus) {
      Mixture mix = MixAtSnr(u.audio, resampled, snr, UtteranceSeed(DeriveSeed(seed, {"mix"}),
                                                                    u.speaker, u.utterance));
      double peak = 0.0;
      for (double v : mix.audio.samples()) peak = std::max(peak, std::abs(v));
      double scale = 1.0;
      const std::string file = u.speaker + "_" + u.utterance + ".wav";
      if (peak > 1.0) {
        // Scaling both parts by the same factor keeps the SNR.
        scale = 1.0 / peak;
        std::vector<double> x(mix.audio.samples().begin(), mix.audio.samples().end());
        for (double &v : x) v *= scale;
        mix.audio = AudioBuffer(std::move(x), rate);
        spdlog::warn("{}/{}: mixture peak {:.3f} > 1, scaled by {:.6f}", name, file, peak, scale);
      }
      SaveWav(mix.audio, dir / file);
      log << (fs::path(name) / (FormatDouble(snr) + "dB") / file).generic_string() << ','
          << FormatDouble(mix.gain) << ',' << mix.offset << ',' << FormatDouble(scale) << ','
          << FormatFixed(mix.achieved_snr_db, 4) << '\n';
    }
  }
  WriteText(fs::path(a.out) / name / "mix_log.csv", log.str());
  return 0;
}

struct ExtractArgs {
  std::string in, feature, out;
  bool csv = false;
  bool static_only = false;
};

int RunExtract(const ExtractArgs &a) {
  FeatureSpec spec = ParseFeature(a.feature);
  if (a.static_only) spec = spec.StaticOnly();
  const FeatureConfig cfg;
  const fs::path in(a.in);
  const auto files = CollectWavs(in);
  for (const auto &f : files) {
    const fs::path rel = fs::is_regular_file(in) ? f.filename() : fs::relative(f, in);
    const FeatureMatrix feats = spec.Extract(LoadAt(f, cfg.front_end.sample_rate), cfg);
    fs::path target = fs::path(a.out) / rel;
    WriteFeatureFile(feats, fs::path(target).replace_extension(".cbfm"));
    if (a.csv) WriteFeatureCsv(feats, fs::path(target).replace_extension(".csv"));
  }
  spdlog::info("extracted {} from {} files", spec.name(), files.size());
  return 0;
}

struct TrainArgs {
  std::string in, feature, out;
  int mixtures = 16;
  std::optional<std::uint64_t> seed;
};

int RunTrain(const TrainArgs &a) {
  const FeatureSpec spec = ParseFeature(a.feature);
  if (a.mixtures < 1) throw UsageError("--mixtures must be >= 1");
  const std::uint64_t seed = ResolveSeed(a.seed);
  const FeatureConfig cfg;
  const Corpus corpus = LoadCorpusDir(a.in, cfg.front_end.sample_rate);
  EmOptions em;
  em.num_components = static_cast<std::size_t>(a.mixtures);
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const SpeakerModels models = Enroll(corpus, spec, cfg, em, seed, jobs);
  for (const auto &[speaker, model] : models)
    WriteModelFile(model, fs::path(a.out) / (speaker + ".cbgm"));
  spdlog::info("wrote {} models to {}", models.size(), a.out);
  return 0;
}

struct IdentifyArgs {
  std::string models, in, feature;
};

int RunIdentify(const IdentifyArgs &a) {
  const FeatureSpec spec = ParseFeature(a.feature);
  SpeakerModels models;
  Require(fs::is_directory(a.models), ErrorCode::kIo, "not a directory: " + a.models);
  for (const auto &e : fs::directory_iterator(a.models))
    if (e.is_regular_file() && e.path().extension() == ".cbgm")
      models.emplace(e.path().stem().string(), ReadModelFile(e.path()));
  Require(models.size() >= 2, ErrorCode::kInsufficientData,
          "need at least two .cbgm models in " + a.models);
  const FeatureConfig cfg;
  const fs::path in(a.in);
  std::cout << "file,predicted,score,margin\n";
  for (const auto &f : CollectWavs(in)) {
    const FeatureMatrix feats = spec.Extract(LoadAt(f, cfg.front_end.sample_rate), cfg);
    const Identification id = Identify(models, feats.values());
    const fs::path rel = fs::is_regular_file(in) ? f.filename() : fs::relative(f, in);
    std::cout << rel.generic_string() << ',' << id.speaker << ',' << FormatFixed(id.score, 6)
              << ',' << FormatFixed(id.margin, 6) << '\n';
  }
  return 0;
}

struct EvaluateArgs {
  std::string config, out;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
};

int RunEvaluate(const EvaluateArgs &a) {
  ExperimentConfig config;
  try {
    config = ExperimentConfig::Load(a.config);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw UsageError(e.what());
  }
  if (a.seed) config.seed = a.seed;
  config.seed = ResolveSeed(config.seed);
  if (!a.out.empty()) config.output_dir = a.out;
  const int jobs = a.jobs > 0 ? a.jobs
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const EvalReport report = RunGrid(config, jobs);
  WriteRunOutputs(report, config, config.output_dir);
  std::cout << RenderReport(report, ReportFormat::kMarkdown);
  std::cerr << "wrote " << config.output_dir << '\n';
  return 0;
}

struct ReportArgs {
  std::string in, format = "markdown";
};

int RunReport(const ReportArgs &a) {
  fs::path path(a.in);
  if (fs::is_directory(path)) path /= "cells.csv";
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const EvalReport report = ParseCells(ss.str());
  std::cout << RenderReport(report, a.format == "csv" ? ReportFormat::kCsv : ReportFormat::kMarkdown);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  InitLogging();
  CLI::App app{"cepstra: noisy-condition speaker identification toolkit"};
  app.require_subcommand(1);
  app.footer("Set CEPSTRA_LOG=error|warn|info|debug to control logging on stderr.");

  SynthArgs synth;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic speaker corpus");
  synth_cmd->add_option("--spec", synth.spec,
                        "Corpus spec, e.g. speakers=10,utterances=3,seconds=3,rate=16000")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed (drawn and printed if absent)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  MixArgs mix;
  auto *mix_cmd = app.add_subcommand("mix", "Mix a corpus with noise at given SNRs");
  mix_cmd->add_option("--speech-dir", mix.speech_dir, "Corpus directory <speaker>/<utt>.wav")
      ->required();
  mix_cmd->add_option("--noise", mix.noise, "synth:white, synth:pink, synth:babble or a WAV path")
      ->required();
  mix_cmd->add_option("--noise-name", mix.noise_name, "Name for the output subdirectory");
  mix_cmd->add_option("--noise-seconds", mix.noise_seconds,
                      "Length of synthetic noise in seconds")
      ->capture_default_str();
  mix_cmd->add_option("--snr", mix.snr, "Comma-separated SNR levels in dB")->required();
  mix_cmd->add_option("--seed", mix.seed, "Random seed (drawn and printed if absent)");
  mix_cmd->add_option("--out", mix.out, "Output directory")->required();

  ExtractArgs extract;
  auto *extract_cmd = app.add_subcommand("extract", "Extract features from WAV files");
  extract_cmd->add_option("--in", extract.in, "WAV file or directory")->required();
  extract_cmd->add_option("--feature", extract.feature,
                          "Feature: " + JoinList(FeatureSpec::ValidNames()))
      ->required();
  extract_cmd->add_option("--out", extract.out, "Output directory for .cbfm files")->required();
  extract_cmd->add_flag("--csv", extract.csv, "Also write CSV tables");
  extract_cmd->add_flag("--static", extract.static_only, "Omit delta features");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train one GMM per speaker");
  train_cmd->add_option("--in", train.in, "Corpus directory <speaker>/<utt>.wav")->required();
  train_cmd->add_option("--feature", train.feature,
                        "Feature: " + JoinList(FeatureSpec::ValidNames()))
      ->required();
  train_cmd->add_option("--mixtures", train.mixtures, "Components per model")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed (drawn and printed if absent)");
  train_cmd->add_option("--out", train.out, "Output directory for <speaker>.cbgm")->required();

  IdentifyArgs identify;
  auto *identify_cmd = app.add_subcommand("identify", "Identify the speaker of WAV files");
  identify_cmd->add_option("--models", identify.models, "Directory of .cbgm models")->required();
  identify_cmd->add_option("--in", identify.in, "WAV file or directory")->required();
  identify_cmd->add_option("--feature", identify.feature, "Feature the models were trained on")
      ->required();

  EvaluateArgs evaluate;
  auto *evaluate_cmd = app.add_subcommand("evaluate", "Run a noise x SNR x feature experiment");
  evaluate_cmd->add_option("--config", evaluate.config, "Experiment config file")->required();
  evaluate_cmd->add_option("--jobs", evaluate.jobs, "Worker threads (default: all cores)");
  evaluate_cmd->add_option("--seed", evaluate.seed, "Overrides [run] seed");
  evaluate_cmd->add_option("--out", evaluate.out, "Overrides [run] output");

  ReportArgs report;
  auto *report_cmd = app.add_subcommand("report", "Render a finished run as a table");
  report_cmd->add_option("--in", report.in, "Run directory or cells.csv")->required();
  report_cmd->add_option("--format", report.format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*mix_cmd) return RunMix(mix);
    if (*extract_cmd) return RunExtract(extract);
    if (*train_cmd) return RunTrain(train);
    if (*identify_cmd) return RunIdentify(identify);
    if (*evaluate_cmd) return RunEvaluate(evaluate);
    if (*report_cmd) return RunReport(report);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const Error &e) {
    std::cerr << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
