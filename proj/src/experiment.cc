// src/experiment.cc

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

#include "cepstra/experiment.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "cepstra/text.h"

namespace cepstra {

void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) threads.emplace_back(work);
  work();
  for (auto &t : threads) t.join();
  for (const auto &e : errors)
    if (e) std::rethrow_exception(e);
}

// Enrollment and identification ---------------------------------------------

SpeakerModels EnrollFeatures(const std::map<std::string, std::vector<FeatureMatrix>> &by_speaker,
                             const std::string &feature_name, const EmOptions &options,
                             std::uint64_t seed, int jobs) {
  Require(!by_speaker.empty(), ErrorCode::kInsufficientData, "no speakers to enroll");
  std::vector<std::string> speakers;
  std::size_t dim = 0;
  for (const auto &[spk, mats] : by_speaker) {
    Require(!mats.empty(), ErrorCode::kInsufficientData,
            "speaker " + spk + " has no training data");
    for (const auto &m : mats) {
      if (dim == 0) dim = m.dim();
      Require(m.dim() == dim, ErrorCode::kDimensionMismatch,
              "training features of " + spk + " have dim " + std::to_string(m.dim()) +
                  ", expected " + std::to_string(dim));
    }
    speakers.push_back(spk);
  }

  std::vector<GmmModel> models(speakers.size());
  ParallelFor(speakers.size(), jobs, [&](std::size_t i) {
    const auto &mats = by_speaker.at(speakers[i]);
    std::size_t rows = 0;
    for (const auto &m : mats) rows += m.num_frames();
    Matrix data(rows, dim);
    std::size_t r = 0;
    for (const auto &m : mats)
      for (std::size_t t = 0; t < m.num_frames(); ++t, ++r)
        std::copy_n(m.values().row(t).begin(), dim, data.row(r).begin());
    EmOptions opts = options;
    opts.seed = DeriveSeed(seed, {"gmm", feature_name, speakers[i]});
    try {
      models[i] = TrainEm(data, opts).model;
    } catch (const Error &e) {
      Fail(e.code(), "enrolling " + speakers[i] + " (" + feature_name + "): " + e.what());
    }
  });

  SpeakerModels out;
  for (std::size_t i = 0; i < speakers.size(); ++i) out.emplace(speakers[i], std::move(models[i]));
  return out;
}

SpeakerModels Enroll(const Corpus &train, const FeatureSpec &spec, const FeatureConfig &cfg,
                     const EmOptions &options, std::uint64_t seed, int jobs) {
  std::vector<FeatureMatrix> feats(train.size());
  ParallelFor(train.size(), jobs, [&](std::size_t i) { feats[i] = spec.Extract(train[i].audio, cfg); });
  std::map<std::string, std::vector<FeatureMatrix>> by_speaker;
  for (std::size_t i = 0; i < train.size(); ++i)
    by_speaker[train[i].speaker].push_back(std::move(feats[i]));
  return EnrollFeatures(by_speaker, spec.name(), options, seed, jobs);
}

Identification Identify(const SpeakerModels &models, const Matrix &features) {
  Require(models.size() >= 2, ErrorCode::kInvalidArgument,
          "identification needs at least two speaker models");
  const std::size_t model_dim = models.begin()->second.dim();
  Require(features.cols() == model_dim, ErrorCode::kDimensionMismatch,
          "feature dimension " + std::to_string(features.cols()) +
              " does not match model dimension " + std::to_string(model_dim));
  Identification best;
  double best_score = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (const auto &[spk, model] : models) {
    const double s = ScoreUtterance(model, features);
    if (s > best_score || best.speaker.empty()) {
      second = best_score;
      best_score = s;
      best.speaker = spk;
    } else if (s > second) {
      second = s;
    }
  }
  best.score = best_score;
  best.margin = best_score - second;
  return best;
}

double IdentificationRate(const std::vector<Decision> &decisions) {
  Require(!decisions.empty(), ErrorCode::kInsufficientData, "no decisions to score");
  std::size_t correct = 0;
  for (const auto &d : decisions) correct += d.truth == d.predicted;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(decisions.size());
}

// Corpus handling -----------------------------------------------------------

namespace {

// Orders "u2" before "u10".
bool NaturalLess(const std::string &a, const std::string &b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      std::string_view na(a.data() + i, ie - i), nb(b.data() + j, je - j);
      while (na.size() > 1 && na[0] == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb[0] == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

}  // namespace

Corpus LoadCorpusDir(const std::filesystem::path &dir, int sample_rate) {
  namespace fs = std::filesystem;
  Require(fs::is_directory(dir), ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> speakers;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_directory()) speakers.push_back(e.path());
  std::sort(speakers.begin(), speakers.end(),
            [](const fs::path &a, const fs::path &b) {
              return NaturalLess(a.filename().string(), b.filename().string());
            });
  Corpus corpus;
  for (const auto &spk : speakers) {
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(spk))
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    std::sort(files.begin(), files.end(), [](const fs::path &a, const fs::path &b) {
      return NaturalLess(a.stem().string(), b.stem().string());
    });
    for (const auto &f : files) {
      AudioBuffer audio = LoadWav(f);
      if (audio.sample_rate() != sample_rate) audio = Resample(audio, sample_rate);
      corpus.push_back({spk.filename().string(), f.stem().string(), std::move(audio)});
    }
  }
  Require(!corpus.empty(), ErrorCode::kInsufficientData,
          "no <speaker>/<utterance>.wav files under " + dir.string());
  return corpus;
}

CorpusSplit SplitCorpus(const Corpus &corpus, int train_count, TrialMode mode) {
  Require(train_count >= 1, ErrorCode::kInvalidArgument, "train count must be >= 1");
  std::map<std::string, std::vector<const Utterance *>> by_speaker;
  for (const auto &u : corpus) by_speaker[u.speaker].push_back(&u);
  CorpusSplit split;
  for (auto &[spk, utts] : by_speaker) {
    std::sort(utts.begin(), utts.end(),
              [](const Utterance *a, const Utterance *b) { return a->utterance < b->utterance; });
    for (std::size_t i = 1; i < utts.size(); ++i)
      Require(utts[i - 1]->utterance != utts[i]->utterance, ErrorCode::kInvalidArgument,
              "duplicate utterance " + spk + "/" + utts[i]->utterance);
    Require(utts.size() > static_cast<std::size_t>(train_count), ErrorCode::kInsufficientData,
            "speaker " + spk + " has " + std::to_string(utts.size()) +
                " utterances; need more than " + std::to_string(train_count));
    for (int i = 0; i < train_count; ++i) split.train.push_back(*utts[i]);
    if (mode == TrialMode::kPerUtterance) {
      for (std::size_t i = train_count; i < utts.size(); ++i) split.test.push_back(*utts[i]);
    } else {
      std::vector<double> joined;
      const int rate = utts[train_count]->audio.sample_rate();
      for (std::size_t i = train_count; i < utts.size(); ++i) {
        Require(utts[i]->audio.sample_rate() == rate, ErrorCode::kRateMismatch,
                "test utterances of " + spk + " differ in sample rate");
        const auto &s = utts[i]->audio.samples();
        joined.insert(joined.end(), s.begin(), s.end());
      }
      split.test.push_back({spk, "test", AudioBuffer(std::move(joined), rate)});
    }
  }
  return split;
}

// Evaluation ----------------------------------------------------------------

const EvalCell &EvalReport::at(const Condition &condition, const std::string &feature) const {
  const auto c = std::find(conditions.begin(), conditions.end(), condition);
  const auto f = std::find(features.begin(), features.end(), feature);
  Require(c != conditions.end() && f != features.end(), ErrorCode::kOutOfRange,
          "no cell for " + condition.Label() + " / " + feature);
  return cells.at(static_cast<std::size_t>(c - conditions.begin()) * features.size() +
                  static_cast<std::size_t>(f - features.begin()));
}

namespace {

std::string HexHash(const std::string &text) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << HashString(text);
  return os.str();
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

AudioBuffer MakeNoise(const NoiseSource &n, double seconds, int rate, std::uint64_t seed) {
  const std::uint64_t s = DeriveSeed(seed, {"noise", n.name});
  if (n.source == "synth:white") return SynthWhiteNoise(seconds, rate, s);
  if (n.source == "synth:babble") return SynthBabble(seconds, rate, s);
  if (n.source == "synth:pink") return SynthPinkNoise(seconds, rate, s);
  return LoadWav(n.source);
}

// Static matrices for every kind needed by the feature list.
using StaticCache = std::map<FeatureKind, FeatureMatrix>;

StaticCache ExtractStatics(const AudioBuffer &audio, const std::set<FeatureKind> &kinds,
                           const FeatureConfig &cfg) {
  StaticCache out;
  for (FeatureKind k : kinds) out.emplace(k, ExtractStatic(k, audio, cfg));
  return out;
}

}  // namespace

EvalReport RunGrid(const ExperimentConfig &config, int jobs) {
  config.Validate();
  const std::uint64_t seed = config.seed.value_or(0);
  ExperimentConfig resolved = config;
  resolved.seed = seed;

  EvalReport report;
  report.features = config.features;
  report.seed = seed;
  // The hash identifies the experiment, not where its outputs go.
  ExperimentConfig hashed = resolved;
  hashed.output_dir.clear();
  report.config_hash = HexHash(hashed.ToText());
  report.timestamp = UtcTimestamp();

  const int rate = config.feature_config.front_end.sample_rate;
  Corpus corpus;
  if (config.corpus_source == "synth") {
    CorpusSpec spec = config.synth;
    spec.sample_rate = rate;
    corpus = SynthCorpus(spec, DeriveSeed(seed, {"corpus"}));
  } else {
    corpus = LoadCorpusDir(config.corpus_source, rate);
  }
  const CorpusSplit split = SplitCorpus(corpus, config.train_count, config.trials);
  spdlog::info("corpus: {} training utterances, {} trials", split.train.size(), split.test.size());

  NoiseInventory inventory;
  for (const auto &n : config.noises)
    inventory.Add(n.name, MakeNoise(n, config.noise_seconds, rate, seed), rate);

  std::vector<FeatureSpec> specs;
  std::set<FeatureKind> kinds;
  for (const auto &f : config.features) {
    specs.push_back(FeatureSpec::Parse(f));
    kinds.insert(specs.back().parts().begin(), specs.back().parts().end());
  }
  const int delta_window = config.feature_config.delta_window;

  // Enrollment on clean training data.
  std::vector<StaticCache> train_statics(split.train.size());
  ParallelFor(split.train.size(), jobs, [&](std::size_t i) {
    train_statics[i] = ExtractStatics(split.train[i].audio, kinds, config.feature_config);
  });
  std::vector<SpeakerModels> models;
  for (const auto &spec : specs) {
    std::map<std::string, std::vector<FeatureMatrix>> by_speaker;
    for (std::size_t i = 0; i < split.train.size(); ++i)
      by_speaker[split.train[i].speaker].push_back(spec.Compose(train_statics[i], delta_window));
    spdlog::info("enrolling {} speakers with {}", by_speaker.size(), spec.name());
    models.push_back(EnrollFeatures(by_speaker, spec.name(), config.em, seed, jobs));
  }
  train_statics.clear();

  // Test conditions: clean first, then noises in config order, SNR ascending.
  const auto corrupted = CorruptCorpus(split.test, inventory, config.snr, DeriveSeed(seed, {"mix"}));
  report.conditions.push_back({std::string(kCleanCondition), std::nullopt});
  for (const auto &n : config.noises)
    for (double snr : config.snr.levels()) report.conditions.push_back({n.name, snr});

  const std::size_t num_trials = split.test.size();
  const std::size_t num_conditions = report.conditions.size();
  // decisions[(c * F + f) * T + t]
  std::vector<Decision> decisions(num_conditions * specs.size() * num_trials);
  ParallelFor(num_conditions * num_trials, jobs, [&](std::size_t task) {
    const std::size_t c = task / num_trials, t = task % num_trials;
    const Utterance &trial = corrupted.at(report.conditions[c])[t];
    std::string where = "cell " + report.conditions[c].Label();
    try {
      const StaticCache statics = ExtractStatics(trial.audio, kinds, config.feature_config);
      for (std::size_t f = 0; f < specs.size(); ++f) {
        where = "cell " + report.conditions[c].Label() + " / " + specs[f].name();
        const FeatureMatrix feats = specs[f].Compose(statics, delta_window);
        const Identification id = Identify(models[f], feats.values());
        decisions[(c * specs.size() + f) * num_trials + t] = {trial.speaker, id.speaker, id.margin};
      }
    } catch (const Error &e) {
      Fail(e.code(), where + ", trial " + trial.speaker + "/" + trial.utterance + ": " + e.what());
    }
  });

  for (std::size_t c = 0; c < num_conditions; ++c) {
    for (std::size_t f = 0; f < specs.size(); ++f) {
      EvalCell cell;
      cell.noise = report.conditions[c].noise;
      cell.snr_db = report.conditions[c].snr_db;
      cell.feature = specs[f].name();
      const auto first = decisions.begin() + static_cast<std::ptrdiff_t>((c * specs.size() + f) * num_trials);
      cell.decisions.assign(first, first + static_cast<std::ptrdiff_t>(num_trials));
      cell.trials = num_trials;
      for (const auto &d : cell.decisions) cell.correct += d.truth == d.predicted;
      cell.ir = IdentificationRate(cell.decisions);
      report.cells.push_back(std::move(cell));
    }
    spdlog::info("{}: done", report.conditions[c].Label());
  }
  return report;
}

// Rendering -----------------------------------------------------------------

namespace {

std::string SnrText(const std::optional<double> &snr) {
  return snr ? FormatDouble(*snr) : std::string();
}

}  // namespace

std::string RenderReport(const EvalReport &report, ReportFormat format) {
  std::ostringstream os;
  const std::size_t nf = report.features.size();
  if (format == ReportFormat::kCsv) {
    os << "noise,snr_db";
    for (const auto &f : report.features) os << ',' << f;
    os << '\n';
    for (std::size_t c = 0; c < report.conditions.size(); ++c) {
      os << report.conditions[c].noise << ',' << SnrText(report.conditions[c].snr_db);
      for (std::size_t f = 0; f < nf; ++f) os << ',' << FormatFixed(report.cells[c * nf + f].ir, 2);
      os << '\n';
    }
    return os.str();
  }

  os << "# Identification rate (%)\n\n";
  os << "- seed: " << report.seed << '\n';
  os << "- config hash: " << report.config_hash << "\n\n";
  os << "| noise | SNR (dB) |";
  for (const auto &f : report.features) os << ' ' << f << " |";
  os << "\n|---|---|";
  for (std::size_t f = 0; f < nf; ++f) os << "---:|";
  os << '\n';
  for (std::size_t c = 0; c < report.conditions.size(); ++c) {
    const auto &cond = report.conditions[c];
    // Compare the printed values so that ties are what the reader sees.
    std::vector<std::string> values;
    double best = -1.0;
    for (std::size_t f = 0; f < nf; ++f) {
      values.push_back(FormatFixed(report.cells[c * nf + f].ir, 2));
      best = std::max(best, std::stod(values.back()));
    }
    os << "| " << cond.noise << " | " << (cond.clean() ? std::string("-") : SnrText(cond.snr_db))
       << " |";
    for (const auto &v : values) {
      if (std::stod(v) == best) os << " **" << v << "** |";
      else os << ' ' << v << " |";
    }
    os << '\n';
  }
  return os.str();
}

std::string RenderCells(const EvalReport &report) {
  std::ostringstream os;
  os << "# seed: " << report.seed << '\n';
  os << "# config_hash: " << report.config_hash << '\n';
  os << "noise,snr_db,feature,trials,correct,ir\n";
  for (const auto &cell : report.cells)
    os << cell.noise << ',' << SnrText(cell.snr_db) << ',' << cell.feature << ',' << cell.trials
       << ',' << cell.correct << ',' << FormatDouble(cell.ir) << '\n';
  return os.str();
}

EvalReport ParseCells(const std::string &text) {
  EvalReport report;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = Trim(line.substr(1, colon - 1));
      const std::string value = Trim(line.substr(colon + 1));
      if (key == "seed") report.seed = ParseUint64(value, "cells seed");
      else if (key == "config_hash") report.config_hash = value;
      continue;
    }
    if (!header) {
      Require(line == "noise,snr_db,feature,trials,correct,ir", ErrorCode::kFormat,
              "cells table: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto fields = SplitFields(line);
    Require(fields.size() == 6, ErrorCode::kFormat,
            "cells table line " + std::to_string(line_no) + ": expected 6 fields");
    EvalCell cell;
    cell.noise = fields[0];
    if (!fields[1].empty()) cell.snr_db = ParseDouble(fields[1], "snr_db");
    Require(cell.noise == kCleanCondition ? !cell.snr_db.has_value() : cell.snr_db.has_value(),
            ErrorCode::kFormat,
            "cells table line " + std::to_string(line_no) + ": snr_db is empty only for clean");
    cell.feature = fields[2];
    cell.trials = ParseUint64(fields[3], "trials");
    cell.correct = ParseUint64(fields[4], "correct");
    cell.ir = ParseDouble(fields[5], "ir");
    const Condition cond{cell.noise, cell.snr_db};
    if (std::find(report.conditions.begin(), report.conditions.end(), cond) == report.conditions.end())
      report.conditions.push_back(cond);
    if (std::find(report.features.begin(), report.features.end(), cell.feature) == report.features.end())
      report.features.push_back(cell.feature);
    report.cells.push_back(std::move(cell));
  }
  Require(header, ErrorCode::kFormat, "cells table: missing header");
  Require(report.cells.size() == report.conditions.size() * report.features.size(),
          ErrorCode::kFormat, "cells table is not a full condition x feature grid");
  // Reorder to row-major (condition, feature) and check completeness.
  std::vector<EvalCell> ordered(report.cells.size());
  std::vector<bool> seen(report.cells.size(), false);
  for (auto &cell : report.cells) {
    const auto c = std::find(report.conditions.begin(), report.conditions.end(),
                             Condition{cell.noise, cell.snr_db}) - report.conditions.begin();
    const auto f = std::find(report.features.begin(), report.features.end(), cell.feature) -
                   report.features.begin();
    const std::size_t idx = static_cast<std::size_t>(c) * report.features.size() + static_cast<std::size_t>(f);
    Require(!seen[idx], ErrorCode::kFormat, "cells table: duplicate cell " + cell.noise + "/" + cell.feature);
    seen[idx] = true;
    ordered[idx] = std::move(cell);
  }
  report.cells = std::move(ordered);
  return report;
}

void WriteRunOutputs(const EvalReport &report, const ExperimentConfig &config,
                     const std::filesystem::path &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "decisions");
  auto write = [](const fs::path &path, const std::string &text) {
    std::ofstream out(path);
    Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
    out << text;
    Require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
  };
  ExperimentConfig resolved = config;
  resolved.seed = report.seed;
  write(dir / "report.csv", RenderReport(report, ReportFormat::kCsv));
  write(dir / "report.md", RenderReport(report, ReportFormat::kMarkdown));
  write(dir / "cells.csv", RenderCells(report));
  write(dir / "config.lock", resolved.ToText());
  write(dir / "run_info.txt", "timestamp = " + report.timestamp + "\nseed = " +
                                  std::to_string(report.seed) + "\nconfig_hash = " +
                                  report.config_hash + '\n');
  for (const auto &cell : report.cells) {
    std::ostringstream os;
    os << "speaker,predicted,margin\n";
    for (const auto &d : cell.decisions)
      os << d.truth << ',' << d.predicted << ',' << FormatFixed(d.margin, 6) << '\n';
    const std::string snr = cell.snr_db ? FormatDouble(*cell.snr_db) : std::string("inf");
    write(dir / "decisions" / (cell.noise + "_" + snr + "_" + cell.feature + ".csv"), os.str());
  }
}

}  // namespace cepstra
