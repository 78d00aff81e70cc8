// src/config.cc

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

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "cepstra/experiment.h"
#include "cepstra/text.h"

namespace cepstra {

namespace pt = boost::property_tree;

ExperimentConfig::ExperimentConfig() {
  features = {"mfcc", "gfcc", "pncc", "plp", "lsf"};
  em.num_components = 16;
}

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"corpus", {"source", "speakers", "utterances", "seconds"}},
    {"split", {"train", "trials"}},
    {"features", {"list"}},
    {"snr", {"levels"}},
    {"gmm", {"mixtures", "max_iter", "tol", "var_floor"}},
    {"run", {"seed", "output"}},
};

std::string Get(const pt::ptree &section, const std::string &key, const std::string &fallback) {
  auto v = section.get_optional<std::string>(key);
  return v ? Trim(*v) : fallback;
}

}  // namespace

ExperimentConfig ExperimentConfig::Parse(const std::string &text,
                                         const std::filesystem::path &base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    Fail(ErrorCode::kFormat, std::string("config: ") + e.what());
  }

  ExperimentConfig cfg;
  for (const auto &[section, body] : tree) {
    if (section == "noise") continue;
    auto known = kKnownKeys.find(section);
    Require(known != kKnownKeys.end(), ErrorCode::kFormat,
            "config: unknown section [" + section + "]");
    for (const auto &[key, value] : body)
      Require(known->second.contains(key), ErrorCode::kFormat,
              "config: unknown key '" + key + "' in [" + section + "]");
  }
  auto resolve = [&](const std::string &p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? (base_dir / path).string() : p;
  };

  const pt::ptree empty;
  const auto &corpus = tree.get_child("corpus", empty);
  const std::string source = Get(corpus, "source", "synth");
  cfg.corpus_source = source == "synth" ? source : resolve(source);
  cfg.synth.num_speakers = ParseInt(Get(corpus, "speakers", "10"), "corpus.speakers");
  cfg.synth.utterances_per_speaker =
      ParseInt(Get(corpus, "utterances", "3"), "corpus.utterances");
  cfg.synth.utterance_seconds = ParseDouble(Get(corpus, "seconds", "3"), "corpus.seconds");

  const auto &split = tree.get_child("split", empty);
  cfg.train_count = ParseInt(Get(split, "train", "2"), "split.train");
  const std::string trials = Get(split, "trials", "concatenated");
  if (trials == "concatenated") cfg.trials = TrialMode::kConcatenated;
  else if (trials == "per-utterance") cfg.trials = TrialMode::kPerUtterance;
  else Fail(ErrorCode::kFormat, "config: split.trials must be concatenated or per-utterance");

  const auto &features = tree.get_child("features", empty);
  if (auto list = features.get_optional<std::string>("list")) cfg.features = SplitList(*list);

  const auto &noise = tree.get_child("noise", empty);
  for (const auto &[key, value] : noise) {
    const std::string v = Trim(value.data());
    if (key == "seconds") {
      cfg.noise_seconds = ParseDouble(v, "noise.seconds");
      continue;
    }
    cfg.noises.push_back({key, v.starts_with("synth:") ? v : resolve(v)});
  }

  const auto &snr = tree.get_child("snr", empty);
  if (auto levels = snr.get_optional<std::string>("levels")) {
    std::vector<double> values;
    for (const auto &tok : SplitList(*levels)) values.push_back(ParseDouble(tok, "snr.levels"));
    cfg.snr = SnrGrid(std::move(values));
  }

  const auto &gmm = tree.get_child("gmm", empty);
  cfg.em.num_components =
      static_cast<std::size_t>(ParseInt(Get(gmm, "mixtures", "16"), "gmm.mixtures"));
  cfg.em.max_iter = ParseInt(Get(gmm, "max_iter", "100"), "gmm.max_iter");
  cfg.em.tol = ParseDouble(Get(gmm, "tol", "1e-5"), "gmm.tol");
  cfg.em.var_floor = ParseDouble(Get(gmm, "var_floor", "1e-4"), "gmm.var_floor");

  const auto &run = tree.get_child("run", empty);
  if (auto seed = run.get_optional<std::string>("seed"))
    cfg.seed = ParseUint64(Trim(*seed), "run.seed");
  cfg.output_dir = resolve(Get(run, "output", cfg.output_dir));

  cfg.Validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.parent_path());
}

void ExperimentConfig::Validate() const {
  Require(!features.empty(), ErrorCode::kInvalidArgument, "config: feature list is empty");
  for (const auto &f : features) FeatureSpec::Parse(f);
  std::set<std::string> unique(features.begin(), features.end());
  Require(unique.size() == features.size(), ErrorCode::kInvalidArgument,
          "config: duplicate feature in list");
  Require(train_count >= 1, ErrorCode::kInvalidArgument,
          "config: split.train must be >= 1");
  if (corpus_source == "synth") {
    Require(synth.num_speakers >= 2, ErrorCode::kInvalidArgument,
            "config: need at least two speakers");
    Require(synth.utterances_per_speaker > train_count, ErrorCode::kInvalidArgument,
            "config: every speaker needs at least one test utterance");
    Require(synth.utterance_seconds > 0.0, ErrorCode::kInvalidArgument,
            "config: corpus.seconds must be positive");
  }
  std::set<std::string> names;
  for (const auto &n : noises) {
    Require(n.name != kCleanCondition && names.insert(n.name).second,
            ErrorCode::kInvalidArgument, "config: bad or duplicate noise name '" + n.name + "'");
    if (n.source.starts_with("synth:"))
      Require(n.source == "synth:white" || n.source == "synth:babble" ||
                  n.source == "synth:pink",
              ErrorCode::kInvalidArgument, "config: unknown synthetic noise " + n.source);
  }
  Require(noise_seconds >= 1.0, ErrorCode::kInvalidArgument,
          "config: noise.seconds must be >= 1");
  Require(em.num_components >= 1 && em.max_iter >= 1 && em.tol > 0.0 && em.var_floor > 0.0,
          ErrorCode::kInvalidArgument, "config: invalid [gmm] settings");
  feature_config.Validate();
}

std::string ExperimentConfig::ToText() const {
  std::ostringstream os;
  os << "[corpus]\nsource = " << corpus_source << '\n';
  if (corpus_source == "synth") {
    os << "speakers = " << synth.num_speakers << "\nutterances = "
       << synth.utterances_per_speaker << "\nseconds = " << FormatDouble(synth.utterance_seconds)
       << '\n';
  }
  os << "\n[split]\ntrain = " << train_count << "\ntrials = "
     << (trials == TrialMode::kConcatenated ? "concatenated" : "per-utterance") << '\n';
  os << "\n[features]\nlist = " << JoinList(features) << '\n';
  os << "\n[noise]\nseconds = " << FormatDouble(noise_seconds) << '\n';
  for (const auto &n : noises) os << n.name << " = " << n.source << '\n';
  std::vector<std::string> levels;
  for (double v : snr.levels()) levels.push_back(FormatDouble(v));
  os << "\n[snr]\nlevels = " << JoinList(levels) << '\n';
  os << "\n[gmm]\nmixtures = " << em.num_components << "\nmax_iter = " << em.max_iter
     << "\ntol = " << FormatDouble(em.tol) << "\nvar_floor = " << FormatDouble(em.var_floor)
     << '\n';
  os << "\n[run]\n";
  if (seed) os << "seed = " << *seed << '\n';
  os << "output = " << output_dir << '\n';
  return os.str();
}

}  // namespace cepstra
