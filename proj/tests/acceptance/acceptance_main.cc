// tests/acceptance/acceptance_main.cc


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

// Acceptance suite. Prints one line per criterion:
//
//   PASS|FAIL <n>  <title>: <details>  [<seconds> s / budget <s> s]
//
// The qualitative trend check (7) is soft: when it is not met the line reads
// SOFT-FAIL, a warning and the full table are printed, and the exit status is
// unaffected. Benchmark goldens live in tests/acceptance/golden and are
// (re)written with --pin.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cepstra/audio.h"
#include "cepstra/dsp.h"
#include "cepstra/experiment.h"
#include "cepstra/features.h"
#include "cepstra/gmm.h"
#include "cepstra/noise.h"
#include "cepstra/text.h"
#include "test_support.h"

namespace cepstra {
namespace {

namespace fs = std::filesystem;
using testing::kPi;

struct Outcome {
  bool pass = false;
  bool soft = false;  // a failure only warns
  std::string details;
};

// Collects a pass/fail verdict with the first few failure messages.
class Checker {
 public:
  void Expect(bool ok, const std::string &message) {
    if (ok) return;
    if (failures_++ < 5) messages_ += (messages_.empty() ? "" : "; ") + message;
  }
  bool ok() const { return failures_ == 0; }
  std::string Summary(const std::string &on_pass) const {
    if (ok()) return on_pass;
    return std::to_string(failures_) + " failure(s): " + messages_;
  }

 private:
  std::size_t failures_ = 0;
  std::string messages_;
};

std::string Sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Closed-form scalars ------------------------------------------------------

Outcome ClosedFormScalars() {
  Checker c;
  const double mel = MelScale(700.0), erb = Erb(1000.0);
  const std::vector<double> x = {0.25, -1.5}, one = {1.0, 1.0};
  const double lp = GaussianLogPdf(x, x, one);
  c.Expect(std::abs(mel - 781.18) <= 0.01, "mel(700) = " + FormatDouble(mel));
  c.Expect(std::abs(erb - 132.639) <= 1e-3, "ERB(1000) = " + FormatDouble(erb));
  c.Expect(std::abs(lp - -1.8379) <= 1e-4, "log N(mu | mu, I_2) = " + FormatDouble(lp));
  return {c.ok(), false,
          c.Summary("mel(700)=" + FormatFixed(mel, 4) + ", ERB(1000)=" + FormatFixed(erb, 4) +
                    ", log N(mu|mu,I_2)=" + FormatFixed(lp, 6))};
}

// 2. Oracle equivalence -------------------------------------------------------

Outcome OracleEquivalence() {
  constexpr int kCases = 1000;
  std::mt19937_64 rng(20260001);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  Checker c;
  double worst_fft = 0.0, worst_dct = 0.0, worst_fb = 0.0, worst_ac = 0.0;

  for (int i = 0; i < kCases; ++i) {
    const std::size_t len = uniform(16, 400);
    std::size_t n_fft = 16;
    while (n_fft < len) n_fft *= 2;
    if (rng() % 2) n_fft *= 2;
    const auto x = testing::RandomVector(rng, len);
    FrameSequence frames{Matrix(1, len), len, len, 16000};
    std::copy(x.begin(), x.end(), frames.frames.row(0).begin());
    const auto fast = PowerSpectrum(frames, n_fft);
    const auto ref = testing::DirectPowerSpectrum(x, n_fft);
    const double scale = *std::max_element(ref.begin(), ref.end());
    double err = 0.0;
    for (std::size_t b = 0; b < ref.size(); ++b)
      err = std::max(err, std::abs(fast.values(0, b) - ref[b]) / scale);
    worst_fft = std::max(worst_fft, err);
    c.Expect(err <= 1e-9, "FFT case " + std::to_string(i) + " rel err " + Sci(err));
  }

  for (int i = 0; i < kCases; ++i) {
    const std::size_t n_in = uniform(2, 64), n_out = uniform(1, n_in);
    const auto x = testing::RandomVector(rng, n_in);
    const auto fast = DctII(x, n_out);
    const auto ref = testing::DirectDct(x, n_out);
    std::vector<double> planned(n_out);
    DctPlan(n_in, n_out).Apply(x, planned);
    double err = 0.0;
    for (std::size_t k = 0; k < n_out; ++k)
      err = std::max({err, std::abs(fast[k] - ref[k]), std::abs(planned[k] - ref[k])});
    worst_dct = std::max(worst_dct, err);
    c.Expect(err <= 1e-12, "DCT case " + std::to_string(i) + " err " + Sci(err));
  }

  for (int i = 0; i < kCases; ++i) {
    const std::size_t n_fft = std::size_t{256} << uniform(0, 2);
    const std::size_t bins = n_fft / 2 + 1;
    FilterBank bank;
    switch (i % 3) {
      case 0: bank = MelFilterBank(uniform(1, 40), n_fft, 16000, 0.0, 8000.0); break;
      case 1: bank = GammatoneFilterBank(uniform(1, 64), n_fft, 16000, 50.0, 8000.0); break;
      default: bank = BarkFilterBank(uniform(5, 21), n_fft, 16000); break;
    }
    const std::size_t frames = uniform(1, 4);
    PowerSpectrumSequence spec{Matrix(frames, bins), 16000.0 / n_fft, n_fft};
    const auto v = testing::RandomVector(rng, frames * bins, 0.0, 10.0);
    std::copy(v.begin(), v.end(), spec.values.data().begin());
    const Matrix got = ApplyFilterBank(spec, bank);
    double err = 0.0;
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t ch = 0; ch < bank.num_channels(); ++ch) {
        long double s = 0.0L;
        for (std::size_t b = 0; b < bins; ++b)
          s += static_cast<long double>(spec.values(t, b)) * bank.weights(ch, b);
        const double ref = static_cast<double>(s);
        err = std::max(err, std::abs(got(t, ch) - ref) / std::max(ref, 1e-300));
      }
    worst_fb = std::max(worst_fb, err);
    c.Expect(err <= 1e-10, "filterbank case " + std::to_string(i) + " rel err " + Sci(err));
  }

  for (int i = 0; i < kCases; ++i) {
    const std::size_t len = uniform(20, 400), lag = uniform(0, std::min<std::size_t>(len - 1, 24));
    const auto x = testing::RandomVector(rng, len);
    const auto r = Autocorrelation(x, lag);
    long double r0 = 0.0L;
    for (double v : x) r0 += static_cast<long double>(v) * v;
    double err = 0.0;
    for (std::size_t k = 0; k <= lag; ++k) {
      long double s = 0.0L;
      for (std::size_t n = 0; n + k < len; ++n) s += static_cast<long double>(x[n]) * x[n + k];
      err = std::max(err, static_cast<double>(std::abs(r[k] - s) / r0));
    }
    worst_ac = std::max(worst_ac, err);
    c.Expect(err <= 1e-10, "autocorrelation case " + std::to_string(i) + " rel err " + Sci(err));
  }

  return {c.ok(), false,
          c.Summary("4 x 1000 cases; worst FFT " + Sci(worst_fft) + ", DCT " + Sci(worst_dct) +
                    ", filterbank " + Sci(worst_fb) + ", autocorrelation " + Sci(worst_ac))};
}

// 3. SNR accuracy -------------------------------------------------------------

Outcome SnrAccuracy() {
  const Corpus speech = SynthCorpus({6, 2, 1.5, 16000}, 20260003);
  std::vector<AudioBuffer> noises;
  for (std::uint64_t s = 0; s < 6; ++s) {
    noises.push_back(SynthWhiteNoise(2.0, 16000, 100 + s, 0.05 + 0.05 * s));
    noises.push_back(SynthPinkNoise(2.0, 16000, 200 + s, 0.02 + 0.1 * s));
    noises.push_back(SynthBabble(2.0, 16000, 300 + s));
  }
  std::mt19937_64 rng(20260004);
  std::uniform_real_distribution<double> target_dist(-10.0, 30.0);
  Checker c;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto &s = speech[rng() % speech.size()].audio;
    const auto &n = noises[rng() % noises.size()];
    const double target = target_dist(rng);
    const Mixture mix = MixAtSnr(s, n, target, rng());
    long double ps = 0.0L, pn = 0.0L;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const long double noise = static_cast<long double>(mix.audio.samples()[k]) - s.samples()[k];
      ps += static_cast<long double>(s.samples()[k]) * s.samples()[k];
      pn += noise * noise;
    }
    const double snr = static_cast<double>(10.0L * std::log10(ps / pn));
    const double err = std::abs(snr - target);
    worst = std::max(worst, err);
    c.Expect(err <= 0.01, "triple " + std::to_string(i) + ": target " + FormatFixed(target, 3) +
                              " dB, measured " + FormatFixed(snr, 4) + " dB");
  }
  return {c.ok(), false, c.Summary("500 triples, worst |error| " + Sci(worst) + " dB")};
}

// 4. EM properties ------------------------------------------------------------

Matrix ToMatrix(const std::vector<std::vector<double>> &rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  return m;
}

Outcome EmProperties() {
  std::mt19937_64 rng(20260005);
  Checker c;
  double worst_drop = 0.0, worst_post = 0.0, worst_weight = 0.0;
  std::size_t reseeds = 0;
  for (int ds = 0; ds < 50; ++ds) {
    const std::size_t d = 1 + rng() % 8, k = 1 + rng() % 8;
    const std::size_t n = std::max<std::size_t>(10 * k, 100 + rng() % 500);
    // Data from a random mixture with as many as 8 sources.
    const std::size_t sources = 1 + rng() % 8;
    std::vector<std::vector<double>> centers;
    for (std::size_t j = 0; j < sources; ++j) centers.push_back(testing::RandomVector(rng, d, -4, 4));
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix data(n, d);
    for (std::size_t t = 0; t < n; ++t) {
      const auto &ctr = centers[rng() % sources];
      for (std::size_t i = 0; i < d; ++i) data(t, i) = ctr[i] + g(rng) * (0.3 + 0.2 * i);
    }
    EmOptions opt;
    opt.num_components = k;
    opt.seed = rng();
    const auto res = TrainEm(data, opt);
    const auto &ll = res.report.log_likelihood;
    reseeds += res.report.reseeded_components;
    for (std::size_t i = 1; i < ll.size(); ++i) {
      const int m_step = static_cast<int>(i) - 1;
      const auto &rs = res.report.reseed_iterations;
      if (std::find(rs.begin(), rs.end(), m_step) != rs.end()) continue;
      const double drop = ll[i - 1] - ll[i];
      worst_drop = std::max(worst_drop, drop);
      c.Expect(drop <= 1e-8, "dataset " + std::to_string(ds) + " iteration " + std::to_string(i) +
                                 " log-likelihood drops by " + Sci(drop));
    }
    const auto &w = res.model.weights();
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    worst_weight = std::max(worst_weight, std::abs(wsum - 1.0));
    c.Expect(std::abs(wsum - 1.0) <= 1e-12, "dataset " + std::to_string(ds) + " weights sum " +
                                                FormatDouble(wsum));
    std::vector<double> post(k);
    for (std::size_t t = 0; t < n; ++t) {
      res.model.Posteriors(data.row(t), post);
      const double s = std::accumulate(post.begin(), post.end(), 0.0);
      worst_post = std::max(worst_post, std::abs(s - 1.0));
    }
    c.Expect(worst_post <= 1e-12, "dataset " + std::to_string(ds) + " responsibilities off by " +
                                      Sci(worst_post));
  }

  // AR(2) recovery: x[n] = 0.5 x[n-1] - 0.3 x[n-2] + e[n].
  const auto ar = testing::Ar2Process(0.5, -0.3, 20000, 20260006);
  const auto fit = LevinsonDurbin(Autocorrelation(ar, 2), 2);
  c.Expect(std::abs(fit.lpc[0] - 0.5) <= 0.05 && std::abs(fit.lpc[1] + 0.3) <= 0.05,
           "AR(2) fit (" + FormatFixed(fit.lpc[0], 4) + ", " + FormatFixed(fit.lpc[1], 4) + ")");

  // Two spherical clusters 5 sigma apart, 30/70 split.
  const auto fx = testing::TwoClusters(4000, 2, 5.0, 0.3, 20260007);
  const Matrix pts = ToMatrix(fx.points);
  std::vector<int> assign;
  const auto init = KMeansInit(pts, 2, 1, 10, 1e-4, &assign);
  const int zero_is = init.means()(0, 0) < init.means()(1, 0) ? 0 : 1;
  std::size_t correct = 0;
  for (std::size_t t = 0; t < assign.size(); ++t)
    correct += (assign[t] == zero_is) == (fx.labels[t] == 0);
  const double accuracy = static_cast<double>(correct) / assign.size();
  c.Expect(accuracy >= 0.95, "k-means accuracy " + FormatFixed(accuracy, 4));
  EmOptions opt;
  opt.num_components = 2;
  opt.seed = 1;
  const auto two = TrainEm(pts, opt).model;
  const std::size_t j0 = two.means()(0, 0) < two.means()(1, 0) ? 0 : 1;
  double mean_err = 0.0, weight_err = 0.0;
  for (std::size_t cl = 0; cl < 2; ++cl) {
    const std::size_t j = cl == 0 ? j0 : 1 - j0;
    for (std::size_t i = 0; i < 2; ++i)
      mean_err = std::max(mean_err, std::abs(two.means()(j, i) - fx.centers[cl][i]));
    weight_err = std::max(weight_err, std::abs(two.weights()[j] - (cl == 0 ? 0.3 : 0.7)));
  }
  c.Expect(mean_err <= 0.1, "two-cluster mean error " + FormatFixed(mean_err, 4));
  c.Expect(weight_err <= 0.05, "two-cluster weight error " + FormatFixed(weight_err, 4));

  return {c.ok(), false,
          c.Summary("50 datasets; worst LL drop " + Sci(std::max(worst_drop, 0.0)) +
                    ", posterior sum err " + Sci(worst_post) + ", weight sum err " +
                    Sci(worst_weight) + ", re-seeds " + std::to_string(reseeds) + "; AR(2) (" +
                    FormatFixed(fit.lpc[0], 3) + ", " + FormatFixed(fit.lpc[1], 3) +
                    "); k-means acc " + FormatFixed(accuracy, 3) + "; EM mean err " +
                    FormatFixed(mean_err, 3) + ", weight err " + FormatFixed(weight_err, 3))};
}

// 5. LSF structure ------------------------------------------------------------

Outcome LsfStructure(const ExperimentConfig &bench) {
  const Corpus corpus = SynthCorpus(bench.synth, DeriveSeed(*bench.seed, {"corpus"}));
  const FeatureConfig &cfg = bench.feature_config;
  Checker c;
  std::size_t frames = 0, fitted = 0;
  double worst = 0.0;
  for (const auto &u : corpus) {
    const auto lsf = ExtractLsf(u.audio, cfg);
    for (std::size_t t = 0; t < lsf.num_frames(); ++t) {
      const auto row = lsf.values().row(t);
      bool ok = row[0] > 0.0 && row[9] < kPi;
      for (std::size_t i = 1; i < 10; ++i) ok = ok && row[i - 1] < row[i];
      c.Expect(ok, u.speaker + "/" + u.utterance + " frame " + std::to_string(t) + " not ordered");
      ++frames;
    }
    // Inverse check on the same per-frame predictors the extractor fits.
    const auto fs_frames = FrontEndFrames(u.audio, cfg.front_end);
    for (std::size_t t = 0; t < fs_frames.num_frames(); ++t) {
      auto r = Autocorrelation(fs_frames.frames.row(t), 10);
      r[0] *= 1.0 + 1e-9;
      LpcResult fit;
      try {
        fit = LevinsonDurbin(r, 10);
      } catch (const Error &) {
        continue;  // silent frame; the extractor carries the previous LSFs
      }
      const auto back = LsfToLpc(LpcToLsf(fit.lpc));
      double err = 0.0;
      for (std::size_t k = 0; k < 10; ++k) err = std::max(err, std::abs(back[k] - fit.lpc[k]));
      worst = std::max(worst, err);
      c.Expect(err <= 1e-6, u.speaker + "/" + u.utterance + " frame " + std::to_string(t) +
                                " round-trip err " + Sci(err));
      ++fitted;
    }
  }
  return {c.ok(), false,
          c.Summary(std::to_string(frames) + " frames ordered in (0, pi); " + std::to_string(fitted) +
                    " LSF->LPC round trips, worst err " + Sci(worst))};
}

// 6-8. Benchmark ----------------------------------------------------------------

const std::vector<std::string> kMustBePerfect = {"mfcc", "gfcc", "pncc", "plp"};

struct BenchmarkRun {
  EvalReport report;
  std::string report_csv;
  double seconds = 0.0;
};

BenchmarkRun RunBenchmark(ExperimentConfig config, const fs::path &out, int jobs) {
  config.output_dir = out.string();
  const auto start = std::chrono::steady_clock::now();
  BenchmarkRun run;
  run.report = RunGrid(config, jobs);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteRunOutputs(run.report, config, out);
  run.report_csv = Slurp(out / "report.csv");
  return run;
}

// Adjacent-level inversions, walking from clean down through decreasing SNR
// for each noise.
std::size_t Inversions(const EvalReport &r, const std::string &feature) {
  std::size_t count = 0;
  std::vector<std::string> noises;
  for (const auto &cond : r.conditions)
    if (!cond.clean() && std::find(noises.begin(), noises.end(), cond.noise) == noises.end())
      noises.push_back(cond.noise);
  const double clean = r.at({std::string(kCleanCondition), std::nullopt}, feature).ir;
  for (const auto &noise : noises) {
    std::vector<double> snrs;
    for (const auto &cond : r.conditions)
      if (cond.noise == noise) snrs.push_back(*cond.snr_db);
    std::sort(snrs.rbegin(), snrs.rend());
    double previous = clean;
    for (double snr : snrs) {
      const double ir = r.at({noise, snr}, feature).ir;
      if (ir > previous) ++count;
      previous = ir;
    }
  }
  return count;
}

Outcome BenchmarkCriterion(const BenchmarkRun &run, const fs::path &golden, bool pin) {
  Checker c;
  const auto &r = run.report;
  for (const auto &f : kMustBePerfect) {
    const double ir = r.at({std::string(kCleanCondition), std::nullopt}, f).ir;
    c.Expect(ir == 100.0, "clean IR of " + f + " is " + FormatFixed(ir, 2));
  }
  std::string inv;
  for (const auto &f : r.features) {
    const std::size_t n = Inversions(r, f);
    c.Expect(n <= 1, f + " has " + std::to_string(n) + " inversions");
    inv += (inv.empty() ? "" : " ") + f + "=" + std::to_string(n);
  }
  c.Expect(run.seconds < 300.0, "run took " + FormatFixed(run.seconds, 1) + " s");
  std::string golden_note;
  if (pin) {
    fs::create_directories(golden.parent_path());
    std::ofstream(golden, std::ios::binary) << run.report_csv;
    golden_note = "goldens pinned to " + golden.filename().string();
  } else if (!fs::exists(golden)) {
    c.Expect(false, "no golden file " + golden.string() + " (run with --pin)");
  } else {
    const bool same = Slurp(golden) == run.report_csv;
    c.Expect(same, "report.csv differs from " + golden.filename().string());
    golden_note = same ? "matches goldens" : "";
  }
  return {c.ok(), false,
          c.Summary("clean IR 100% for mfcc/gfcc/pncc/plp; inversions " + inv + "; " +
                    golden_note + "; run " + FormatFixed(run.seconds, 1) + " s")};
}

Outcome TrendCriterion(const BenchmarkRun &run) {
  const auto &r = run.report;
  std::vector<std::string> misses;
  for (const auto &cond : r.conditions) {
    if (cond.clean() || (*cond.snr_db != 0.0 && *cond.snr_db != 6.0)) continue;
    const double mfcc = r.at(cond, "mfcc").ir;
    for (const char *f : {"gfcc", "pncc"}) {
      const double v = r.at(cond, f).ir;
      if (v < mfcc)
        misses.push_back(std::string(f) + " " + FormatFixed(v, 2) + " < mfcc " +
                         FormatFixed(mfcc, 2) + " at " + cond.Label());
    }
  }
  if (misses.empty())
    return {true, true, "IR(gfcc) >= IR(mfcc) and IR(pncc) >= IR(mfcc) at 0 and 6 dB"};
  std::cout << "\n"
            << "************************************************************************\n"
            << "WARNING: qualitative trend check not met (soft criterion 7)\n";
  for (const auto &m : misses) std::cout << "  - " << m << '\n';
  std::cout << "Full benchmark table:\n\n"
            << RenderReport(r, ReportFormat::kMarkdown)
            << "************************************************************************\n\n";
  return {false, true, JoinList(misses, "; ")};
}

Outcome Determinism(const BenchmarkRun &first, const BenchmarkRun &second) {
  const bool same = first.report_csv == second.report_csv;
  return {same, false,
          same ? "report.csv byte-identical across two runs (" +
                     std::to_string(first.report_csv.size()) + " bytes)"
               : "report.csv differs between runs"};
}

// Driver ----------------------------------------------------------------------

struct Criterion {
  int id;
  std::string title;
  double budget_s;
};

class Suite {
 public:
  bool Run(const Criterion &cr, const std::function<Outcome()> &fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (s > cr.budget_s && !o.soft) {
      o.pass = false;
      o.details += "; over the " + FormatFixed(cr.budget_s, 0) + " s budget";
    }
    const char *verdict = o.pass ? "PASS" : (o.soft ? "SOFT-FAIL" : "FAIL");
    std::cout << verdict << ' ' << cr.id << "  " << cr.title << ": " << o.details << "  ["
              << FormatFixed(s, 2) << " s / budget " << FormatFixed(cr.budget_s, 0) << " s]"
              << std::endl;
    if (!o.pass && !o.soft) failed_ = true;
    return o.pass;
  }
  bool failed() const { return failed_; }

 private:
  bool failed_ = false;
};

}  // namespace
}  // namespace cepstra

int main(int argc, char **argv) {
  using namespace cepstra;
  CLI::App app{"cepstra acceptance suite"};
  std::string work = "acceptance_work";
  std::string config_path = std::string(CEPSTRA_SOURCE_DIR) + "/configs/benchmark.ini";
  std::string golden = std::string(CEPSTRA_SOURCE_DIR) + "/tests/acceptance/golden/benchmark_report.csv";
  bool pin = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--work", work, "Scratch directory for benchmark outputs")->capture_default_str();
  app.add_option("--config", config_path, "Benchmark config")->capture_default_str();
  app.add_option("--golden", golden, "Pinned benchmark report.csv")->capture_default_str();
  app.add_flag("--pin", pin, "Write the benchmark goldens instead of comparing");
  app.add_option("--jobs", jobs, "Worker threads for the first benchmark run")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  InitLogging();

  Suite suite;
  suite.Run({1, "closed-form scalars", 1}, ClosedFormScalars);
  suite.Run({2, "oracle equivalence", 30}, OracleEquivalence);
  suite.Run({3, "SNR accuracy", 30}, SnrAccuracy);
  suite.Run({4, "EM properties", 120}, EmProperties);

  ExperimentConfig bench;
  try {
    bench = ExperimentConfig::Load(config_path);
    bench.seed = bench.seed.value_or(2026);
  } catch (const std::exception &e) {
    std::cout << "FAIL 5-8  cannot load " << config_path << ": " << e.what() << '\n';
    return 1;
  }
  suite.Run({5, "LSF structure", 60}, [&] { return LsfStructure(bench); });

  std::optional<BenchmarkRun> first, second;
  suite.Run({6, "desk-scale benchmark", 300}, [&] {
    first = RunBenchmark(bench, fs::path(work) / "run1", jobs);
    return BenchmarkCriterion(*first, golden, pin);
  });
  suite.Run({7, "qualitative trend (soft)", 1}, [&] {
    if (!first) return Outcome{false, true, "benchmark did not run"};
    return TrendCriterion(*first);
  });
  suite.Run({8, "determinism", 300}, [&] {
    if (!first) return Outcome{false, false, "benchmark did not run"};
    // A different thread count on the second run also checks that results do
    // not depend on scheduling.
    second = RunBenchmark(bench, fs::path(work) / "run2", jobs == 1 ? 2 : 1);
    return Determinism(*first, *second);
  });
  return suite.failed() ? 1 : 0;
}
