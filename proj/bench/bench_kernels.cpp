// Times each OpenMP kernel against its serial reference on the same input
// and reports the largest absolute difference between the two outputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "neurolock/baseline_features.hpp"
#include "neurolock/connectivity.hpp"
#include "neurolock/dsp.hpp"
#include "neurolock/graph_features.hpp"
#include "neurolock/matching_eval.hpp"
#include "neurolock/rng.hpp"
#include "neurolock/serial.hpp"

using namespace neurolock;

namespace {

double best_ms(int reps, const std::function<void()>& f) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

double max_diff(const RowMatrix& a, const RowMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::fabs(a(i, j) - b(i, j)));
  return d;
}

void row(const char* name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-18s %10.3f %10.3f %8.2fx %12.3g\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timings"};
  int reps = 3;
  std::size_t channels = 64;
  app.add_option("-r,--reps", reps, "repetitions (best time is kept)")->capture_default_str();
  app.add_option("-c,--channels", channels, "channels / graph nodes")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);
  std::printf("%-18s %10s %10s %9s %12s\n", "kernel", "serial ms", "omp ms", "speedup", "max |diff|");

  Rng rng(42);
  Recording rec;
  rec.fs = 160.0;
  rec.data = RowMatrix(channels, 9600);
  for (std::size_t c = 0; c < channels; ++c) {
    rec.channels.push_back("C" + std::to_string(c));
    for (std::size_t t = 0; t < 9600; ++t) rec.data(c, t) = rng.normal();
  }
  const FirFilter fir = design_bandpass(160.0, 13.0, 30.0, 330);
  Recording fs_out, fp_out;
  const double fs_ms = best_ms(reps, [&] { fs_out = serial::filter_zero_phase(rec, fir); });
  const double fp_ms = best_ms(reps, [&] { fp_out = filter_zero_phase(rec, fir); });
  row("filter_zero_phase", fs_ms, fp_ms, max_diff(fs_out.data, fp_out.data));

  RowMatrix phase(channels, 320);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < 320; ++t) phase(c, t) = rng.uniform(-M_PI, M_PI);
  ConnectivityGraph gs, gp;
  const double gs_ms = best_ms(reps, [&] { gs = serial::build_graph(phase); });
  const double gp_ms = best_ms(reps, [&] { gp = build_graph(phase); });
  row("build_graph", gs_ms, gp_ms, max_diff(gs.adjacency, gp.adjacency));

  RowMatrix ds_out, dp_out;
  const double ds_ms = best_ms(reps, [&] { ds_out = serial::distance_matrix(gp); });
  const double dp_ms = best_ms(reps, [&] { dp_out = distance_matrix(gp); });
  row("distance_matrix", ds_ms, dp_ms, max_diff(ds_out, dp_out));

  const auto x = rec.data.row(0).subspan(0, 2000);
  double es = 0.0, ep = 0.0;
  const double es_ms = best_ms(reps, [&] { es = serial::fuzzy_entropy(x); });
  const double ep_ms = best_ms(reps, [&] { ep = fuzzy_entropy(x); });
  row("fuzzy_entropy", es_ms, ep_ms, std::fabs(es - ep));

  std::vector<BitString> q(400), r(400);
  std::vector<std::vector<std::uint8_t>> qb(400), rb(400);
  for (std::size_t i = 0; i < 400; ++i) {
    q[i].bit_count = r[i].bit_count = 8 * 35;
    for (int k = 0; k < 35; ++k) {
      q[i].bytes.push_back(static_cast<std::uint8_t>(rng.below(256)));
      r[i].bytes.push_back(static_cast<std::uint8_t>(rng.below(256)));
    }
    qb[i] = q[i].bytes;
    rb[i] = r[i].bytes;
  }
  RowMatrix hs, hp;
  const double hs_ms = best_ms(reps, [&] { hs = serial::hamming_matrix(qb, rb); });
  const double hp_ms = best_ms(reps, [&] { hp = score_matrix(q, r); });
  row("score_matrix", hs_ms, hp_ms, max_diff(hs, hp));
  return 0;
}
