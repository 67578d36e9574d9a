// Compares the serial reference ensemble against the OpenMP kernels on a
// mid-size workload and checks that the two reductions agree bitwise.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdemi/mmse_info.hpp"

namespace {

double run_once(const sdemi::SystemCatalogEntry& entry, const sdemi::EnsembleSpec& spec,
                sdemi::Execution exec, sdemi::EnsembleResult& out) {
  sdemi::EnsembleOptions options;
  options.execution = exec;
  const auto t0 = std::chrono::steady_clock::now();
  out = sdemi::run_ensemble(entry, spec, options);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

int main(int argc, char** argv) {
  int replicates = 2000;
  std::string system_id = "awgn-bpsk";
  if (argc > 1) replicates = std::atoi(argv[1]);
  if (argc > 2) system_id = argv[2];

  const auto entries = sdemi::catalog();
  const auto& entry = sdemi::find_entry(entries, system_id);

  sdemi::EnsembleSpec spec;
  spec.system_id = entry.id;
  spec.n_replicates = replicates;
  spec.master_seed = 7;
  spec.grid = sdemi::TimeGrid(1.0, 200);
  spec.r_grid = {0.5, 1.0};

  sdemi::EnsembleResult serial, parallel;
  const double t_serial = run_once(entry, spec, sdemi::Execution::Serial, serial);
  const double t_parallel = run_once(entry, spec, sdemi::Execution::OpenMp, parallel);

  int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
#endif

  const bool same = bitwise_equal(serial.surface.cmmse, parallel.surface.cmmse) &&
                    bitwise_equal(serial.surface.ncmmse, parallel.surface.ncmmse) &&
                    bitwise_equal(serial.info.ii_direct, parallel.info.ii_direct);

  std::printf("system            %s\n", system_id.c_str());
  std::printf("replicates        %d\n", replicates);
  std::printf("threads           %d\n", threads);
  std::printf("serial            %8.3f s\n", t_serial);
  std::printf("openmp            %8.3f s\n", t_parallel);
  std::printf("speedup           %8.2fx\n", t_serial / t_parallel);
  std::printf("bitwise identical %s\n", same ? "yes" : "NO");
  return same ? 0 : 1;
}
