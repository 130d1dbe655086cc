#include <benchmark/benchmark.h>

#include "lux/analytic.hpp"
#include "lux/bifurcation.hpp"
#include "lux/model.hpp"
#include "lux/oracle.hpp"
#include "lux/shooting.hpp"

namespace {

lux::ScaledParams reference_point() {
    lux::ScaledParams sp;
    sp.mu_bar = 3.0;
    sp.r = 5.0 / 12.0;
    sp.T = 12.0;
    sp.T_light = 6.0;
    return sp;
}

void bm_light_phase_flow(benchmark::State& state) {
    const lux::ScaledParams sp = reference_point();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lux::light_phase_flow(0.053232, 0.0, 2.195788, sp));
    }
}
BENCHMARK(bm_light_phase_flow);

void bm_light_phase_time(benchmark::State& state) {
    const lux::ScaledParams sp = reference_point();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lux::light_phase_time(1.6832815730, 1.299081, 1.0, sp));
    }
}
BENCHMARK(bm_light_phase_time);

void bm_residuals_bsb(benchmark::State& state) {
    const lux::ScaledParams sp = reference_point();
    lux::Unknowns q;
    q.y0 = 0.053232;
    q.lambda0 = 9.120466;
    q.t0s = 2.195788;
    q.ts1 = 4.642862;
    q.y_bar = 1.299081;
    q.lambda_bar = 0.815802;
    q.t10 = 6.694750;
    q.y10 = 0.485502;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lux::residuals_bang_singular_bang(q, sp));
    }
}
BENCHMARK(bm_residuals_bsb);

void bm_solve_bsb(benchmark::State& state) {
    const lux::ScaledParams sp = reference_point();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            lux::solve_candidate(lux::StructureKind::BangSingularBang, sp));
    }
}
BENCHMARK(bm_solve_bsb)->Unit(benchmark::kMillisecond);

void bm_classify_cell(benchmark::State& state) {
    lux::PhysicalParams p;
    p.D_max = 12.0;
    p.T_cal = 1.0;
    p.T_light = 0.5;
    p.kappa = 1.0;
    p.nu_bar = 36.0;
    p.rho = 5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lux::classify(p));
    }
}
BENCHMARK(bm_classify_cell)->Unit(benchmark::kMillisecond);

void bm_oracle_coarse(benchmark::State& state) {
    const lux::ScaledParams sp = reference_point();
    lux::OracleConfig cfg;
    cfg.n_time = 300;
    cfg.n_state = 150;
    cfg.u_levels = 7;
    cfg.y0_scan = 8;
    cfg.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lux::dp_optimize(sp, cfg));
    }
}
BENCHMARK(bm_oracle_coarse)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
