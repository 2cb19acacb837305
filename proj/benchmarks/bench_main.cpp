#include <vector>

#include <benchmark/benchmark.h>

#include "pinnlab/autodiff.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/presets.hpp"
#include "pinnlab/trainer.hpp"

using namespace pinnlab;

namespace {

MlpConfig reference_mlp() {
    MlpConfig c;
    c.hidden_layers = 4;
    c.neurons_per_layer = 32;
    return c;
}

void BM_TapeTanhChain(benchmark::State& state) {
    ad::Tape tape;
    for (auto _ : state) {
        tape.clear();
        ad::NodeRef x = tape.leaf(0.3);
        for (int i = 0; i < state.range(0); ++i) x = tape.tanh(tape.add(x, x));
        benchmark::DoNotOptimize(tape.backward(x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TapeTanhChain)->Arg(1 << 10)->Arg(1 << 14);

void BM_ForwardT2(benchmark::State& state) {
    const MlpConfig c = reference_mlp();
    const ParamVector p = init_params(c);
    ad::Tape tape;
    for (auto _ : state) {
        tape.clear();
        const BoundNetwork net(tape, p, c);
        for (int i = 0; i < state.range(0); ++i) benchmark::DoNotOptimize(net.forward_t2(tape, 0.01 * i));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardT2)->Arg(1)->Arg(150);

void BM_Predict(benchmark::State& state) {
    const MlpConfig c = reference_mlp();
    const ParamVector p = init_params(c);
    std::vector<double> times(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = 0.01 * static_cast<double>(i);
    for (auto _ : state) benchmark::DoNotOptimize(predict(p, c, times));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Predict)->Arg(600);

// Full training steps at the forward reference size; time per step is the
// reported time divided by the step count.
void BM_TrainSteps(benchmark::State& state) {
    const Preset& preset = find_preset(state.range(1) == 0 ? "table1-eq2-fp" : "table1-eq2-ip");
    const Dataset ds = generate_dataset(preset.simulation);
    TrainConfig c = preset.config;
    c.steps = static_cast<int>(state.range(0));
    c.log_every = c.steps;
    for (auto _ : state) benchmark::DoNotOptimize(train(c, ds, preset.simulation.circuit));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainSteps)->Args({20, 0})->Args({5, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
