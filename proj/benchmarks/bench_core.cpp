#include <benchmark/benchmark.h>

#include <vector>

#include "cryptoseq/cells.hpp"
#include "cryptoseq/features.hpp"
#include "cryptoseq/matrix.hpp"
#include "cryptoseq/random.hpp"
#include "cryptoseq/sarima.hpp"
#include "cryptoseq/training.hpp"

using namespace cryptoseq;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.next_uniform(-1.0, 1.0);
    return m;
}

void bm_matmul_gate(benchmark::State& state) {
    RandomStream rng(1);
    const Matrix w = random_matrix(50, 65, rng);
    const Matrix u = random_matrix(65, 1, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(w, u));
    }
}
BENCHMARK(bm_matmul_gate);

void bm_matmul_square(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    RandomStream rng(2);
    const Matrix a = random_matrix(n, n, rng);
    const Matrix b = random_matrix(n, n, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(a, b));
    }
}
BENCHMARK(bm_matmul_square)->Arg(16)->Arg(64);

void bm_gru_forward(benchmark::State& state) {
    const NetworkSpec spec = make_spec(ModelFamily::Gru1, 30, 15);
    RandomStream rng(3);
    const RecurrentNetwork net = init_network(spec, rng);
    Matrix window(30, 15);
    for (double& v : window.values()) v = rng.next_uniform(-1.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(net, window, std::nullopt));
    }
}
BENCHMARK(bm_gru_forward);

void bm_gru_forward_backward(benchmark::State& state) {
    const NetworkSpec spec = make_spec(ModelFamily::Gru1, 30, 15);
    RandomStream rng(4);
    const RecurrentNetwork net = init_network(spec, rng);
    Matrix window(30, 15);
    for (double& v : window.values()) v = rng.next_uniform(-1.0, 1.0);
    for (auto _ : state) {
        const ForwardTape tape = forward(net, window, std::nullopt);
        benchmark::DoNotOptimize(backward(net, tape, 1.0, std::nullopt));
    }
}
BENCHMARK(bm_gru_forward_backward);

void bm_lstm_forward_backward(benchmark::State& state) {
    const NetworkSpec spec = make_spec(ModelFamily::Lstm1, 30, 15);
    RandomStream rng(5);
    const RecurrentNetwork net = init_network(spec, rng);
    Matrix window(30, 15);
    for (double& v : window.values()) v = rng.next_uniform(-1.0, 1.0);
    for (auto _ : state) {
        const ForwardTape tape = forward(net, window, std::nullopt);
        benchmark::DoNotOptimize(backward(net, tape, 1.0, std::nullopt));
    }
}
BENCHMARK(bm_lstm_forward_backward);

void bm_css_loss(benchmark::State& state) {
    RandomStream rng(6);
    std::vector<double> y(2000);
    y[0] = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        y[t] = 0.6 * y[t - 1] + rng.next_normal();
    }
    const sarima::SarimaOrder order{1, 0, 1, 1, 0, 1, 7};
    sarima::SarimaCoefficients coeffs;
    coeffs.ar = {0.5};
    coeffs.ma = {0.2};
    coeffs.sar = {0.1};
    coeffs.sma = {0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sarima::css_loss(y, order, coeffs));
    }
}
BENCHMARK(bm_css_loss);

void bm_macd(benchmark::State& state) {
    RandomStream rng(7);
    std::vector<double> price(100000);
    double level = 100.0;
    for (double& v : price) {
        level *= 1.0 + rng.next_uniform(-0.01, 0.01);
        v = level;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(macd(price));
    }
}
BENCHMARK(bm_macd);

void bm_spearman(benchmark::State& state) {
    RandomStream rng(8);
    std::vector<double> x(2000), y(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_uniform(-1.0, 1.0);
        y[i] = rng.next_uniform(-1.0, 1.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(spearman(x, y));
    }
}
BENCHMARK(bm_spearman);

} // namespace

BENCHMARK_MAIN();
