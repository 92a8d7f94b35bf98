#include <doctest.h>

#include <cmath>
#include <functional>

#include "dic/layers.hpp"
#include "dic/optim.hpp"
#include "dic/rng.hpp"

using namespace dic;

namespace {

// Finite-difference oracle: compares the analytic gradient of a scalar
// projection loss dot(forward(), proj) against central differences.
// step 1e-3, accumulation in double.
constexpr double kStep = 1e-3;
constexpr double kRelTol = 1e-3;
constexpr double kAbsTol = 1e-5;

double dot_proj(const Tensor& out, const std::vector<double>& proj) {
    double acc = 0.0;
    for (int64_t i = 0; i < out.numel(); ++i) acc += static_cast<double>(out.data[i]) * proj[i];
    return acc;
}

void fill_uniform(Tensor& t, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
    for (auto& v : t.data) v = static_cast<float>(lo + rng.uniform() * (hi - lo));
}

// fwd() must evaluate the layer on the current tensor values.
// analytic: map tensor -> its analytic gradient buffer.
void check_tensor_grad(Tensor& t, const std::vector<float>& analytic,
                       const std::function<double()>& loss) {
    for (size_t i = 0; i < t.data.size(); ++i) {
        const float orig = t.data[i];
        t.data[i] = static_cast<float>(orig + kStep);
        const double lp = loss();
        t.data[i] = static_cast<float>(orig - kStep);
        const double lm = loss();
        t.data[i] = orig;
        const double fd = (lp - lm) / (2.0 * kStep);
        const double a = analytic[i];
        const double tol = kAbsTol + kRelTol * std::max(std::abs(a), std::abs(fd));
        CHECK(std::abs(a - fd) <= tol);
    }
}

// The finite-difference oracle differentiates an independent double-precision
// reference forward written here in the test, so the comparison is free of
// float32 rounding noise; the layer's float forward is separately required to
// agree with the reference.
using DVec = std::vector<double>;

DVec to_double(const Tensor& t) { return DVec(t.data.begin(), t.data.end()); }

void check_grad_vs_ref(DVec& v, const std::vector<float>& analytic,
                       const std::function<double()>& ref_loss) {
    for (size_t i = 0; i < v.size(); ++i) {
        const double orig = v[i];
        v[i] = orig + kStep;
        const double lp = ref_loss();
        v[i] = orig - kStep;
        const double lm = ref_loss();
        v[i] = orig;
        const double fd = (lp - lm) / (2.0 * kStep);
        const double a = analytic[i];
        const double tol = kAbsTol + kRelTol * std::max(std::abs(a), std::abs(fd));
        CHECK(std::abs(a - fd) <= tol);
    }
}

DVec ref_conv1d(const DVec& x, const DVec& w, const DVec& b, int B, int cin, int cout, int L,
                int k) {
    DVec y(static_cast<size_t>(B) * cout * L);
    const int half = k / 2;
    for (int n = 0; n < B; ++n) {
        for (int o = 0; o < cout; ++o) {
            for (int t = 0; t < L; ++t) {
                double acc = b[o];
                for (int c = 0; c < cin; ++c) {
                    for (int j = 0; j < k; ++j) {
                        const int src = t + j - half;
                        if (src < 0 || src >= L) continue;
                        acc += w[(static_cast<size_t>(o) * cin + c) * k + j] *
                               x[(static_cast<size_t>(n) * cin + c) * L + src];
                    }
                }
                y[(static_cast<size_t>(n) * cout + o) * L + t] = acc;
            }
        }
    }
    return y;
}

DVec ref_bn_train(const DVec& x, const DVec& gamma, const DVec& beta, int B, int C, int L,
                  double eps) {
    DVec y(x.size());
    const double n = static_cast<double>(B) * L;
    for (int c = 0; c < C; ++c) {
        double mean = 0.0;
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < L; ++t) mean += x[(static_cast<size_t>(b) * C + c) * L + t];
        }
        mean /= n;
        double var = 0.0;
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < L; ++t) {
                const double d = x[(static_cast<size_t>(b) * C + c) * L + t] - mean;
                var += d * d;
            }
        }
        var /= n;
        const double invstd = 1.0 / std::sqrt(var + eps);
        for (int b = 0; b < B; ++b) {
            for (int t = 0; t < L; ++t) {
                const size_t i = (static_cast<size_t>(b) * C + c) * L + t;
                y[i] = gamma[c] * (x[i] - mean) * invstd + beta[c];
            }
        }
    }
    return y;
}

DVec ref_lstm(const DVec& x, const DVec& wi, const DVec& wh, const DVec& b, int B, int T, int F,
              int H) {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    DVec y(static_cast<size_t>(B) * T * H);
    for (int n = 0; n < B; ++n) {
        DVec h(H, 0.0), c(H, 0.0);
        for (int t = 0; t < T; ++t) {
            DVec hn(H);
            for (int u = 0; u < H; ++u) {
                double pre[4];  // gates: input, forget, cell, output
                for (int g = 0; g < 4; ++g) {
                    const int row = g * H + u;
                    double acc = b[row];
                    for (int f = 0; f < F; ++f) {
                        acc += wi[static_cast<size_t>(row) * F + f] *
                               x[(static_cast<size_t>(n) * T + t) * F + f];
                    }
                    for (int v = 0; v < H; ++v) {
                        acc += wh[static_cast<size_t>(row) * H + v] * h[v];
                    }
                    pre[g] = acc;
                }
                const double gi = sig(pre[0]), gf = sig(pre[1]);
                const double gg = std::tanh(pre[2]), go = sig(pre[3]);
                c[u] = gf * c[u] + gi * gg;
                hn[u] = go * std::tanh(c[u]);
                y[(static_cast<size_t>(n) * T + t) * H + u] = hn[u];
            }
            h = hn;
        }
    }
    return y;
}

double dot_dvec(const DVec& out, const std::vector<double>& proj) {
    double acc = 0.0;
    for (size_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
    return acc;
}

void check_forward_close(const Tensor& got, const DVec& ref, double tol = 1e-4) {
    REQUIRE(static_cast<size_t>(got.numel()) == ref.size());
    for (size_t i = 0; i < ref.size(); ++i) {
        CHECK(std::abs(static_cast<double>(got.data[i]) - ref[i]) <= tol);
    }
}

std::vector<double> random_proj(int64_t n, SplitMix64& rng) {
    std::vector<double> p(n);
    for (auto& v : p) v = rng.uniform() * 2.0 - 1.0;
    return p;
}

}  // namespace

TEST_CASE("conv1d forward basics") {
    SUBCASE("k=1 identity") {
        Conv1d conv(1, 1, 1);
        conv.weight.data = {1.0f};
        conv.bias.data = {0.0f};
        Tensor x({1, 1, 4});
        x.data = {1, 2, 3, 4};
        auto y = conv.forward(x);
        CHECK(y.data == x.data);
    }
    SUBCASE("k=3 same padding, box kernel") {
        Conv1d conv(1, 1, 3);
        conv.weight.data = {1.0f, 1.0f, 1.0f};
        conv.bias.data = {0.0f};
        Tensor x({1, 1, 3});
        x.data = {1, 2, 3};
        auto y = conv.forward(x);
        CHECK(y.data == std::vector<float>{3, 6, 5});
    }
    SUBCASE("zero input gives broadcast bias") {
        Conv1d conv(2, 3, 3);
        SplitMix64 rng(1);
        conv.init(rng);
        conv.bias.data = {0.5f, -0.25f, 1.0f};
        Tensor x({2, 2, 5});
        auto y = conv.forward(x);
        for (int64_t b = 0; b < 2; ++b) {
            for (int o = 0; o < 3; ++o) {
                for (int t = 0; t < 5; ++t) {
                    CHECK(y.data[(b * 3 + o) * 5 + t] == conv.bias.data[o]);
                }
            }
        }
    }
    SUBCASE("shape mismatch rejected") {
        Conv1d conv(2, 3, 3);
        Tensor x({1, 1, 4});
        CHECK_THROWS(conv.forward(x));
        CHECK_THROWS(conv.backward(x));  // backward without forward
    }
}

TEST_CASE("conv1d gradients match finite differences") {
    SplitMix64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const int B = 1 + static_cast<int>(rng.next() % 2);
        const int cin = 1 + static_cast<int>(rng.next() % 3);
        const int cout = 1 + static_cast<int>(rng.next() % 3);
        const int L = 3 + static_cast<int>(rng.next() % 6);
        const int k = (rng.next() % 2) ? 3 : 1;
        Conv1d conv(cin, cout, k);
        conv.init(rng);
        fill_uniform(conv.weight, rng);
        fill_uniform(conv.bias, rng);
        Tensor x({B, cin, L});
        fill_uniform(x, rng);
        auto proj = random_proj(static_cast<int64_t>(B) * cout * L, rng);

        DVec xd = to_double(x), wd = to_double(conv.weight), bd = to_double(conv.bias);
        auto loss = [&]() {
            return dot_dvec(ref_conv1d(xd, wd, bd, B, cin, cout, L, k), proj);
        };

        conv.weight.zero_grad();
        conv.bias.zero_grad();
        check_forward_close(conv.forward(x), ref_conv1d(xd, wd, bd, B, cin, cout, L, k));
        Tensor up({B, cout, L});
        for (int64_t i = 0; i < up.numel(); ++i) up.data[i] = static_cast<float>(proj[i]);
        Tensor gx = conv.backward(up);

        check_grad_vs_ref(xd, gx.data, loss);
        check_grad_vs_ref(wd, conv.weight.grad, loss);
        check_grad_vs_ref(bd, conv.bias.grad, loss);
    }
}

TEST_CASE("conv1d zero upstream gives zero grads; k=1 identity passes grad through") {
    Conv1d conv(1, 1, 1);
    conv.weight.data = {1.0f};
    conv.bias.data = {0.0f};
    Tensor x({1, 1, 4});
    x.data = {1, -2, 3, -4};
    conv.forward(x);
    Tensor up({1, 1, 4});
    Tensor gx = conv.backward(up);
    for (float g : conv.weight.grad) CHECK(g == 0.0f);
    for (float g : gx.data) CHECK(g == 0.0f);

    conv.forward(x);
    up.data = {1, 2, 3, 4};
    gx = conv.backward(up);
    CHECK(gx.data == up.data);
}

TEST_CASE("batchnorm1d forward semantics") {
    SplitMix64 rng(7);
    BatchNorm1d bn(3);
    Tensor x({4, 3, 5});
    fill_uniform(x, rng, -2.0, 3.0);
    auto y = bn.forward(x, /*train=*/true);
    // per-channel mean 0, variance 1 pre-affine (gamma=1, beta=0 initially)
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0, sq = 0.0;
        for (int b = 0; b < 4; ++b) {
            for (int t = 0; t < 5; ++t) {
                const double v = y.data[(b * 3 + c) * 5 + t];
                sum += v;
                sq += v * v;
            }
        }
        const double mean = sum / 20.0;
        CHECK(std::abs(mean) < 1e-4);
        CHECK(std::abs(sq / 20.0 - mean * mean - 1.0) < 1e-3);
    }

    SUBCASE("constant input normalizes to zero") {
        Tensor cx({2, 3, 4});
        std::fill(cx.data.begin(), cx.data.end(), 1.5f);
        auto cy = bn.forward(cx, true);
        for (float v : cy.data) CHECK(std::abs(v) < 1e-2);
    }
    SUBCASE("infer before any update throws; works after one train step") {
        BatchNorm1d fresh(3);
        CHECK_THROWS_AS(fresh.forward(x, false), std::logic_error);
        fresh.forward(x, true);
        CHECK_NOTHROW(fresh.forward(x, false));
    }
    SUBCASE("infer is batch invariant") {
        bn.forward(x, true);
        auto full = bn.forward(x, false);
        Tensor single({1, 3, 5});
        std::copy(x.data.begin(), x.data.begin() + 15, single.data.begin());
        auto one = bn.forward(single, false);
        for (int i = 0; i < 15; ++i) CHECK(one.data[i] == full.data[i]);
    }
}

TEST_CASE("batchnorm1d gradients match finite differences") {
    SplitMix64 rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        const int B = 2 + static_cast<int>(rng.next() % 2);
        const int C = 1 + static_cast<int>(rng.next() % 3);
        const int L = 2 + static_cast<int>(rng.next() % 6);
        BatchNorm1d bn(C);
        fill_uniform(bn.gamma, rng, 0.5, 1.5);
        fill_uniform(bn.beta, rng, -0.5, 0.5);
        Tensor x({B, C, L});
        fill_uniform(x, rng, -2.0, 2.0);
        auto proj = random_proj(static_cast<int64_t>(B) * C * L, rng);

        DVec xd = to_double(x), gd = to_double(bn.gamma), bd = to_double(bn.beta);
        auto loss = [&]() { return dot_dvec(ref_bn_train(xd, gd, bd, B, C, L, bn.eps), proj); };

        bn.gamma.zero_grad();
        bn.beta.zero_grad();
        check_forward_close(bn.forward(x, true), ref_bn_train(xd, gd, bd, B, C, L, bn.eps));
        Tensor up({B, C, L});
        for (int64_t i = 0; i < up.numel(); ++i) up.data[i] = static_cast<float>(proj[i]);
        Tensor gx = bn.backward(up);

        check_grad_vs_ref(xd, gx.data, loss);
        check_grad_vs_ref(gd, bn.gamma.grad, loss);
        check_grad_vs_ref(bd, bn.beta.grad, loss);
    }
}

TEST_CASE("relu forward/backward") {
    Relu r;
    Tensor x({1, 1, 3});
    x.data = {-1, 0, 2};
    auto y = r.forward(x);
    CHECK(y.data == std::vector<float>{0, 0, 2});

    Tensor up({1, 1, 3});
    up.data = {5, 7, 9};
    auto gx = r.backward(up);
    CHECK(gx.data == std::vector<float>{0, 0, 9});

    // non-negative input: identity
    x.data = {0.5f, 1.0f, 2.0f};
    CHECK(r.forward(x).data == x.data);

    // finite-difference away from the kink
    SplitMix64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor xr({1, 2, 4});
        for (auto& v : xr.data) {
            double u = rng.uniform() * 2.0 - 1.0;
            v = static_cast<float>(u + (u >= 0 ? 0.1 : -0.1));  // keep clear of 0
        }
        auto proj = random_proj(8, rng);
        auto loss = [&]() { return dot_proj(r.forward(xr), proj); };
        r.forward(xr);
        Tensor upr({1, 2, 4});
        for (int64_t i = 0; i < 8; ++i) upr.data[i] = static_cast<float>(proj[i]);
        auto g = r.backward(upr);
        check_tensor_grad(xr, g.data, loss);
    }
}

TEST_CASE("lstm forward semantics") {
    SUBCASE("all-zero parameters give all-zero output") {
        Lstm lstm(3, 2);
        Tensor x({2, 4, 3});
        SplitMix64 rng(3);
        fill_uniform(x, rng);
        auto y = lstm.forward(x);
        for (float v : y.data) CHECK(v == 0.0f);
    }
    SUBCASE("single step scalar matches hand-computed gate arithmetic") {
        Lstm lstm(1, 1);
        lstm.w_input.data = {0.5f, -0.3f, 0.8f, 0.2f};   // W_i, W_f, W_g, W_o
        lstm.w_hidden.data = {0.1f, 0.1f, 0.1f, 0.1f};   // unused at t=0 (h=0)
        lstm.bias.data = {0.05f, 1.0f, -0.1f, 0.3f};
        Tensor x({1, 1, 1});
        x.data = {0.7f};
        auto y = lstm.forward(x);
        auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
        const double i = sig(0.5 * 0.7 + 0.05);
        const double f = sig(-0.3 * 0.7 + 1.0);
        const double g = std::tanh(0.8 * 0.7 - 0.1);
        const double o = sig(0.2 * 0.7 + 0.3);
        (void)f;  // cell starts at zero
        const double c = i * g;
        const double h = o * std::tanh(c);
        CHECK(std::abs(y.data[0] - h) < 1e-6);
    }
    SUBCASE("|h| bounded by 1") {
        Lstm lstm(4, 3);
        SplitMix64 rng(9);
        lstm.init(rng);
        for (auto& v : lstm.w_input.data) v *= 10.0f;
        Tensor x({2, 8, 4});
        fill_uniform(x, rng, -5.0, 5.0);
        auto y = lstm.forward(x);
        for (float v : y.data) CHECK(std::abs(v) <= 1.0f);
    }
    SUBCASE("shape mismatch") {
        Lstm lstm(4, 3);
        Tensor x({1, 2, 5});
        CHECK_THROWS(lstm.forward(x));
        CHECK_THROWS(lstm.backward(x));
    }
}

TEST_CASE("lstm gradients match finite differences (BPTT)") {
    SplitMix64 rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        const int B = 1 + static_cast<int>(rng.next() % 2);
        const int T = 1 + static_cast<int>(rng.next() % 8);
        const int F = 1 + static_cast<int>(rng.next() % 5);
        const int H = 1 + static_cast<int>(rng.next() % 5);
        Lstm lstm(F, H);
        lstm.init(rng);
        Tensor x({B, T, F});
        fill_uniform(x, rng);
        auto proj = random_proj(static_cast<int64_t>(B) * T * H, rng);

        DVec xd = to_double(x), wid = to_double(lstm.w_input), whd = to_double(lstm.w_hidden),
             bd = to_double(lstm.bias);
        auto loss = [&]() { return dot_dvec(ref_lstm(xd, wid, whd, bd, B, T, F, H), proj); };

        for (Tensor* p : lstm.parameters()) p->zero_grad();
        check_forward_close(lstm.forward(x), ref_lstm(xd, wid, whd, bd, B, T, F, H));
        Tensor up({B, T, H});
        for (int64_t i = 0; i < up.numel(); ++i) up.data[i] = static_cast<float>(proj[i]);
        Tensor gx = lstm.backward(up);

        check_grad_vs_ref(xd, gx.data, loss);
        check_grad_vs_ref(wid, lstm.w_input.grad, loss);
        check_grad_vs_ref(whd, lstm.w_hidden.grad, loss);
        check_grad_vs_ref(bd, lstm.bias.grad, loss);
    }
}

TEST_CASE("lstm zero upstream gives zero grads") {
    Lstm lstm(2, 3);
    SplitMix64 rng(4);
    lstm.init(rng);
    Tensor x({1, 4, 2});
    fill_uniform(x, rng);
    for (Tensor* p : lstm.parameters()) p->zero_grad();
    lstm.forward(x);
    Tensor up({1, 4, 3});
    auto gx = lstm.backward(up);
    for (float g : gx.data) CHECK(g == 0.0f);
    for (Tensor* p : lstm.parameters()) {
        for (float g : p->grad) CHECK(g == 0.0f);
    }
}

TEST_CASE("mse loss") {
    Tensor a({2}), b({2});
    a.data = {1, 1};
    CHECK(mse_loss(a, a) == 0.0);
    CHECK(mse_loss(a, b) == doctest::Approx(1.0));

    SplitMix64 rng(6);
    Tensor p({3, 4}), t({3, 4});
    fill_uniform(p, rng);
    fill_uniform(t, rng);
    Tensor g = mse_loss_grad(p, t);
    for (size_t i = 0; i < p.data.size(); ++i) {
        const float orig = p.data[i];
        p.data[i] = static_cast<float>(orig + kStep);
        const double lp = mse_loss(p, t);
        p.data[i] = static_cast<float>(orig - kStep);
        const double lm = mse_loss(p, t);
        p.data[i] = orig;
        const double fd = (lp - lm) / (2.0 * kStep);
        CHECK(std::abs(g.data[i] - fd) <= kAbsTol + kRelTol * std::abs(fd));
    }
    Tensor wrong({5});
    CHECK_THROWS(mse_loss(p, wrong));
}

TEST_CASE("adam") {
    SUBCASE("zero grad leaves params unchanged") {
        Tensor w({3});
        w.data = {1, 2, 3};
        w.enable_grad();
        Adam opt({&w}, 0.1);
        opt.step();
        CHECK(w.data == std::vector<float>{1, 2, 3});
    }
    SUBCASE("first step matches the hand formula") {
        Tensor w({1});
        w.data = {0.5f};
        w.enable_grad();
        w.grad = {0.2f};
        const double lr = 0.01, eps = 1e-8;
        Adam opt({&w}, lr);
        opt.step();
        // bias-corrected first step: mhat=g, vhat=g^2
        const double expected = 0.5 - lr * 0.2 / (std::sqrt(0.04) + eps);
        CHECK(std::abs(w.data[0] - expected) < 1e-7);
    }
    SUBCASE("quadratic bowl: strictly decreasing loss over 100 steps") {
        Tensor w({1});
        w.data = {1.0f};
        w.enable_grad();
        Adam opt({&w}, 0.01);
        double prev = 1.0;
        for (int i = 0; i < 100; ++i) {
            w.grad[0] = 2.0f * w.data[0];
            opt.step();
            const double loss = static_cast<double>(w.data[0]) * w.data[0];
            CHECK(loss < prev);
            prev = loss;
        }
    }
}

TEST_CASE("gradient clipping by global norm") {
    Tensor a({2}), b({1});
    a.enable_grad();
    b.enable_grad();
    a.grad = {3.0f, 0.0f};
    b.grad = {4.0f};
    const double norm = clip_grad_norm({&a, &b}, 5.0);
    CHECK(norm == doctest::Approx(5.0));
    CHECK(a.grad[0] == doctest::Approx(3.0f));
    a.grad = {30.0f, 0.0f};
    b.grad = {40.0f};
    clip_grad_norm({&a, &b}, 5.0);
    CHECK(a.grad[0] == doctest::Approx(3.0f));
    CHECK(b.grad[0] == doctest::Approx(4.0f));
}

TEST_CASE("determinism and finiteness") {
    SplitMix64 rng(777);
    Lstm l1(4, 4), l2(4, 4);
    SplitMix64 r1(42), r2(42);
    l1.init(r1);
    l2.init(r2);
    CHECK(l1.w_input.data == l2.w_input.data);
    Tensor x({2, 6, 4});
    fill_uniform(x, rng, -1000.0, 1000.0);
    auto y1 = l1.forward(x);
    auto y2 = l2.forward(x);
    CHECK(y1.data == y2.data);
    CHECK(y1.all_finite());

    Tensor bad({2});
    bad.data = {1.0f, std::numeric_limits<float>::quiet_NaN()};
    CHECK_FALSE(bad.all_finite());
}
