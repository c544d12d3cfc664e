#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "ilgaco/error.hpp"
#include "ilgaco/kernels.hpp"
#include "ilgaco/rng.hpp"

namespace {

using ilgaco::Rng;
namespace kn = ilgaco::kernels;

std::vector<double> random_vec(Rng& rng, size_t n, bool with_negatives = true) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = with_negatives ? rng.normal() : std::abs(rng.normal());
    }
    return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

// Runs a small gradient-descent-with-Adam loop on a least-squares problem
// using only backend kernels, so accumulated results can be compared across
// backends bit for bit.
std::vector<double> least_squares_trace(const kn::Backend& be, size_t rows, size_t cols,
                                        int iterations) {
    Rng rng(1234);
    std::vector<double> a = random_vec(rng, rows * cols);
    std::vector<double> at(cols * rows);
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            at[j * rows + i] = a[i * cols + j];
        }
    }
    std::vector<double> y = random_vec(rng, rows);
    std::vector<double> w(cols, 0.0), m(cols, 0.0), v(cols, 0.0);
    std::vector<double> pred(rows), grad(cols);
    for (int t = 1; t <= iterations; ++t) {
        std::fill(pred.begin(), pred.end(), 0.0);
        be.matmul_acc(a.data(), w.data(), pred.data(), rows, cols, 1);
        be.axpy(-1.0, y.data(), pred.data(), rows);  // pred - y
        std::fill(grad.begin(), grad.end(), 0.0);
        be.matmul_acc(at.data(), pred.data(), grad.data(), cols, rows, 1);
        be.adam_update(w.data(), m.data(), v.data(), grad.data(), cols, 0.05, 0.9, 0.999,
                       1e-8, 1.0 - std::pow(0.9, t), 1.0 - std::pow(0.999, t));
    }
    return w;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul_acc computes a hand-checked product and accumulates into c") {
    // a = [[1 2 3],[4 5 6]], b = [[7 8],[9 10],[11 12]]
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> b{7, 8, 9, 10, 11, 12};
    std::vector<double> c{100, 200, 300, 400};  // pre-seeded: must accumulate
    kn::scalar_backend().matmul_acc(a.data(), b.data(), c.data(), 2, 3, 2);
    CHECK(c[0] == 100 + 58);
    CHECK(c[1] == 200 + 64);
    CHECK(c[2] == 300 + 139);
    CHECK(c[3] == 400 + 154);
}

TEST_CASE("relu clamps negatives and zero stays zero") {
    const std::vector<double> x{-2.5, -0.0, 0.0, 1e-300, 3.0};
    std::vector<double> y(x.size(), -1.0);
    kn::scalar_backend().relu(x.data(), y.data(), x.size());
    CHECK(y == std::vector<double>{0.0, 0.0, 0.0, 1e-300, 3.0});
}

TEST_CASE("relu_backward gates by strictly positive pre-activation") {
    const std::vector<double> pre{-1.0, 0.0, 2.0, -0.0};
    const std::vector<double> dy{10.0, 20.0, 30.0, 40.0};
    std::vector<double> dx(4, -1.0);
    kn::scalar_backend().relu_backward(pre.data(), dy.data(), dx.data(), 4);
    CHECK(dx == std::vector<double>{0.0, 0.0, 30.0, 0.0});
}

TEST_CASE("axpy adds alpha times x into y") {
    const std::vector<double> x{1.0, -2.0, 3.0};
    std::vector<double> y{10.0, 10.0, 10.0};
    kn::scalar_backend().axpy(0.5, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{10.5, 9.0, 11.5});
}

TEST_CASE("adam first step with unit gradient moves by nearly -lr") {
    // With m = v = 0 and bias corrections for t = 1, the bias-corrected
    // moments are exactly g and g^2, so the step is lr * g / (|g| + eps).
    std::vector<double> param{0.0, 0.0};
    std::vector<double> m{0.0, 0.0}, v{0.0, 0.0};
    const std::vector<double> g{1.0, -2.0};
    kn::scalar_backend().adam_update(param.data(), m.data(), v.data(), g.data(), 2, 0.1,
                                     0.9, 0.999, 1e-8, 1.0 - 0.9, 1.0 - 0.999);
    CHECK(param[0] == doctest::Approx(-0.1).epsilon(1e-7));
    CHECK(param[1] == doctest::Approx(0.1).epsilon(1e-7));
    CHECK(m[0] == doctest::Approx(0.1));
    CHECK(v[0] == doctest::Approx(0.001));
}

TEST_CASE("avx2 kernels match scalar bit for bit across shapes") {
    if (!kn::avx2_supported()) {
        MESSAGE("avx2 not available on this host; skipping equivalence checks");
        return;
    }
    const kn::Backend& ref = kn::scalar_backend();
    const kn::Backend& vec = *kn::avx2_backend();
    Rng rng(99);

    const size_t shapes[][3] = {{1, 1, 1},  {1, 1, 4},  {1, 1, 5},   {2, 3, 4},
                                {3, 5, 7},  {4, 4, 16}, {5, 9, 13},  {7, 2, 17},
                                {8, 16, 16}, {3, 1, 19}, {6, 10, 33}, {2, 7, 64}};
    for (const auto& s : shapes) {
        const size_t m = s[0], k = s[1], n = s[2];
        CAPTURE(m);
        CAPTURE(k);
        CAPTURE(n);
        const auto a = random_vec(rng, m * k);
        const auto b = random_vec(rng, k * n);
        const auto c0 = random_vec(rng, m * n);
        auto c1 = c0;
        auto c2 = c0;
        ref.matmul_acc(a.data(), b.data(), c1.data(), m, k, n);
        vec.matmul_acc(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(bits_equal(c1, c2));
    }

    for (size_t n : {size_t{1}, size_t{2}, size_t{3}, size_t{4}, size_t{5}, size_t{7},
                     size_t{8}, size_t{9}, size_t{15}, size_t{16}, size_t{17}, size_t{31},
                     size_t{64}, size_t{100}, size_t{257}}) {
        CAPTURE(n);
        auto x = random_vec(rng, n);
        if (n >= 4) {
            x[0] = 0.0;
            x[1] = -0.0;  // signed-zero edge of the relu clamp
        }
        std::vector<double> y1(n, -7.0), y2(n, -7.0);
        ref.relu(x.data(), y1.data(), n);
        vec.relu(x.data(), y2.data(), n);
        CHECK(bits_equal(y1, y2));

        const auto dy = random_vec(rng, n);
        std::vector<double> dx1(n, -7.0), dx2(n, -7.0);
        ref.relu_backward(x.data(), dy.data(), dx1.data(), n);
        vec.relu_backward(x.data(), dy.data(), dx2.data(), n);
        CHECK(bits_equal(dx1, dx2));

        const auto src = random_vec(rng, n);
        auto acc1 = random_vec(rng, n);
        auto acc2 = acc1;
        ref.axpy(-0.37, src.data(), acc1.data(), n);
        vec.axpy(-0.37, src.data(), acc2.data(), n);
        CHECK(bits_equal(acc1, acc2));

        auto p1 = random_vec(rng, n);
        auto p2 = p1;
        auto m1 = random_vec(rng, n);
        auto m2 = m1;
        auto v1 = random_vec(rng, n, /*with_negatives=*/false);
        auto v2 = v1;
        const auto g = random_vec(rng, n);
        ref.adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9, 0.999,
                        1e-8, 0.271, 0.0422);
        vec.adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9, 0.999,
                        1e-8, 0.271, 0.0422);
        CHECK(bits_equal(p1, p2));
        CHECK(bits_equal(m1, m2));
        CHECK(bits_equal(v1, v2));
    }
}

TEST_CASE("iterated optimization stays bit-identical across backends") {
    if (!kn::avx2_supported()) {
        MESSAGE("avx2 not available on this host; skipping equivalence checks");
        return;
    }
    const auto w_ref = least_squares_trace(kn::scalar_backend(), 23, 9, 60);
    const auto w_vec = least_squares_trace(*kn::avx2_backend(), 23, 9, 60);
    CHECK(bits_equal(w_ref, w_vec));
    // sanity: the loop actually moved the weights
    double norm = 0.0;
    for (double x : w_ref) norm += x * x;
    CHECK(norm > 1e-4);
}

TEST_CASE("backend selection honors names and rejects unknown ones") {
    kn::select("scalar");
    CHECK(std::string(kn::active().name) == "scalar");

    CHECK_THROWS_AS(kn::select("sse9"), ilgaco::Error);
    try {
        kn::select("sse9");
    } catch (const ilgaco::Error& e) {
        CHECK(e.kind() == ilgaco::ErrorKind::Validation);
    }

    if (kn::avx2_supported()) {
        kn::select("avx2");
        CHECK(std::string(kn::active().name) == "avx2");
    } else {
        CHECK_THROWS_AS(kn::select("avx2"), ilgaco::Error);
        kn::select("scalar");
    }
}

}  // TEST_SUITE
