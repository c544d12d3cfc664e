#include <cmath>
#include <vector>

#include "doctest.h"
#include "ilgaco/error.hpp"
#include "ilgaco/nn.hpp"
#include "ilgaco/tensor.hpp"

using namespace ilgaco;

TEST_SUITE("nn") {

TEST_CASE("tensor_from builds row-major data and transposed flips it") {
    const Tensor2 x = tensor_from({{1, 2, 3}, {4, 5, 6}});
    CHECK(x.rows == 2);
    CHECK(x.cols == 3);
    CHECK(x.at(0, 2) == 3);
    CHECK(x.at(1, 0) == 4);
    const Tensor2 xt = transposed(x);
    CHECK(xt.rows == 3);
    CHECK(xt.at(2, 1) == 6);
    CHECK(transposed(xt) == x);
    CHECK_THROWS_AS(tensor_from({{1, 2}, {3}}), Error);
}

TEST_CASE("param set registers, finds, and zeroes gradients") {
    ParamSet ps;
    Tensor2& w = ps.add("w", tensor_from({{1, 2}, {3, 4}}));
    ps.add("b", Tensor2(1, 2, 0.5));
    CHECK(ps.size() == 2);
    CHECK(ps.total_values() == 6);
    CHECK(ps.find("w")->value.at(1, 1) == 4);
    CHECK(ps.find("nope") == nullptr);
    CHECK_THROWS_AS(ps.add("w", Tensor2(1, 1)), Error);

    ps.find("w")->grad.fill(7.0);
    ps.zero_grad();
    CHECK(ps.find("w")->grad.at(0, 0) == 0.0);

    CHECK(ps.all_finite());
    w.at(0, 0) = std::nan("");
    CHECK_FALSE(ps.all_finite());
}

TEST_CASE("affine_forward matches a hand-computed example") {
    const Tensor2 x = tensor_from({{1, 2}, {3, 4}});
    const Tensor2 w = tensor_from({{5, 6}, {7, 8}});
    const Tensor2 b = tensor_from({{0.5, -0.5}});
    const Tensor2 out = affine_forward(x, w, b);
    CHECK(out == tensor_from({{19.5, 21.5}, {43.5, 49.5}}));

    CHECK_THROWS_AS(affine_forward(x, tensor_from({{1, 2, 3}}), b), Error);
    try {
        affine_forward(x, w, tensor_from({{1, 2, 3}}));
        FAIL("expected a dimension error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Dimension);
    }
}

TEST_CASE("affine_backward accumulates parameter grads and writes dx") {
    const Tensor2 x = tensor_from({{1, 2}, {3, 4}});
    const Tensor2 w = tensor_from({{5, 6}, {7, 8}});
    const Tensor2 dout = tensor_from({{1, 1}, {1, 1}});
    Tensor2 dw(2, 2, 1.0);  // pre-seeded: backward must ADD
    Tensor2 db(1, 2, 1.0);
    Tensor2 dx;
    affine_backward(x, w, dout, &dx, dw, db);
    CHECK(dw == tensor_from({{5, 5}, {7, 7}}));  // x^T * dout + 1
    CHECK(db == tensor_from({{3, 3}}));          // column sums + 1
    CHECK(dx == tensor_from({{11, 15}, {11, 15}}));  // dout * w^T

    Tensor2 dw2(2, 2, 0.0), db2(1, 2, 0.0);
    affine_backward(x, w, dout, nullptr, dw2, db2);  // dx skip must not crash
    CHECK(dw2 == tensor_from({{4, 4}, {6, 6}}));
}

TEST_CASE("relu and relu_backward are elementwise with a strict gate") {
    const Tensor2 pre = tensor_from({{-1, 0, 2}, {3, -0.5, 0}});
    CHECK(relu(pre) == tensor_from({{0, 0, 2}, {3, 0, 0}}));
    const Tensor2 dout = tensor_from({{10, 20, 30}, {40, 50, 60}});
    CHECK(relu_backward(pre, dout) == tensor_from({{0, 0, 30}, {40, 0, 0}}));
    CHECK_THROWS_AS(relu_backward(pre, tensor_from({{1, 2}})), Error);
}

TEST_CASE("softmax: normalization, hand values, temperature, stability") {
    const std::vector<double> logits{0.0, std::log(3.0)};
    const auto p = softmax(logits);
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));

    // temperature T equals dividing the logits by T first
    const std::vector<double> z{1.3, -0.2, 2.7};
    const auto warm = softmax(z, 2.0);
    std::vector<double> scaled{z[0] / 2.0, z[1] / 2.0, z[2] / 2.0};
    const auto direct = softmax(scaled);
    double sum = 0.0;
    for (size_t i = 0; i < 3; ++i) {
        CHECK(warm[i] == doctest::Approx(direct[i]).epsilon(1e-14));
        sum += warm[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    // max subtraction keeps huge logits finite
    const auto big = softmax(std::vector<double>{1000.0, 1000.0});
    CHECK(big[0] == doctest::Approx(0.5));
    CHECK(std::isfinite(big[1]));

    CHECK_THROWS_AS(softmax(z, 0.0), Error);
    CHECK_THROWS_AS(softmax(z, -1.0), Error);
}

TEST_CASE("softmax_rows equals per-row softmax") {
    const Tensor2 logits = tensor_from({{1, 2, 3}, {-5, 0, 5}});
    const Tensor2 probs = softmax_rows(logits, 2.0);
    for (size_t i = 0; i < 2; ++i) {
        const auto row = softmax(std::span<const double>(logits.row(i), 3), 2.0);
        for (size_t j = 0; j < 3; ++j) {
            CHECK(probs.at(i, j) == row[j]);
        }
    }
}

TEST_CASE("adam_step applies one bias-corrected update and zeroes the grads") {
    ParamSet ps;
    ps.add("w", Tensor2(1, 2, 0.0));
    AdamState st = make_adam(ps, 0.1);
    ps.find("w")->grad.at(0, 0) = 1.0;
    ps.find("w")->grad.at(0, 1) = -1.0;
    adam_step(ps, st);
    // first step: mhat = g, vhat = g^2, so the move is lr * sign(g) (up to eps)
    CHECK(ps.find("w")->value.at(0, 0) == doctest::Approx(-0.1).epsilon(1e-7));
    CHECK(ps.find("w")->value.at(0, 1) == doctest::Approx(0.1).epsilon(1e-7));
    CHECK(ps.find("w")->grad.at(0, 0) == 0.0);
    CHECK(st.step == 1);

    // zero grad keeps the very first moments at zero, so the step is zero
    adam_step(ps, st);
    CHECK(st.step == 2);
    // m is now decayed from the first step, so the param still moves; just check finiteness
    CHECK(ps.all_finite());

    ParamSet other;
    other.add("w", Tensor2(3, 3, 0.0));
    CHECK_THROWS_AS(adam_step(other, st), Error);
    try {
        AdamState empty;
        adam_step(ps, empty);
        FAIL("expected a usage error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Usage);
    }
}

TEST_CASE("grad_check accepts a correct gradient and flags a wrong one") {
    ParamSet ps;
    Tensor2& w = ps.add("w", tensor_from({{0.3, -1.2}, {2.0, 0.7}}));
    // f = 0.5 * sum w^2  =>  df/dw = w
    const auto f = [&]() {
        double s = 0.0;
        for (double x : w.data) s += 0.5 * x * x;
        return s;
    };
    Param* p = ps.find("w");
    p->grad = w;
    CHECK(grad_check(f, ps) < 1e-8);

    p->grad.at(0, 0) += 0.5;  // corrupt one coordinate
    CHECK(grad_check(f, ps) > 1e-2);

    CHECK_THROWS_AS(grad_check(f, ps, 0.0), Error);
}

}  // TEST_SUITE
