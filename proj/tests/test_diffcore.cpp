#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "banf/errors.hpp"
#include "banf/optimizer.hpp"
#include "banf/tape.hpp"
#include "support.hpp"

using namespace banf;
using test::grad_check;
using test::random_tensor;

namespace {

ParamStore make_mlp_params(const MlpSpec& spec, Rng& rng, double scale = 0.5) {
    ParamStore params;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        params.add(spec.w_name("net.", l),
                   random_tensor({spec.layer_out(l), spec.layer_in(l)}, rng, -scale, scale));
        params.add(spec.b_name("net.", l), random_tensor({spec.layer_out(l)}, rng, -scale, scale));
    }
    return params;
}

} // namespace

TEST_CASE("mlp_forward: zero network outputs zero") {
    MlpSpec spec{3, 8, 2, 2, Activation::Relu};
    ParamStore params;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        params.add(spec.w_name("net.", l), Tensor::zeros({spec.layer_out(l), spec.layer_in(l)}));
        params.add(spec.b_name("net.", l), Tensor::zeros({spec.layer_out(l)}));
    }
    Rng rng(3);
    const Tensor x = random_tensor({5, 3}, rng);
    const Tensor y = mlp_forward(params, spec, x, "net.");
    for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("mlp_forward: single affine layer arithmetic") {
    MlpSpec spec{1, 0, 0, 1, Activation::Identity};
    ParamStore params;
    params.add("net.w0", Tensor{{1, 1}, {2.0}});
    params.add("net.b0", Tensor{{1}, {1.0}});
    const Tensor y = mlp_forward(params, spec, Tensor{{1, 1}, {3.0}}, "net.");
    CHECK(y.data[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("mlp_forward: gradients match central finite differences") {
    MlpSpec spec{2, 16, 2, 1, Activation::Relu};
    Rng rng(11);
    ParamStore params = make_mlp_params(spec, rng);
    const Tensor x = random_tensor({12, 2}, rng);
    const Tensor target = random_tensor({12, 1}, rng);

    Tape tape(params);
    const auto y = mlp_forward(tape, spec, tape.input(x), "net.");
    const auto loss = tape.sum_sq_error(y, target, 1.0 / 12.0);
    const GradMap grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});

    auto loss_fn = [&] {
        Tape t(params);
        const auto yy = mlp_forward(t, spec, t.input(x), "net.");
        return t.scalar(t.sum_sq_error(yy, target, 1.0 / 12.0));
    };
    Rng probe_rng(17);
    const auto res = grad_check(params, grads, loss_fn, 120, probe_rng);
    INFO("worst entry: ", res.worst);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("mlp_forward: softplus gradients match finite differences") {
    MlpSpec spec{3, 8, 2, 2, Activation::Softplus};
    Rng rng(5);
    ParamStore params = make_mlp_params(spec, rng);
    const Tensor x = random_tensor({9, 3}, rng);
    const Tensor target = random_tensor({9, 2}, rng);

    Tape tape(params);
    const auto y = mlp_forward(tape, spec, tape.input(x), "net.");
    const auto loss = tape.sum_sq_error(y, target, 1.0 / 18.0);
    const GradMap grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});

    auto loss_fn = [&] {
        Tape t(params);
        const auto yy = mlp_forward(t, spec, t.input(x), "net.");
        return t.scalar(t.sum_sq_error(yy, target, 1.0 / 18.0));
    };
    Rng probe_rng(23);
    const auto res = grad_check(params, grads, loss_fn, 100, probe_rng);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("backward: quadratic loss at its minimum has zero gradients") {
    MlpSpec spec{2, 4, 1, 1, Activation::Identity};
    Rng rng(7);
    ParamStore params = make_mlp_params(spec, rng);
    const Tensor x = random_tensor({6, 2}, rng);

    Tape probe(params);
    const auto y0 = mlp_forward(probe, spec, probe.input(x), "net.");
    const Tensor target = probe.value(y0); // y == t exactly

    Tape tape(params);
    const auto y = mlp_forward(tape, spec, tape.input(x), "net.");
    const auto loss = tape.sum_sq_error(y, target, 1.0);
    const GradMap grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});
    for (const auto& [name, g] : grads.entries())
        for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("backward: linear chain rule through one affine layer") {
    ParamStore params;
    params.add("w0", Tensor{{1, 2}, {0.3, -0.7}});
    params.add("b0", Tensor{{1}, {0.1}});
    const Tensor x{{1, 2}, {2.0, 5.0}};

    Tape tape(params);
    const auto y = tape.affine(tape.input(x), "w0", "b0");
    const GradMap grads = tape.backward(y, Tensor{{1, 1}, {1.0}});

    CHECK(grads.find("b0")->data[0] == 1.0);
    CHECK(grads.find("w0")->data[0] == 2.0);
    CHECK(grads.find("w0")->data[1] == 5.0);
}

TEST_CASE("backward: composite graph with an interpolation gather") {
    // table -> gather -> affine -> loss; gradients reach both the table and
    // the affine parameters.
    Rng rng(29);
    ParamStore params;
    params.add("table", random_tensor({10, 3}, rng));
    params.add("w0", random_tensor({2, 3}, rng));
    params.add("b0", random_tensor({2}, rng));

    GatherPlan plan;
    plan.reserve_rows(4, 2);
    for (std::size_t r = 0; r < 4; ++r) {
        plan.indices.push_back(static_cast<std::uint32_t>(rng.below(10)));
        plan.weights.push_back(0.25 + rng.uniform01());
        plan.indices.push_back(static_cast<std::uint32_t>(rng.below(10)));
        plan.weights.push_back(rng.uniform01() - 0.5);
        plan.offsets.push_back(static_cast<std::uint32_t>(plan.indices.size()));
        ++plan.out_rows;
    }
    const Tensor target = random_tensor({4, 2}, rng);

    auto run = [&](Tape& t) {
        const auto feat = t.grid_gather("table", plan);
        const auto y = t.affine(feat, "w0", "b0");
        return t.sum_sq_error(y, target, 0.125);
    };

    Tape tape(params);
    const auto loss = run(tape);
    const GradMap grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});

    auto loss_fn = [&] {
        Tape t(params);
        return t.scalar(run(t));
    };
    Rng probe_rng(31);
    const auto res = grad_check(params, grads, loss_fn, 80, probe_rng);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("backward: untouched parameters receive no gradient entry") {
    Rng rng(37);
    ParamStore params;
    params.add("w0", random_tensor({1, 2}, rng));
    params.add("b0", random_tensor({1}, rng));
    params.add("unused", random_tensor({4, 4}, rng));

    Tape tape(params);
    const auto y = tape.affine(tape.input(random_tensor({3, 2}, rng)), "w0", "b0");
    const GradMap grads = tape.backward(y, Tensor::full({3, 1}, 1.0));
    CHECK(grads.find("unused") == nullptr);
    CHECK(grads.find("w0") != nullptr);
}

TEST_CASE("backward usage errors") {
    ParamStore params;
    Tape tape(params);
    CHECK_THROWS_AS(tape.backward(0, Tensor{{1, 1}, {1.0}}), UsageError);

    const auto id = tape.input(Tensor{{1, 1}, {2.0}});
    (void)tape.backward(id, Tensor{{1, 1}, {1.0}});
    CHECK_THROWS_AS(tape.backward(id, Tensor{{1, 1}, {1.0}}), UsageError);
    tape.reset();
    CHECK(tape.empty());
}

TEST_CASE("affine shape mismatch raises a configuration error") {
    Rng rng(41);
    ParamStore params;
    params.add("w0", random_tensor({2, 3}, rng));
    params.add("b0", random_tensor({2}, rng));
    Tape tape(params);
    CHECK_THROWS_AS(tape.affine(tape.input(random_tensor({4, 5}, rng)), "w0", "b0"), ConfigError);
}

TEST_CASE("non-finite intermediates raise a numeric error naming the layer") {
    ParamStore params;
    params.add("w0", Tensor{{1, 1}, {1e308}});
    params.add("b0", Tensor{{1}, {1e308}});
    Tape tape(params);
    try {
        (void)tape.affine(tape.input(Tensor{{1, 1}, {1e308}}), "w0", "b0");
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("w0") != std::string::npos);
    }
}

TEST_CASE("optimizer_step: SGD update formula") {
    ParamStore params;
    params.add("p", Tensor{{1}, {0.0}});
    GradMap grads;
    grads.accumulate("p", {1}).data[0] = 1.0;
    OptState opt(OptConfig{OptAlgo::Sgd, 0.1});
    opt.step(params, grads);
    CHECK(params.at("p").data[0] == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("optimizer_step: Adam first step is bias-corrected to ~lr") {
    for (double g : {0.001, 0.5, 42.0, -3.0}) {
        ParamStore params;
        params.add("p", Tensor{{1}, {0.0}});
        GradMap grads;
        grads.accumulate("p", {1}).data[0] = g;
        OptState opt(OptConfig{OptAlgo::Adam, 1e-3});
        opt.step(params, grads);
        // Update magnitude = lr * g / (|g| + eps-hat)
        CHECK(std::abs(params.at("p").data[0]) == doctest::Approx(1e-3).epsilon(1e-4));
        CHECK((g > 0) == (params.at("p").data[0] < 0));
    }
}

TEST_CASE("optimizer_step: RMSProp update arithmetic") {
    ParamStore params;
    params.add("p", Tensor{{1}, {0.0}});
    GradMap grads;
    grads.accumulate("p", {1}).data[0] = 2.0;
    OptConfig cfg;
    cfg.algo = OptAlgo::RmsProp;
    cfg.lr = 0.01;
    cfg.decay = 0.9;
    cfg.eps = 1e-8;
    OptState opt(cfg);
    opt.step(params, grads);
    // acc = 0.9*0 + 0.1*4 = 0.4 ; p = -0.01*2/sqrt(0.4 + 1e-8)
    const double expect = -0.01 * 2.0 / std::sqrt(0.4 + 1e-8);
    CHECK(params.at("p").data[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(params.at("p").data[0] == doctest::Approx(-0.03162).epsilon(1e-3));
}

TEST_CASE("optimizer_step: non-finite gradient names the parameter") {
    ParamStore params;
    params.add("theta", Tensor{{1}, {0.0}});
    GradMap grads;
    grads.accumulate("theta", {1}).data[0] = std::nan("");
    OptState opt(OptConfig{OptAlgo::Sgd, 0.1});
    try {
        opt.step(params, grads);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
    }
}

TEST_CASE("training loop is bit-deterministic for a fixed seed") {
    auto run = [](std::uint64_t seed) {
        MlpSpec spec{2, 8, 2, 1, Activation::Relu};
        Rng rng(seed);
        ParamStore params = make_mlp_params(spec, rng);
        OptState opt(OptConfig{OptAlgo::Adam, 1e-2});
        for (int step = 0; step < 50; ++step) {
            const Tensor x = random_tensor({16, 2}, rng);
            Tensor target = Tensor::zeros({16, 1});
            for (std::size_t i = 0; i < 16; ++i)
                target.at(i, 0) = std::sin(x.at(i, 0)) * x.at(i, 1);
            Tape tape(params);
            const auto y = mlp_forward(tape, spec, tape.input(x), "net.");
            const auto loss = tape.sum_sq_error(y, target, 1.0 / 16.0);
            auto grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});
            opt.step(params, grads);
        }
        return params;
    };
    const ParamStore a = run(123);
    const ParamStore b = run(123);
    const ParamStore c = run(124);
    CHECK(a.same_values(b));
    CHECK_FALSE(a.same_values(c));
}
