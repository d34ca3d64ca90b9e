#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "banf/bandlimited_field.hpp"
#include "banf/errors.hpp"
#include "banf/interp_kernel.hpp"
#include "banf/lattice.hpp"
#include "support.hpp"

using namespace banf;
using test::random_tensor;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Kernel> all_kernels() {
    return {Kernel::linear(), Kernel::sinc(6), Kernel::bicubic(), Kernel::lanczos(2)};
}

BandLimitedField make_direct_field(std::size_t resolution, std::size_t dim, Kernel kernel,
                                   Rng& rng) {
    FieldArch arch;
    arch.domain_dim = dim;
    arch.backbone = DirectBackbone{resolution, 1};
    ParamStore params = init_field(arch, InitPolicy::near_zero(rng.next_u64()));
    for (double& v : params.at("table").data) v = rng.uniform(-1.0, 1.0);
    return BandLimitedField(std::move(arch), std::move(params), Lattice(resolution, dim), kernel);
}

} // namespace

TEST_CASE("kernel_eval: linear triangle kernel") {
    const Kernel k = Kernel::linear();
    CHECK(kernel_eval(k, 0.0) == 1.0);
    CHECK(kernel_eval(k, 1.0) == 0.0);
    CHECK(kernel_eval(k, -1.0) == 0.0);
    CHECK(kernel_eval(k, 0.5) == 0.5);
    CHECK(kernel_eval(k, -0.25) == 0.75);
    CHECK(kernel_eval(k, 1.5) == 0.0);
}

TEST_CASE("kernel_eval: interpolating zeros at integer offsets") {
    for (const Kernel& k : all_kernels()) {
        CAPTURE(kernel_to_string(k));
        CHECK(kernel_eval(k, 0.0) == 1.0);
        for (int n = 1; n <= 4; ++n) {
            CHECK(kernel_eval(k, static_cast<double>(n)) == 0.0);
            CHECK(kernel_eval(k, static_cast<double>(-n)) == 0.0);
        }
    }
}

TEST_CASE("kernel_eval: symmetric with compact support") {
    Rng rng(3);
    for (const Kernel& k : all_kernels()) {
        for (int i = 0; i < 200; ++i) {
            const double u = rng.uniform(0.0, k.radius() + 2.0);
            CHECK(kernel_eval(k, u) == kernel_eval(k, -u));
            if (u > k.radius()) CHECK(kernel_eval(k, u) == 0.0);
        }
    }
}

TEST_CASE("linear kernel spectrum matches the sinc^2 envelope") {
    // FFT oracle: densely sample the triangle kernel over a wide window and
    // compare its DFT against sinc^2(f). Computed here, independent of any
    // library DFT code.
    const Kernel k = Kernel::linear();
    const std::size_t n = 4096;
    const double half_window = 8.0; // periods
    const double dt = 2.0 * half_window / static_cast<double>(n);

    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i)
        samples[i] = kernel_eval(k, -half_window + dt * static_cast<double>(i));

    double rms = 0.0;
    std::size_t count = 0;
    for (std::size_t bin = 0;; ++bin) {
        const double f = static_cast<double>(bin) / (2.0 * half_window); // cycles per period
        if (f > 4.0) break;
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = -half_window + dt * static_cast<double>(i);
            acc += samples[i] * std::exp(std::complex<double>(0.0, -2.0 * kPi * f * t));
        }
        const double measured = std::abs(acc) * dt;
        const double s = f == 0.0 ? 1.0 : std::sin(kPi * f) / (kPi * f);
        const double expect = s * s;
        rms += (measured - expect) * (measured - expect);
        ++count;
    }
    rms = std::sqrt(rms / static_cast<double>(count));
    CHECK(rms < 0.01); // 1% RMS against the analytic envelope
}

TEST_CASE("cutoff_frequency formulas") {
    const auto c64 = cutoff_frequency(Lattice(64, 1));
    CHECK(c64.omega == doctest::Approx(128.0 * kPi).epsilon(1e-15));
    CHECK(c64.nyquist == 32.0);

    const auto c2 = cutoff_frequency(Lattice(2, 1));
    CHECK(c2.omega == doctest::Approx(4.0 * kPi).epsilon(1e-15));
    CHECK(c2.nyquist == 1.0);

    const auto c128 = cutoff_frequency(Lattice(128, 1));
    CHECK(c128.omega == doctest::Approx(2.0 * c64.omega).epsilon(1e-15));
}

TEST_CASE("contributing_nodes: exact node query yields a single unit weight") {
    const Lattice lat(8, 1);
    for (const Kernel& k : all_kernels()) {
        CAPTURE(kernel_to_string(k));
        for (std::size_t t = 0; t <= 8; ++t) {
            const auto nodes = contributing_nodes({lat.node_coord(t)}, lat, k);
            REQUIRE(nodes.size() == 1);
            CHECK(nodes[0].index == t);
            CHECK(nodes[0].weight == 1.0);
        }
    }
}

TEST_CASE("contributing_nodes: bilinear weights in 2-D") {
    const Lattice lat(4, 2);
    const auto nodes = contributing_nodes({0.3, 0.6}, lat, Kernel::linear());
    REQUIRE(nodes.size() == 4);
    // s = (1.2, 2.4): corners (1,2),(2,2),(1,3),(2,3).
    double sum = 0.0;
    for (const auto& nw : nodes) sum += nw.weight;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // Weight of corner (1,2) = 0.8 * 0.6.
    bool found = false;
    for (const auto& nw : nodes)
        if (nw.index == 2 * 5 + 1) {
            CHECK(nw.weight == doctest::Approx(0.8 * 0.6).epsilon(1e-12));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("contributing_nodes: sinc support width and weight normalization") {
    const Lattice lat(16, 1);
    const auto nodes = contributing_nodes({0.53}, lat, Kernel::sinc(6));
    CHECK(nodes.size() == 6);
    double sum = 0.0;
    for (const auto& nw : nodes) sum += nw.weight;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("partition of unity holds at random and clamped boundary points") {
    Rng rng(7);
    for (std::size_t dim : {1u, 2u, 3u}) {
        const Lattice lat(dim == 3 ? 6 : 16, dim);
        for (Kernel k : all_kernels()) {
            for (int i = 0; i < 200; ++i) {
                double p[3];
                for (std::size_t a = 0; a < dim; ++a)
                    p[a] = i % 5 == 0 ? rng.uniform(-0.2, 1.2) : rng.uniform01();
                std::vector<NodeWeight> nodes;
                contributing_nodes(p, lat, k, nodes);
                double sum = 0.0;
                for (const auto& nw : nodes) sum += nw.weight;
                CHECK(std::abs(sum - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("circular support trims corners and still sums to one") {
    const Lattice lat(16, 2);
    Kernel k = Kernel::sinc(6);
    k.circular = true;
    const auto square = contributing_nodes({0.53, 0.41}, lat, Kernel::sinc(6));
    const auto circle = contributing_nodes({0.53, 0.41}, lat, k);
    CHECK(circle.size() < square.size());
    double sum = 0.0;
    for (const auto& nw : circle) sum += nw.weight;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("cell-centered lattices place nodes at (t+1/2)T") {
    Lattice lat(8, 1, true);
    CHECK(lat.nodes_per_axis() == 8);
    CHECK(lat.node_coord(0) == doctest::Approx(0.0625).epsilon(1e-15));
    const auto nodes = contributing_nodes({lat.node_coord(3)}, lat, Kernel::linear());
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].index == 3);
    CHECK(nodes[0].weight == 1.0);
}

TEST_CASE("bandlimited_eval: node identity for every kernel") {
    Rng rng(11);
    for (const Kernel& k : all_kernels()) {
        CAPTURE(kernel_to_string(k));
        BandLimitedField f = make_direct_field(8, 1, k, rng);
        const Lattice& lat = f.lattice();
        Tensor pts = Tensor::zeros({lat.node_count(), 1});
        for (std::size_t t = 0; t < lat.node_count(); ++t) pts.at(t, 0) = lat.node_coord(t);
        const Tensor y = f.eval(pts);
        for (std::size_t t = 0; t < lat.node_count(); ++t)
            CHECK(y.at(t, 0) == f.params().at("table").data[t]);
    }
}

TEST_CASE("bandlimited_eval: linear midpoint between node values 2 and 4 is 3") {
    Rng rng(13);
    BandLimitedField f = make_direct_field(4, 1, Kernel::linear(), rng);
    auto& table = f.params().at("table").data;
    table = {0.0, 2.0, 4.0, 0.0, 0.0};
    f.params().bump_version();
    const Tensor y = f.eval(Tensor{{1, 1}, {0.375}}); // midway between nodes 1 and 2
    CHECK(y.data[0] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("bandlimited_eval: constant inner field reproduces the constant") {
    Rng rng(17);
    for (const Kernel& k : all_kernels()) {
        BandLimitedField f = make_direct_field(6, 2, k, rng);
        for (double& v : f.params().at("table").data) v = -0.75;
        f.params().bump_version();
        const Tensor pts = random_tensor({100, 2}, rng, 0.0, 1.0);
        const Tensor y = f.eval(pts);
        for (double v : y.data) CHECK(v == doctest::Approx(-0.75).epsilon(1e-13));
    }
}

TEST_CASE("training-path forward and baked eval agree bit-for-bit") {
    FieldArch arch;
    arch.domain_dim = 2;
    HashGridBackbone h;
    h.levels = 3;
    h.table_size = 1u << 10;
    h.feature_dim = 2;
    h.res_min = 4;
    h.res_max = 16;
    arch.backbone = h;
    arch.head = MlpSpec{h.levels * h.feature_dim, 16, 2, 1, Activation::Relu};
    ParamStore params = init_field(arch, InitPolicy::standard(19));
    BandLimitedField f(arch, std::move(params), Lattice(8, 2), Kernel::linear());

    Rng rng(21);
    const Tensor pts = random_tensor({64, 2}, rng, 0.0, 1.0);
    Tape tape(f.params());
    const auto y = f.forward(tape, pts);
    const Tensor& train_path = tape.value(y);
    const Tensor eval_path = f.eval(pts);
    CHECK(train_path.data == eval_path.data);
}

TEST_CASE("bandlimited field gradients match finite differences") {
    FieldArch arch;
    arch.domain_dim = 1;
    HashGridBackbone h;
    h.levels = 2;
    h.table_size = 1u << 8;
    h.feature_dim = 2;
    h.res_min = 4;
    h.res_max = 12;
    arch.backbone = h;
    arch.head = MlpSpec{h.levels * h.feature_dim, 12, 2, 1, Activation::Softplus};
    ParamStore params = init_field(arch, InitPolicy::standard(23));
    BandLimitedField f(arch, std::move(params), Lattice(8, 1), Kernel::sinc(6));

    Rng rng(25);
    const Tensor pts = random_tensor({32, 1}, rng, 0.0, 1.0);
    const Tensor target = random_tensor({32, 1}, rng);

    Tape tape(f.params());
    const auto y = f.forward(tape, pts);
    const auto loss = tape.sum_sq_error(y, target, 1.0 / 32.0);
    const GradMap grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});

    auto loss_fn = [&] {
        Tape t(f.params());
        return t.scalar(t.sum_sq_error(f.forward(t, pts), target, 1.0 / 32.0));
    };
    Rng probe_rng(27);
    const auto res = test::grad_check(f.params(), grads, loss_fn, 120, probe_rng);
    INFO("worst: ", res.worst);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("lattice validation") {
    CHECK_THROWS_AS(Lattice(1, 1), ConfigError);
    CHECK_THROWS_AS(Lattice(8, 4), ConfigError);
    CHECK_THROWS_AS(kernel_from_string("sinc", 5), ConfigError);
    CHECK_THROWS_AS(kernel_from_string("gauss"), ConfigError);
}
