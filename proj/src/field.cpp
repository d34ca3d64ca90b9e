#include "banf/field.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "banf/errors.hpp"
#include "banf/optimizer.hpp"
#include "banf/parallel.hpp"

namespace banf {

using nlohmann::json;

namespace {

constexpr double kSnapTol = 1e-9;

// Cell index + fraction for a multilinear lookup over `cells` cells per axis.
// Fractions within 1e-9 of a vertex snap to it so vertex lookups are exact.
void cell_of(double p, std::size_t cells, std::uint32_t& t0, double& f) {
    const double u = std::clamp(p, 0.0, 1.0) * static_cast<double>(cells);
    if (u <= 0.0) {
        t0 = 0;
        f = 0.0;
        return;
    }
    if (u >= static_cast<double>(cells)) {
        t0 = static_cast<std::uint32_t>(cells - 1);
        f = 1.0;
        return;
    }
    double fl = std::floor(u);
    double frac = u - fl;
    std::uint32_t t = static_cast<std::uint32_t>(fl);
    if (frac <= kSnapTol) {
        frac = 0.0;
    } else if (frac >= 1.0 - kSnapTol) {
        ++t;
        frac = 0.0;
        if (t >= cells) {
            t = static_cast<std::uint32_t>(cells - 1);
            frac = 1.0;
        }
    }
    t0 = t;
    f = frac;
}

} // namespace

std::size_t HashGridBackbone::level_resolution(std::size_t level) const {
    if (levels <= 1) return res_min;
    const double b = std::exp((std::log(static_cast<double>(res_max)) -
                               std::log(static_cast<double>(res_min))) /
                              static_cast<double>(levels - 1));
    return static_cast<std::size_t>(
        std::lround(static_cast<double>(res_min) * std::pow(b, static_cast<double>(level))));
}

std::size_t FieldArch::feature_dim() const {
    if (std::holds_alternative<CoordsBackbone>(backbone)) return domain_dim;
    if (const auto* d = std::get_if<DirectBackbone>(&backbone)) return d->channels;
    if (const auto* g = std::get_if<DenseGridBackbone>(&backbone)) return g->feature_dim;
    const auto& h = std::get<HashGridBackbone>(backbone);
    return h.levels * h.feature_dim;
}

std::size_t FieldArch::out_channels() const {
    if (std::holds_alternative<DirectBackbone>(backbone))
        return std::get<DirectBackbone>(backbone).channels;
    if (!head) throw ConfigError("field arch without a head must use the direct backbone");
    return head->out_dim;
}

void FieldArch::validate() const {
    if (domain_dim < 1 || domain_dim > 3) throw ConfigError("domain_dim must be 1, 2 or 3");
    if (std::holds_alternative<DirectBackbone>(backbone)) {
        const auto& d = std::get<DirectBackbone>(backbone);
        if (head) throw ConfigError("direct backbone carries values itself; no head allowed");
        if (d.resolution < 2) throw ConfigError("direct backbone resolution must be >= 2");
        if (d.channels < 1) throw ConfigError("direct backbone needs >= 1 channel");
        return;
    }
    if (!head) throw ConfigError("backbone requires an MLP head");
    if (head->out_dim < 1) throw ConfigError("out_channels must be >= 1");
    if (head->in_dim != feature_dim())
        throw ConfigError("head input width must equal the backbone feature width");
    if (const auto* g = std::get_if<DenseGridBackbone>(&backbone)) {
        if (g->resolution < 1 || g->feature_dim < 1) throw ConfigError("bad dense grid spec");
    }
    if (const auto* h = std::get_if<HashGridBackbone>(&backbone)) {
        if (h->levels < 1 || h->feature_dim < 1 || h->table_size < 2)
            throw ConfigError("bad hash grid spec");
        if (h->res_min < 1 || h->res_max < h->res_min)
            throw ConfigError("hash grid resolutions must satisfy res_min <= res_max");
    }
}

// ---------------------------------------------------------------------------
// JSON descriptor

std::string FieldArch::to_json_string() const {
    json j;
    j["domain_dim"] = domain_dim;
    json b;
    if (std::holds_alternative<CoordsBackbone>(backbone)) {
        b["kind"] = "coords";
    } else if (const auto* d = std::get_if<DirectBackbone>(&backbone)) {
        b["kind"] = "direct";
        b["resolution"] = d->resolution;
        b["channels"] = d->channels;
    } else if (const auto* g = std::get_if<DenseGridBackbone>(&backbone)) {
        b["kind"] = "dense";
        b["resolution"] = g->resolution;
        b["feature_dim"] = g->feature_dim;
    } else {
        const auto& h = std::get<HashGridBackbone>(backbone);
        b["kind"] = "hash";
        b["levels"] = h.levels;
        b["table_size"] = h.table_size;
        b["feature_dim"] = h.feature_dim;
        b["res_min"] = h.res_min;
        b["res_max"] = h.res_max;
    }
    j["backbone"] = b;
    if (head) {
        j["head"] = {{"hidden_layers", head->hidden_layers},
                     {"width", head->width},
                     {"activation", activation_to_string(head->act)},
                     {"out_channels", head->out_dim}};
    }
    return j.dump();
}

FieldArch FieldArch::from_json_string(const std::string& s) {
    const json j = json::parse(s);
    FieldArch arch;
    arch.domain_dim = j.at("domain_dim").get<std::size_t>();
    const json& b = j.at("backbone");
    const std::string kind = b.at("kind").get<std::string>();
    if (kind == "coords") {
        arch.backbone = CoordsBackbone{};
    } else if (kind == "direct") {
        arch.backbone = DirectBackbone{b.at("resolution").get<std::size_t>(),
                                       b.at("channels").get<std::size_t>()};
    } else if (kind == "dense") {
        arch.backbone = DenseGridBackbone{b.at("resolution").get<std::size_t>(),
                                          b.at("feature_dim").get<std::size_t>()};
    } else if (kind == "hash") {
        HashGridBackbone h;
        h.levels = b.at("levels").get<std::size_t>();
        h.table_size = b.at("table_size").get<std::size_t>();
        h.feature_dim = b.at("feature_dim").get<std::size_t>();
        h.res_min = b.at("res_min").get<std::size_t>();
        h.res_max = b.at("res_max").get<std::size_t>();
        arch.backbone = h;
    } else {
        throw ConfigError("unknown backbone kind '" + kind + "'");
    }
    if (j.contains("head")) {
        const json& h = j.at("head");
        MlpSpec spec;
        spec.hidden_layers = h.at("hidden_layers").get<std::size_t>();
        spec.width = h.at("width").get<std::size_t>();
        spec.act = activation_from_string(h.at("activation").get<std::string>());
        spec.out_dim = h.at("out_channels").get<std::size_t>();
        spec.in_dim = arch.feature_dim();
        arch.head = spec;
    }
    arch.validate();
    return arch;
}

// ---------------------------------------------------------------------------
// Encoder plans

GatherPlan multilinear_plan(std::size_t cells, std::size_t dim, const Tensor& points) {
    const std::size_t n = points.rows();
    const std::size_t corners = std::size_t(1) << dim;
    const std::size_t verts = cells + 1;

    GatherPlan plan;
    plan.reserve_rows(n, corners);
    for (std::size_t r = 0; r < n; ++r) {
        const double* p = points.row(r);
        std::uint32_t t0[3];
        double f[3];
        for (std::size_t a = 0; a < dim; ++a) cell_of(p[a], cells, t0[a], f[a]);
        for (std::size_t c = 0; c < corners; ++c) {
            std::uint32_t idx = 0;
            double w = 1.0;
            for (std::size_t a = dim; a-- > 0;) {
                const std::uint32_t bit = (c >> a) & 1u;
                idx = idx * static_cast<std::uint32_t>(verts) + (t0[a] + bit);
                w *= bit ? f[a] : 1.0 - f[a];
            }
            plan.indices.push_back(idx);
            plan.weights.push_back(w);
        }
        plan.offsets.push_back(static_cast<std::uint32_t>(plan.indices.size()));
        ++plan.out_rows;
    }
    return plan;
}

std::uint32_t hash_table_index(const std::uint32_t* vertex, std::size_t dim,
                               std::size_t table_size, std::size_t level_res) {
    const std::size_t verts = level_res + 1;
    std::size_t dense = 1;
    for (std::size_t a = 0; a < dim; ++a) dense *= verts;
    if (dense <= table_size) {
        std::size_t idx = 0;
        for (std::size_t a = dim; a-- > 0;) idx = idx * verts + vertex[a];
        return static_cast<std::uint32_t>(idx);
    }
    // Coordinate-prime XOR hash (wrap-around uint32 products).
    static constexpr std::uint32_t kPrimes[3] = {1u, 2654435761u, 805459861u};
    std::uint32_t h = 0;
    for (std::size_t a = 0; a < dim; ++a) h ^= vertex[a] * kPrimes[a];
    return static_cast<std::uint32_t>(h % static_cast<std::uint32_t>(table_size));
}

GatherPlan hash_level_plan(const HashGridBackbone& cfg, std::size_t level, std::size_t dim,
                           const Tensor& points) {
    const std::size_t res = cfg.level_resolution(level);
    const std::size_t n = points.rows();
    const std::size_t corners = std::size_t(1) << dim;

    GatherPlan plan;
    plan.reserve_rows(n, corners);
    for (std::size_t r = 0; r < n; ++r) {
        const double* p = points.row(r);
        std::uint32_t t0[3];
        double f[3];
        for (std::size_t a = 0; a < dim; ++a) cell_of(p[a], res, t0[a], f[a]);
        for (std::size_t c = 0; c < corners; ++c) {
            std::uint32_t v[3];
            double w = 1.0;
            for (std::size_t a = 0; a < dim; ++a) {
                const std::uint32_t bit = (c >> a) & 1u;
                v[a] = t0[a] + bit;
                w *= bit ? f[a] : 1.0 - f[a];
            }
            plan.indices.push_back(hash_table_index(v, dim, cfg.table_size, res));
            plan.weights.push_back(w);
        }
        plan.offsets.push_back(static_cast<std::uint32_t>(plan.indices.size()));
        ++plan.out_rows;
    }
    return plan;
}

namespace {

GatherPlan direct_plan(const DirectBackbone& d, std::size_t dim, const Tensor& points) {
    const std::size_t n = points.rows();
    const std::size_t verts = d.resolution + 1;
    GatherPlan plan;
    plan.reserve_rows(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
        const double* p = points.row(r);
        std::uint32_t idx = 0;
        for (std::size_t a = dim; a-- > 0;) {
            const double u = std::clamp(p[a], 0.0, 1.0) * static_cast<double>(d.resolution);
            const std::uint32_t t = static_cast<std::uint32_t>(std::clamp<long>(
                std::lround(u), 0, static_cast<long>(d.resolution)));
            idx = idx * static_cast<std::uint32_t>(verts) + t;
        }
        plan.indices.push_back(idx);
        plan.weights.push_back(1.0);
        plan.offsets.push_back(static_cast<std::uint32_t>(plan.indices.size()));
        ++plan.out_rows;
    }
    return plan;
}

} // namespace

// ---------------------------------------------------------------------------
// Forward

Tape::NodeId field_forward(Tape& tape, const FieldArch& arch, const Tensor& points) {
    if (points.cols() != arch.domain_dim)
        throw ConfigError("points have " + std::to_string(points.cols()) +
                          " columns, field expects " + std::to_string(arch.domain_dim));

    Tape::NodeId feat;
    if (std::holds_alternative<CoordsBackbone>(arch.backbone)) {
        feat = tape.input(points);
    } else if (const auto* d = std::get_if<DirectBackbone>(&arch.backbone)) {
        return tape.grid_gather("table", direct_plan(*d, arch.domain_dim, points));
    } else if (const auto* g = std::get_if<DenseGridBackbone>(&arch.backbone)) {
        feat = tape.grid_gather("grid", multilinear_plan(g->resolution, arch.domain_dim, points));
    } else {
        const auto& h = std::get<HashGridBackbone>(arch.backbone);
        std::vector<Tape::NodeId> parts;
        parts.reserve(h.levels);
        for (std::size_t l = 0; l < h.levels; ++l)
            parts.push_back(tape.grid_gather("hash." + std::to_string(l),
                                             hash_level_plan(h, l, arch.domain_dim, points)));
        feat = h.levels == 1 ? parts[0] : tape.concat_cols(parts);
    }
    return mlp_forward(tape, *arch.head, feat, "head.");
}

Tensor eval_field(const FieldArch& arch, const ParamStore& params, const Tensor& points) {
    const std::size_t n = points.rows();
    const std::size_t c = arch.out_channels();
    const std::size_t dim = arch.domain_dim;
    Tensor out = Tensor::zeros({n, c});
    constexpr std::size_t kChunk = 4096;

    parallel_for(n, kChunk, [&](std::size_t r0, std::size_t r1) {
        Tensor chunk = Tensor::zeros({r1 - r0, dim});
        std::copy(points.data.data() + r0 * dim, points.data.data() + r1 * dim,
                  chunk.data.data());
        Tape tape(params);
        const auto y = field_forward(tape, arch, chunk);
        const Tensor& v = tape.value(y);
        std::copy(v.data.begin(), v.data.end(), out.data.data() + r0 * c);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

Tensor normal_tensor(std::vector<std::size_t> shape, Rng& rng, double std_dev) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.normal() * std_dev;
    return t;
}

Tensor uniform_tensor(std::vector<std::size_t> shape, Rng& rng, double lo, double hi) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

std::size_t table_rows(std::size_t verts, std::size_t dim) {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim; ++a) n *= verts;
    return n;
}

void init_backbone(ParamStore& params, const FieldArch& arch, const InitPolicy& policy, Rng& rng) {
    const bool near_zero = policy.mode == InitPolicy::Mode::NearZero;
    if (const auto* d = std::get_if<DirectBackbone>(&arch.backbone)) {
        // The table is the output itself; near-zero means exactly zero.
        params.add("table", Tensor::zeros({table_rows(d->resolution + 1, arch.domain_dim),
                                           d->channels}));
        (void)rng;
    } else if (const auto* g = std::get_if<DenseGridBackbone>(&arch.backbone)) {
        const std::size_t rows = table_rows(g->resolution + 1, arch.domain_dim);
        params.add("grid", near_zero ? normal_tensor({rows, g->feature_dim}, rng, policy.sigma)
                                     : uniform_tensor({rows, g->feature_dim}, rng, -1e-4, 1e-4));
    } else if (const auto* h = std::get_if<HashGridBackbone>(&arch.backbone)) {
        for (std::size_t l = 0; l < h->levels; ++l) {
            const std::string name = "hash." + std::to_string(l);
            params.add(name, near_zero
                                 ? normal_tensor({h->table_size, h->feature_dim}, rng, policy.sigma)
                                 : uniform_tensor({h->table_size, h->feature_dim}, rng, -1e-4, 1e-4));
        }
    }
}

void init_head(ParamStore& params, const MlpSpec& spec, const InitPolicy& policy, Rng& rng) {
    const bool near_zero = policy.mode == InitPolicy::Mode::NearZero;
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        const std::size_t in = spec.layer_in(layer);
        const std::size_t out = spec.layer_out(layer);
        const bool last = layer + 1 == spec.layer_count();
        Tensor w;
        if (near_zero && last)
            w = Tensor::zeros({out, in});
        else if (near_zero)
            w = normal_tensor({out, in}, rng, policy.sigma);
        else
            w = normal_tensor({out, in}, rng, std::sqrt(2.0 / static_cast<double>(in)));
        params.add(spec.w_name("head.", layer), std::move(w));
        params.add(spec.b_name("head.", layer), Tensor::zeros({out}));
    }
}

void sphere_prefit(const FieldArch& arch, ParamStore& params, const InitPolicy& policy) {
    // Fixed pre-run fitting the raw field to the analytic sphere distance.
    constexpr std::size_t kSteps = 2000;
    constexpr std::size_t kBatch = 1024;
    Rng rng(seed_stream(policy.seed, "sphere-prefit"));
    OptConfig opt_cfg;
    opt_cfg.algo = OptAlgo::Adam;
    opt_cfg.lr = 1e-3;
    OptState opt(opt_cfg);

    for (std::size_t step = 0; step < kSteps; ++step) {
        Tensor pts = Tensor::zeros({kBatch, 3});
        Tensor target = Tensor::zeros({kBatch, 1});
        for (std::size_t i = 0; i < kBatch; ++i) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < 3; ++a) {
                const double x = rng.uniform01();
                pts.at(i, a) = x;
                d2 += (x - 0.5) * (x - 0.5);
            }
            target.at(i, 0) = std::sqrt(d2) - policy.sphere_radius;
        }
        Tape tape(params);
        const auto y = field_forward(tape, arch, pts);
        const auto loss = tape.sum_sq_error(y, target, 1.0 / static_cast<double>(kBatch));
        auto grads = tape.backward(loss, Tensor{{1, 1}, {1.0}});
        opt.step(params, grads);
    }
}

} // namespace

std::vector<std::string> field_param_names(const FieldArch& arch) {
    std::vector<std::string> names;
    if (std::holds_alternative<DirectBackbone>(arch.backbone)) {
        names.push_back("table");
    } else if (std::holds_alternative<DenseGridBackbone>(arch.backbone)) {
        names.push_back("grid");
    } else if (const auto* h = std::get_if<HashGridBackbone>(&arch.backbone)) {
        for (std::size_t l = 0; l < h->levels; ++l) names.push_back("hash." + std::to_string(l));
    }
    if (arch.head)
        for (std::size_t layer = 0; layer < arch.head->layer_count(); ++layer) {
            names.push_back(arch.head->w_name("head.", layer));
            names.push_back(arch.head->b_name("head.", layer));
        }
    return names;
}

ParamStore init_field(const FieldArch& arch, const InitPolicy& policy) {
    arch.validate();
    if (policy.mode == InitPolicy::Mode::SphereSdf) {
        if (arch.domain_dim != 3 || arch.out_channels() != 1 || !arch.head)
            throw ConfigError("sphere SDF init requires a 3-D single-channel field with a head");
    }
    if (policy.sigma <= 0.0) throw ConfigError("init sigma must be positive");

    Rng rng(seed_stream(policy.seed, "init"));
    ParamStore params;
    const InitPolicy effective =
        policy.mode == InitPolicy::Mode::SphereSdf
            ? InitPolicy{InitPolicy::Mode::Standard, policy.sigma, policy.sphere_radius, policy.seed}
            : policy;

    init_backbone(params, arch, effective, rng);
    if (arch.head) init_head(params, *arch.head, effective, rng);

    if (policy.mode == InitPolicy::Mode::SphereSdf) sphere_prefit(arch, params, policy);
    return params;
}

// ---------------------------------------------------------------------------
// Encoder convenience wrappers

Tensor dense_grid_encode(const DenseGridBackbone& grid, std::size_t dim, const Tensor& table,
                         const Tensor& points) {
    if (table.rows() != table_rows(grid.resolution + 1, dim) || table.cols() != grid.feature_dim)
        throw ConfigError("dense grid table shape does not match the grid spec");
    ParamStore store;
    store.add("grid", table);
    Tape tape(store);
    const auto y = tape.grid_gather("grid", multilinear_plan(grid.resolution, dim, points));
    return tape.value(y);
}

Tensor hash_encode(const HashGridBackbone& cfg, std::size_t dim, const ParamStore& params,
                   const Tensor& points) {
    Tape tape(params);
    std::vector<Tape::NodeId> parts;
    for (std::size_t l = 0; l < cfg.levels; ++l)
        parts.push_back(
            tape.grid_gather("hash." + std::to_string(l), hash_level_plan(cfg, l, dim, points)));
    const auto y = cfg.levels == 1 ? parts[0] : tape.concat_cols(parts);
    return tape.value(y);
}

} // namespace banf
