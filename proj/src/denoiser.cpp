#include "mcrage/denoiser.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "mcrage/rng.hpp"

namespace mcrage {

bool DenoiserParams::finite() const {
    return w1.allFinite() && w2.allFinite() && w3.allFinite() && b1.allFinite() &&
           b2.allFinite() && b3.allFinite() && embedding.allFinite();
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error("train config: learning_rate must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw Error("train config: dropout_rate must lie in [0,1)");
    if (epochs < 1) throw Error("train config: epochs must be >= 1");
    if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
    if (!(p_uncond >= 0.0 && p_uncond <= 1.0))
        throw Error("train config: p_uncond must lie in [0,1]");
    if (checkpoint_every < 1) throw Error("train config: checkpoint_every must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction <= 0.5))
        throw Error("train config: validation_fraction must lie in (0,0.5]");
    if (hidden < 1 || embed_dim < 2) throw Error("train config: bad network dims");
}

Eigen::RowVectorXd time_embedding(int t, int t_prime, int embed_dim) {
    const int half = embed_dim / 2;
    Eigen::RowVectorXd emb(embed_dim);
    const double tau = double(t) / double(t_prime);
    const double log_max = std::log(200.0);
    for (int i = 0; i < half; ++i) {
        const double omega = half == 1 ? 1.0 : std::exp(log_max * double(i) / double(half - 1));
        emb[i] = std::sin(tau * omega);
        emb[half + i] = std::cos(tau * omega);
    }
    if (embed_dim % 2 == 1) emb[embed_dim - 1] = tau;
    return emb;
}

DenoiserParams init_params(int d, int group_count, int embed_dim, int hidden, std::uint64_t seed,
                           int t_prime) {
    if (d < 1 || group_count < 1 || embed_dim < 2 || hidden < 1)
        throw Error("init_params: all dims must be >= 1");
    DenoiserParams p;
    p.d = d;
    p.group_count = group_count;
    p.embed_dim = embed_dim;
    p.hidden = hidden;
    p.t_prime = t_prime;

    Rng rng(seed);
    auto fill = [&](Eigen::MatrixXd& m, long fan_in) {
        const double s = 1.0 / std::sqrt(double(fan_in));
        for (long i = 0; i < m.rows(); ++i)
            for (long j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * s;
    };
    const int in = p.input_dim();
    p.w1.resize(in, hidden);
    fill(p.w1, in);
    p.w2.resize(hidden, hidden);
    fill(p.w2, hidden);
    p.w3.resize(hidden, d);
    fill(p.w3, hidden);
    p.b1 = Eigen::RowVectorXd::Zero(hidden);
    p.b2 = Eigen::RowVectorXd::Zero(hidden);
    p.b3 = Eigen::RowVectorXd::Zero(d);
    p.embedding.resize(group_count + 1, embed_dim);
    fill(p.embedding, embed_dim);
    return p;
}

DropoutMask make_dropout_mask(int batch, int hidden, double rate, Rng& rng) {
    DropoutMask m;
    m.h1.resize(batch, hidden);
    m.h2.resize(batch, hidden);
    const double keep = 1.0 - rate;
    const double scale = 1.0 / keep;
    for (auto* layer : {&m.h1, &m.h2})
        for (int i = 0; i < batch; ++i)
            for (int j = 0; j < hidden; ++j)
                (*layer)(i, j) = rng.uniform() < keep ? scale : 0.0;
    return m;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ForwardCache {
    Eigen::MatrixXd input; // [x_t | time emb | class emb]
    Eigen::MatrixXd z1, h1, z2, h2; // pre/post activation (post includes dropout)
    Eigen::MatrixXd out;
};

void check_forward_args(const DenoiserParams& p, const Eigen::MatrixXd& x_t,
                        const std::vector<int>& t, const std::vector<int>& cls) {
    if (p.t_prime < 1) throw Error("forward: params have no bound T'");
    if (x_t.cols() != p.d) throw Error("forward: x_t has wrong dimension");
    const std::size_t n = static_cast<std::size_t>(x_t.rows());
    if (t.size() != n || cls.size() != n) throw Error("forward: batch sizes disagree");
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] < 1 || t[i] > p.t_prime)
            throw Error("forward: step outside [1,T'] at row " + std::to_string(i));
        if (cls[i] < 0 || cls[i] > p.group_count)
            throw Error("forward: class id outside [0,G] at row " + std::to_string(i));
    }
}

ForwardCache run_forward(const DenoiserParams& p, const Eigen::MatrixXd& x_t,
                         const std::vector<int>& t, const std::vector<int>& cls,
                         const DropoutMask* mask) {
    check_forward_args(p, x_t, t, cls);
    const long n = x_t.rows();
    ForwardCache c;
    c.input.resize(n, p.input_dim());
    c.input.leftCols(p.d) = x_t;
    for (long i = 0; i < n; ++i) {
        c.input.block(i, p.d, 1, p.embed_dim) =
            time_embedding(t[static_cast<std::size_t>(i)], p.t_prime, p.embed_dim);
        c.input.block(i, p.d + p.embed_dim, 1, p.embed_dim) =
            p.embedding.row(cls[static_cast<std::size_t>(i)]);
    }
    auto silu = [](const Eigen::MatrixXd& z) -> Eigen::MatrixXd {
        return z.array() / (1.0 + (-z.array()).exp());
    };
    c.z1 = (c.input * p.w1).rowwise() + p.b1;
    c.h1 = silu(c.z1);
    if (mask) c.h1 = c.h1.cwiseProduct(mask->h1);
    c.z2 = (c.h1 * p.w2).rowwise() + p.b2;
    c.h2 = silu(c.z2);
    if (mask) c.h2 = c.h2.cwiseProduct(mask->h2);
    c.out = (c.h2 * p.w3).rowwise() + p.b3;
    return c;
}

ParamGrads zero_grads(const DenoiserParams& p) {
    ParamGrads g = p;
    g.w1.setZero();
    g.w2.setZero();
    g.w3.setZero();
    g.b1.setZero();
    g.b2.setZero();
    g.b3.setZero();
    g.embedding.setZero();
    return g;
}

// d silu / dz = sigmoid(z) (1 + z (1 - sigmoid(z)))
Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z) {
    Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
    return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

Eigen::MatrixXd forward(const DenoiserParams& params, const Eigen::MatrixXd& x_t,
                        const std::vector<int>& t, const std::vector<int>& cls,
                        const DropoutMask* mask) {
    return run_forward(params, x_t, t, cls, mask).out;
}

double loss_simple(const DenoiserParams& params, const Eigen::MatrixXd& x0,
                   const std::vector<int>& t, const Eigen::MatrixXd& eps,
                   const std::vector<int>& cls, const NoiseSchedule& sched,
                   const DropoutMask* mask) {
    const Eigen::MatrixXd x_t = forward_sample_batch(x0, t, eps, sched);
    const Eigen::MatrixXd out = forward(params, x_t, t, cls, mask);
    return (out - eps).rowwise().squaredNorm().mean();
}

ParamGrads gradient(const DenoiserParams& params, const Eigen::MatrixXd& x0,
                    const std::vector<int>& t, const Eigen::MatrixXd& eps,
                    const std::vector<int>& cls, const NoiseSchedule& sched,
                    const DropoutMask* mask, double* loss_out) {
    const Eigen::MatrixXd x_t = forward_sample_batch(x0, t, eps, sched);
    const ForwardCache c = run_forward(params, x_t, t, cls, mask);
    const long n = x_t.rows();
    if (loss_out) *loss_out = (c.out - eps).rowwise().squaredNorm().mean();

    ParamGrads g = zero_grads(params);
    const Eigen::MatrixXd d_out = (2.0 / double(n)) * (c.out - eps);

    g.w3 = c.h2.transpose() * d_out;
    g.b3 = d_out.colwise().sum();
    Eigen::MatrixXd d_h2 = d_out * params.w3.transpose();
    if (mask) d_h2 = d_h2.cwiseProduct(mask->h2);
    const Eigen::MatrixXd d_z2 = d_h2.cwiseProduct(silu_grad(c.z2));

    g.w2 = c.h1.transpose() * d_z2;
    g.b2 = d_z2.colwise().sum();
    Eigen::MatrixXd d_h1 = d_z2 * params.w2.transpose();
    if (mask) d_h1 = d_h1.cwiseProduct(mask->h1);
    const Eigen::MatrixXd d_z1 = d_h1.cwiseProduct(silu_grad(c.z1));

    g.w1 = c.input.transpose() * d_z1;
    g.b1 = d_z1.colwise().sum();

    const Eigen::MatrixXd d_input = d_z1 * params.w1.transpose();
    for (long i = 0; i < n; ++i)
        g.embedding.row(cls[static_cast<std::size_t>(i)]) +=
            d_input.block(i, params.d + params.embed_dim, 1, params.embed_dim);
    return g;
}

AdamState init_adam(const DenoiserParams& params) {
    AdamState s;
    s.m = zero_grads(params);
    s.v = zero_grads(params);
    s.step = 0;
    return s;
}

void adam_step(DenoiserParams& params, const ParamGrads& grads, AdamState& state, double lr) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, double(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, double(state.step));
    auto update = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                      Eigen::MatrixXd& v) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
    };
    auto update_row = [&](Eigen::RowVectorXd& p, const Eigen::RowVectorXd& g,
                          Eigen::RowVectorXd& m, Eigen::RowVectorXd& v) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
    };
    update(params.w1, grads.w1, state.m.w1, state.v.w1);
    update(params.w2, grads.w2, state.m.w2, state.v.w2);
    update(params.w3, grads.w3, state.m.w3, state.v.w3);
    update_row(params.b1, grads.b1, state.m.b1, state.v.b1);
    update_row(params.b2, grads.b2, state.m.b2, state.v.b2);
    update_row(params.b3, grads.b3, state.m.b3, state.v.b3);
    update(params.embedding, grads.embedding, state.m.embedding, state.v.embedding);
}

TrainResult train(const Eigen::MatrixXd& features, const std::vector<int>& group_ids,
                  int group_count, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const ProbeFn& probe) {
    cfg.validate();
    const long n = features.rows();
    if (n < 1) throw Error("train: empty training set");
    if (static_cast<long>(group_ids.size()) != n) throw Error("train: group id count mismatch");
    for (int gid : group_ids)
        if (gid < 0 || gid >= group_count) throw Error("train: group id outside [0,G)");

    const int d = static_cast<int>(features.cols());
    DenoiserParams params = init_params(d, group_count, cfg.embed_dim, cfg.hidden,
                                        derive_seed(cfg.seed, "init"), sched.t_prime);
    AdamState adam = init_adam(params);
    Rng rng(derive_seed(cfg.seed, "epochs"));

    TrainResult result;
    result.loss_curve.reserve(static_cast<std::size_t>(cfg.epochs));
    Checkpoint best;
    best.epoch = cfg.epochs;
    best.f1 = std::nan("");
    bool have_probe_best = false;

    std::vector<long> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0L);

    const int uncond = params.unconditional_token();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(perm);
        double epoch_loss = 0.0;
        for (long start = 0; start < n; start += cfg.batch_size) {
            const long b = std::min<long>(cfg.batch_size, n - start);
            Eigen::MatrixXd x0(b, d), eps(b, d);
            std::vector<int> t(static_cast<std::size_t>(b)), cls(static_cast<std::size_t>(b));
            for (long i = 0; i < b; ++i) {
                const long row = perm[static_cast<std::size_t>(start + i)];
                x0.row(i) = features.row(row);
                t[static_cast<std::size_t>(i)] = 1 + rng.uniform_int(sched.t_prime);
                cls[static_cast<std::size_t>(i)] =
                    (cfg.p_uncond > 0.0 && rng.uniform() < cfg.p_uncond)
                        ? uncond
                        : group_ids[static_cast<std::size_t>(row)];
                for (int j = 0; j < d; ++j) eps(i, j) = rng.normal();
            }
            DropoutMask mask;
            const bool use_mask = cfg.dropout_rate > 0.0;
            if (use_mask)
                mask = make_dropout_mask(static_cast<int>(b), cfg.hidden, cfg.dropout_rate, rng);
            double batch_loss = 0.0;
            const ParamGrads g = gradient(params, x0, t, eps, cls, sched,
                                          use_mask ? &mask : nullptr, &batch_loss);
            adam_step(params, g, adam, cfg.learning_rate);
            epoch_loss += batch_loss * double(b);
        }
        epoch_loss /= double(n);
        if (!std::isfinite(epoch_loss))
            throw Error("train: loss diverged at epoch " + std::to_string(epoch) +
                        "; last finite epoch " + std::to_string(epoch - 1));
        result.loss_curve.push_back(epoch_loss);

        if (probe && epoch % cfg.checkpoint_every == 0) {
            const double f1 = probe(params, epoch);
            result.f1_probes.push_back({epoch, f1});
            if (!have_probe_best || f1 > best.f1) {
                best.params = params;
                best.epoch = epoch;
                best.f1 = f1;
                have_probe_best = true;
            }
        }
    }
    if (!have_probe_best) {
        best.params = std::move(params);
        best.epoch = cfg.epochs;
        best.f1 = std::nan("");
    }
    result.best = std::move(best);
    return result;
}

EpsFn make_eps_fn(const DenoiserParams& params) {
    return [&params](const Eigen::MatrixXd& x, int t, const std::vector<int>& cls) {
        const std::vector<int> ts(static_cast<std::size_t>(x.rows()), t);
        return forward(params, x, ts, cls, nullptr);
    };
}

Eigen::MatrixXd sample(const DenoiserParams& params, const NoiseSchedule& sched, int class_id,
                       int count, const GuidanceConfig& guidance, std::uint64_t seed) {
    if (class_id < 0 || class_id >= params.group_count)
        throw Error("sample: class id outside [0,G)");
    if (count < 1) throw Error("sample: count must be >= 1");
    GuidanceConfig g = guidance;
    g.unconditional_token = params.unconditional_token();
    return sample_rows(make_eps_fn(params), params.d, sched, class_id, 0, count, g, seed);
}

// --- checkpoint file -------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'C', 'R', 'A', 'G', 'E', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void put_tensor(std::ostream& out, const Eigen::MatrixXd& m) {
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

void get_tensor(std::istream& in, Eigen::MatrixXd& m) {
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) m(i, j) = get_f64(in);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const DenoiserParams& p = ckpt.params;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("save_checkpoint: cannot open '" + tmp + "'");
        out.write(kMagic, 8);
        put_u32(out, kFormatVersion);
        put_u32(out, static_cast<std::uint32_t>(p.d));
        put_u32(out, static_cast<std::uint32_t>(p.group_count));
        put_u32(out, static_cast<std::uint32_t>(p.embed_dim));
        put_u32(out, static_cast<std::uint32_t>(p.hidden));
        put_u32(out, static_cast<std::uint32_t>(p.t_prime));
        put_tensor(out, p.w1);
        Eigen::MatrixXd tmpv;
        put_tensor(out, tmpv = p.b1);
        put_tensor(out, p.w2);
        put_tensor(out, tmpv = p.b2);
        put_tensor(out, p.w3);
        put_tensor(out, tmpv = p.b3);
        put_tensor(out, p.embedding);
        if (!out) throw Error("save_checkpoint: write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_checkpoint: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw Error("load_checkpoint: '" + path + "' is not a checkpoint file");
    const std::uint32_t version = get_u32(in);
    if (version != kFormatVersion)
        throw Error("load_checkpoint: unsupported format version " + std::to_string(version));
    Checkpoint ckpt;
    DenoiserParams& p = ckpt.params;
    p.d = static_cast<int>(get_u32(in));
    p.group_count = static_cast<int>(get_u32(in));
    p.embed_dim = static_cast<int>(get_u32(in));
    p.hidden = static_cast<int>(get_u32(in));
    p.t_prime = static_cast<int>(get_u32(in));
    ckpt.epoch = 0;
    ckpt.f1 = std::nan("");

    p.w1.resize(p.input_dim(), p.hidden);
    p.w2.resize(p.hidden, p.hidden);
    p.w3.resize(p.hidden, p.d);
    p.embedding.resize(p.group_count + 1, p.embed_dim);
    Eigen::MatrixXd b1(1, p.hidden), b2(1, p.hidden), b3(1, p.d);
    get_tensor(in, p.w1);
    get_tensor(in, b1);
    get_tensor(in, p.w2);
    get_tensor(in, b2);
    get_tensor(in, p.w3);
    get_tensor(in, b3);
    get_tensor(in, p.embedding);
    if (!in) throw Error("load_checkpoint: '" + path + "' is truncated");
    p.b1 = b1.row(0);
    p.b2 = b2.row(0);
    p.b3 = b3.row(0);
    return ckpt;
}

}  // namespace mcrage
