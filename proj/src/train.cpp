#include "bnncnf/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bnncnf {

namespace {

struct LinearLatent {
    int in = 0, out = 0;
    std::vector<double> w;  // out x in, row-major latent weights
    std::vector<double> b;

    double& at(int i, int p) { return w[static_cast<size_t>(i) * in + p]; }
    double at(int i, int p) const { return w[static_cast<size_t>(i) * in + p]; }
};

struct BnLatent {
    std::vector<double> alpha, gamma;
    std::vector<double> run_mu, run_sigma;
};

double binw(double latent) { return latent >= 0.0 ? 1.0 : -1.0; }

// Adam state for one parameter tensor. The timestep is shared across all
// tensors and advanced once per batch by the caller.
struct Adam {
    std::vector<double> m, v;

    void init(size_t size) {
        m.assign(size, 0.0);
        v.assign(size, 0.0);
    }

    void step(std::vector<double>& p, const std::vector<double>& g, double lr, long t) {
        const double c1 = 1.0 - std::pow(0.9, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(0.999, static_cast<double>(t));
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
        }
    }
};

void init_linear(LinearLatent& l, int in, int out, std::mt19937_64& rng) {
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<size_t>(in) * out);
    l.b.assign(out, 0.0);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : l.w)
        v = dist(rng);
}

}  // namespace

BnnModel train(const Dataset& data, const std::vector<int>& arch, const TrainConfig& cfg) {
    if (arch.size() < 2)
        throw std::invalid_argument("train: arch needs at least two layers");
    if (data.size() == 0)
        throw std::invalid_argument("train: empty dataset");
    if (arch.front() != data.width * data.height)
        throw std::invalid_argument("train: arch input width does not match dataset");
    if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.learning_rate <= 0.0 ||
        cfg.temperature <= 0.0)
        throw std::invalid_argument("train: bad config");

    const int n_inner = static_cast<int>(arch.size()) - 2;
    const int n_classes = arch.back();
    const double kEps = 1e-5;
    const double kMomentum = 0.9;

    std::mt19937_64 rng(cfg.seed);
    std::vector<LinearLatent> lin(n_inner);
    std::vector<BnLatent> bn(n_inner);
    for (int k = 0; k < n_inner; ++k) {
        init_linear(lin[k], arch[k], arch[k + 1], rng);
        bn[k].alpha.assign(arch[k + 1], 1.0);
        bn[k].gamma.assign(arch[k + 1], 0.0);
        bn[k].run_mu.assign(arch[k + 1], 0.0);
        bn[k].run_sigma.assign(arch[k + 1], 1.0);
    }
    LinearLatent out;
    init_linear(out, arch[arch.size() - 2], n_classes, rng);

    std::vector<Adam> opt_w(n_inner), opt_b(n_inner), opt_a(n_inner), opt_g(n_inner);
    for (int k = 0; k < n_inner; ++k) {
        opt_w[k].init(lin[k].w.size());
        opt_b[k].init(lin[k].b.size());
        opt_a[k].init(bn[k].alpha.size());
        opt_g[k].init(bn[k].gamma.size());
    }
    Adam opt_ow, opt_ob;
    opt_ow.init(out.w.size());
    opt_ob.init(out.b.size());
    long t = 0;

    const size_t n = data.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});

    // Per-batch activations, indexed [sample][unit].
    std::vector<std::vector<std::vector<double>>> xs(n_inner + 1), ys(n_inner), zs(n_inner);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = cfg.learning_rate * 0.5 *
                          (1.0 + std::cos(M_PI * epoch / static_cast<double>(cfg.epochs)));
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
            const size_t bn_sz = std::min(n - start, static_cast<size_t>(cfg.batch_size));
            for (auto& v : xs)
                v.assign(bn_sz, {});
            for (int k = 0; k < n_inner; ++k) {
                ys[k].assign(bn_sz, {});
                zs[k].assign(bn_sz, {});
            }

            for (size_t s = 0; s < bn_sz; ++s) {
                const BVec& img = data.images[order[start + s]];
                xs[0][s].assign(img.begin(), img.end());
            }

            // Forward through inner blocks with batch statistics.
            for (int k = 0; k < n_inner; ++k) {
                const LinearLatent& l = lin[k];
                for (size_t s = 0; s < bn_sz; ++s) {
                    ys[k][s].resize(l.out);
                    for (int i = 0; i < l.out; ++i) {
                        double acc = l.b[i];
                        const double* wr = &l.w[static_cast<size_t>(i) * l.in];
                        const double* xv = xs[k][s].data();
                        for (int p = 0; p < l.in; ++p)
                            acc += binw(wr[p]) * xv[p];
                        ys[k][s][i] = acc;
                    }
                }
                std::vector<double> mu(l.out, 0.0), sd(l.out, 0.0);
                for (int i = 0; i < l.out; ++i) {
                    double m = 0.0;
                    for (size_t s = 0; s < bn_sz; ++s)
                        m += ys[k][s][i];
                    m /= static_cast<double>(bn_sz);
                    double v = 0.0;
                    for (size_t s = 0; s < bn_sz; ++s) {
                        double d = ys[k][s][i] - m;
                        v += d * d;
                    }
                    v /= static_cast<double>(bn_sz);
                    mu[i] = m;
                    sd[i] = std::sqrt(std::max(v, 0.0));
                    bn[k].run_mu[i] = kMomentum * bn[k].run_mu[i] + (1.0 - kMomentum) * m;
                    bn[k].run_sigma[i] = kMomentum * bn[k].run_sigma[i] + (1.0 - kMomentum) * sd[i];
                }
                for (size_t s = 0; s < bn_sz; ++s) {
                    zs[k][s].resize(l.out);
                    xs[k + 1][s].resize(l.out);
                    for (int i = 0; i < l.out; ++i) {
                        double z = (ys[k][s][i] - mu[i]) / (sd[i] + kEps) * bn[k].alpha[i] +
                                   bn[k].gamma[i];
                        zs[k][s][i] = z;
                        xs[k + 1][s][i] = z >= 0.0 ? 1.0 : -1.0;
                    }
                }
                // Stash batch stats for the backward pass.
                ys[k].push_back(std::move(mu));
                ys[k].push_back(std::move(sd));
            }

            // Output layer + softmax cross-entropy.
            std::vector<std::vector<double>> dlogits(bn_sz);
            double loss = 0.0;
            for (size_t s = 0; s < bn_sz; ++s) {
                std::vector<double> logits(n_classes);
                for (int i = 0; i < n_classes; ++i) {
                    double acc = out.b[i];
                    const double* wr = &out.w[static_cast<size_t>(i) * out.in];
                    const double* xv = xs[n_inner][s].data();
                    for (int p = 0; p < out.in; ++p)
                        acc += binw(wr[p]) * xv[p];
                    logits[i] = acc / cfg.temperature;
                }
                double mx = *std::max_element(logits.begin(), logits.end());
                double denom = 0.0;
                for (double l : logits)
                    denom += std::exp(l - mx);
                int truth = data.labels[order[start + s]];
                loss -= (logits[truth] - mx) - std::log(denom);
                dlogits[s].resize(n_classes);
                const double scale = 1.0 / (static_cast<double>(bn_sz) * cfg.temperature);
                for (int i = 0; i < n_classes; ++i)
                    dlogits[s][i] = (std::exp(logits[i] - mx) / denom -
                                     (i == truth ? 1.0 : 0.0)) * scale;
            }
            loss /= static_cast<double>(bn_sz);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged (loss not finite) at epoch " +
                                         std::to_string(epoch));
            epoch_loss += loss;
            ++batches;
            ++t;

            // Backward: output layer.
            std::vector<std::vector<double>> dh(bn_sz, std::vector<double>(out.in, 0.0));
            {
                std::vector<double> dw(out.w.size(), 0.0), db(out.out, 0.0);
                for (size_t s = 0; s < bn_sz; ++s) {
                    const double* xv = xs[n_inner][s].data();
                    for (int i = 0; i < out.out; ++i) {
                        double g = dlogits[s][i];
                        db[i] += g;
                        const double* wr = &out.w[static_cast<size_t>(i) * out.in];
                        double* dwr = &dw[static_cast<size_t>(i) * out.in];
                        for (int p = 0; p < out.in; ++p) {
                            dwr[p] += g * xv[p];
                            dh[s][p] += g * binw(wr[p]);
                        }
                    }
                }
                for (size_t i = 0; i < out.w.size(); ++i)
                    if (std::abs(out.w[i]) > 1.0)
                        dw[i] = 0.0;  // STE clip window
                opt_ow.step(out.w, dw, lr, t);
                for (double& w : out.w)
                    w = std::clamp(w, -1.0, 1.0);
                opt_ob.step(out.b, db, lr, t);
            }

            // Backward through inner blocks (batch stats treated as constants).
            for (int k = n_inner - 1; k >= 0; --k) {
                LinearLatent& l = lin[k];
                const std::vector<double>& mu = ys[k][bn_sz];
                const std::vector<double>& sd = ys[k][bn_sz + 1];
                std::vector<double> dw(l.w.size(), 0.0), db(l.out, 0.0);
                std::vector<double> dalpha(l.out, 0.0), dgamma(l.out, 0.0);
                std::vector<std::vector<double>> dx;
                if (k > 0)
                    dx.assign(bn_sz, std::vector<double>(l.in, 0.0));
                for (size_t s = 0; s < bn_sz; ++s) {
                    const double* xv = xs[k][s].data();
                    for (int i = 0; i < l.out; ++i) {
                        double z = zs[k][s][i];
                        if (std::abs(z) > 1.0)
                            continue;  // straight-through hard-tanh window
                        double dz = dh[s][i];
                        double norm = (ys[k][s][i] - mu[i]) / (sd[i] + kEps);
                        dgamma[i] += dz;
                        dalpha[i] += dz * norm;
                        double dy = dz * bn[k].alpha[i] / (sd[i] + kEps);
                        db[i] += dy;
                        const double* wr = &l.w[static_cast<size_t>(i) * l.in];
                        double* dwr = &dw[static_cast<size_t>(i) * l.in];
                        for (int p = 0; p < l.in; ++p) {
                            dwr[p] += dy * xv[p];
                            if (k > 0)
                                dx[s][p] += dy * binw(wr[p]);
                        }
                    }
                }
                for (size_t i = 0; i < l.w.size(); ++i)
                    if (std::abs(l.w[i]) > 1.0)
                        dw[i] = 0.0;  // STE clip window
                opt_w[k].step(l.w, dw, lr, t);
                for (double& w : l.w)
                    w = std::clamp(w, -1.0, 1.0);
                opt_b[k].step(l.b, db, lr, t);
                opt_a[k].step(bn[k].alpha, dalpha, lr, t);
                opt_g[k].step(bn[k].gamma, dgamma, lr, t);
                if (k > 0)
                    dh = std::move(dx);
            }
        }
        (void)epoch_loss;
        (void)batches;
    }

    BnnModel m;
    m.arch = arch;
    for (int k = 0; k < n_inner; ++k) {
        InnerBlock b;
        b.weights.resize(lin[k].out);
        for (int i = 0; i < lin[k].out; ++i) {
            b.weights[i].resize(lin[k].in);
            for (int p = 0; p < lin[k].in; ++p)
                b.weights[i][p] = lin[k].at(i, p) >= 0.0 ? 1 : -1;
        }
        b.bias = lin[k].b;
        b.bn.mu = bn[k].run_mu;
        b.bn.sigma = bn[k].run_sigma;
        b.bn.alpha = bn[k].alpha;
        b.bn.gamma = bn[k].gamma;
        b.bn.epsilon = kEps;
        m.inner_blocks.push_back(std::move(b));
    }
    m.output_block.classes = n_classes;
    m.output_block.weights.resize(out.out);
    for (int i = 0; i < out.out; ++i) {
        m.output_block.weights[i].resize(out.in);
        for (int p = 0; p < out.in; ++p)
            m.output_block.weights[i][p] = out.at(i, p) >= 0.0 ? 1 : -1;
    }
    m.output_block.bias = out.b;
    m.validate();
    return m;
}

double evaluate(const BnnModel& m, const Dataset& data) {
    if (data.size() == 0)
        throw std::invalid_argument("evaluate: empty dataset");
    size_t correct = 0;
    for (size_t i = 0; i < data.size(); ++i)
        if (forward_reference(m, data.images[i]).label == data.labels[i])
            ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace bnncnf
