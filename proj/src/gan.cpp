#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "stinger/augment.hpp"
#include "stinger/error.hpp"

namespace stinger {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t code_of(FeatureKind kind, double cell) {
    return kind == FeatureKind::month ? static_cast<std::size_t>(cell) - 1 : static_cast<std::size_t>(cell);
}

}  // namespace

void GanParams::validate() const {
    if (latent_dim == 0 || batch_size == 0 || epochs < 0 || generator_hidden.empty() ||
        discriminator_hidden.empty())
        throw ParameterError("GAN sizes must be positive");
    for (auto w : generator_hidden)
        if (w == 0) throw ParameterError("GAN hidden widths must be positive");
    for (auto w : discriminator_hidden)
        if (w == 0) throw ParameterError("GAN hidden widths must be positive");
    if (!(learning_rate > 0.0)) throw ParameterError("GAN learning rate must be positive");
}

GanCodec GanCodec::fit(const Dataset& data) {
    GanCodec codec;
    codec.schema = data.schema();
    for (std::size_t j = 0; j < codec.schema.size(); ++j) {
        const auto& f = codec.schema[j];
        Block b;
        b.feature = j;
        b.kind = f.kind;
        b.offset = codec.width;
        switch (f.kind) {
            case FeatureKind::continuous: {
                std::vector<double> v(data.size());
                for (std::size_t i = 0; i < data.size(); ++i) v[i] = data.cell(i, j);
                b.width = 1;
                b.mean = sample_mean(v);
                const double sd = sample_sd(v);
                b.scale = sd > 0.0 ? sd : 1.0;
                break;
            }
            case FeatureKind::circular_degrees: b.width = 2; break;
            case FeatureKind::categorical:
            case FeatureKind::month:
                b.width = f.cardinality();
                codec.discrete_blocks.push_back(codec.blocks.size());
                codec.condition_offset.push_back(codec.condition_width);
                codec.condition_width += b.width;
                break;
        }
        codec.width += b.width;
        codec.blocks.push_back(b);
    }
    return codec;
}

Matrix GanCodec::encode(const Dataset& data) const {
    if (!(data.schema() == schema)) throw ContractError("dataset schema does not match the GAN codec");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (const auto& b : blocks) {
            const double v = data.cell(i, b.feature);
            const auto o = static_cast<Eigen::Index>(b.offset);
            switch (b.kind) {
                case FeatureKind::continuous: out(r, o) = (v - b.mean) / b.scale; break;
                case FeatureKind::circular_degrees:
                    out(r, o) = std::sin(v * kDeg);
                    out(r, o + 1) = std::cos(v * kDeg);
                    break;
                default: out(r, o + static_cast<Eigen::Index>(code_of(b.kind, v))) = 1.0; break;
            }
        }
    }
    return out;
}

Matrix GanCodec::decode_cells(const Matrix& encoded) const {
    Matrix cells(encoded.rows(), static_cast<Eigen::Index>(schema.size()));
    for (Eigen::Index r = 0; r < encoded.rows(); ++r) {
        for (const auto& b : blocks) {
            const auto o = static_cast<Eigen::Index>(b.offset);
            const auto j = static_cast<Eigen::Index>(b.feature);
            switch (b.kind) {
                case FeatureKind::continuous: cells(r, j) = encoded(r, o) * b.scale + b.mean; break;
                case FeatureKind::circular_degrees:
                    cells(r, j) = circular::wrap_degrees(std::atan2(encoded(r, o), encoded(r, o + 1)) / kDeg);
                    break;
                default: {
                    Eigen::Index best = 0;
                    encoded.row(r).segment(o, static_cast<Eigen::Index>(b.width)).maxCoeff(&best);
                    cells(r, j) = b.kind == FeatureKind::month ? static_cast<double>(best + 1)
                                                               : static_cast<double>(best);
                    break;
                }
            }
        }
    }
    return cells;
}

namespace {

// Output head: identity for continuous, tanh for (sin, cos), softmax per
// discrete block.
Matrix apply_head(const GanCodec& codec, const Matrix& raw) {
    Matrix out = raw;
    for (const auto& b : codec.blocks) {
        const auto o = static_cast<Eigen::Index>(b.offset);
        const auto w = static_cast<Eigen::Index>(b.width);
        if (b.kind == FeatureKind::circular_degrees) {
            out.middleCols(o, w) = raw.middleCols(o, w).array().tanh().matrix();
        } else if (b.kind != FeatureKind::continuous) {
            for (Eigen::Index r = 0; r < raw.rows(); ++r) {
                auto seg = raw.row(r).segment(o, w);
                const double top = seg.maxCoeff();
                Eigen::RowVectorXd e = (seg.array() - top).exp().matrix();
                out.row(r).segment(o, w) = e / e.sum();
            }
        }
    }
    return out;
}

Matrix head_backward(const GanCodec& codec, const Matrix& head, const Matrix& grad) {
    Matrix out = grad;
    for (const auto& b : codec.blocks) {
        const auto o = static_cast<Eigen::Index>(b.offset);
        const auto w = static_cast<Eigen::Index>(b.width);
        if (b.kind == FeatureKind::circular_degrees) {
            out.middleCols(o, w) =
                grad.middleCols(o, w).cwiseProduct((1.0 - head.middleCols(o, w).array().square()).matrix());
        } else if (b.kind != FeatureKind::continuous) {
            for (Eigen::Index r = 0; r < head.rows(); ++r) {
                const auto s = head.row(r).segment(o, w);
                const auto g = grad.row(r).segment(o, w);
                const double dot = s.dot(g);
                out.row(r).segment(o, w) = s.cwiseProduct((g.array() - dot).matrix());
            }
        }
    }
    return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

struct Condition {
    std::size_t block = 0;  // index into codec.discrete_blocks
    std::size_t code = 0;
};

std::size_t draw_index(const std::vector<double>& weights, std::mt19937_64& rng) {
    return std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
}

std::vector<Condition> draw_conditions(const GanCodec& codec, const std::vector<std::vector<double>>& weights,
                                       std::size_t count, std::mt19937_64& rng, Matrix& cond) {
    std::vector<Condition> out;
    cond = Matrix::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(codec.condition_width));
    if (codec.discrete_blocks.empty()) return out;
    std::uniform_int_distribution<std::size_t> pick_block(0, codec.discrete_blocks.size() - 1);
    for (std::size_t r = 0; r < count; ++r) {
        Condition c;
        c.block = pick_block(rng);
        c.code = draw_index(weights[c.block], rng);
        cond(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(codec.condition_offset[c.block] + c.code)) = 1.0;
        out.push_back(c);
    }
    return out;
}

Matrix draw_latent(std::size_t rows, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
    return z;
}

std::vector<nn::Activation> activations(std::size_t hidden, nn::Activation a) {
    std::vector<nn::Activation> out(hidden, a);
    out.push_back(nn::Activation::identity);
    return out;
}

}  // namespace

TabularGan train_tabular_gan(const Dataset& negatives, const GanParams& params) {
    params.validate();
    if (negatives.size() < 2) throw DataError("GAN training needs at least 2 rows");
    if (negatives.size() < 100)
        std::cerr << "warning: training the GAN on " << negatives.size() << " rows (fewer than 100)\n";

    TabularGan gan;
    gan.params = params;
    gan.codec = GanCodec::fit(negatives);
    const auto& codec = gan.codec;
    const Matrix data = codec.encode(negatives);
    const auto n = negatives.size();
    const auto w = codec.width;

    std::mt19937_64 rng(params.seed);
    std::vector<std::size_t> g_widths = {params.latent_dim + codec.condition_width};
    g_widths.insert(g_widths.end(), params.generator_hidden.begin(), params.generator_hidden.end());
    g_widths.push_back(w);
    gan.generator = nn::Network(g_widths, activations(params.generator_hidden.size(), nn::Activation::relu), rng);
    std::vector<std::size_t> d_widths = {w + codec.condition_width};
    d_widths.insert(d_widths.end(), params.discriminator_hidden.begin(), params.discriminator_hidden.end());
    d_widths.push_back(1);
    gan.discriminator =
        nn::Network(d_widths, activations(params.discriminator_hidden.size(), nn::Activation::leaky_relu), rng);

    // rows per category, log-frequency weights for training, raw frequencies for sampling
    std::vector<std::vector<std::vector<std::size_t>>> rows_by_code;
    std::vector<std::vector<double>> train_weights;
    for (auto bi : codec.discrete_blocks) {
        const auto& b = codec.blocks[bi];
        std::vector<std::vector<std::size_t>> by_code(b.width);
        for (std::size_t i = 0; i < n; ++i) by_code[code_of(b.kind, negatives.cell(i, b.feature))].push_back(i);
        std::vector<double> logw, freq;
        for (const auto& rows : by_code) {
            logw.push_back(std::log1p(static_cast<double>(rows.size())));
            freq.push_back(static_cast<double>(rows.size()) / static_cast<double>(n));
        }
        rows_by_code.push_back(std::move(by_code));
        train_weights.push_back(std::move(logw));
        gan.frequencies.push_back(std::move(freq));
    }

    const nn::AdamConfig adam_cfg{params.learning_rate, 0.5, 0.9, 1e-8};
    nn::Adam adam_g(gan.generator, adam_cfg);
    nn::Adam adam_d(gan.discriminator, adam_cfg);

    const auto batch = std::min(params.batch_size, n);
    const auto steps = std::max<std::size_t>(1, n / batch);
    const double inv_b = 1.0 / static_cast<double>(batch);
    std::uniform_int_distribution<std::size_t> any_row(0, n - 1);

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        double g_sum = 0.0, d_sum = 0.0;
        for (std::size_t step = 0; step < steps; ++step) {
            // discriminator
            Matrix cond;
            const auto conds = draw_conditions(codec, train_weights, batch, rng, cond);
            Matrix real(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(w));
            for (std::size_t r = 0; r < batch; ++r) {
                std::size_t row = any_row(rng);
                if (!conds.empty()) {
                    const auto& pool = rows_by_code[conds[r].block][conds[r].code];
                    row = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                }
                real.row(static_cast<Eigen::Index>(r)) = data.row(static_cast<Eigen::Index>(row));
            }
            Matrix fake = apply_head(codec, gan.generator.forward(hstack(draw_latent(batch, params.latent_dim, rng), cond)));

            nn::Tape tape_real, tape_fake;
            const Matrix logit_real = gan.discriminator.forward(hstack(real, cond), tape_real);
            const Matrix logit_fake = gan.discriminator.forward(hstack(fake, cond), tape_fake);
            double d_loss = 0.0;
            Matrix grad_real(logit_real.rows(), 1), grad_fake(logit_fake.rows(), 1);
            for (Eigen::Index r = 0; r < logit_real.rows(); ++r) {
                d_loss += (softplus(-logit_real(r, 0)) + softplus(logit_fake(r, 0))) * inv_b;
                grad_real(r, 0) = (sigmoid(logit_real(r, 0)) - 1.0) * inv_b;
                grad_fake(r, 0) = sigmoid(logit_fake(r, 0)) * inv_b;
            }
            auto gd = gan.discriminator.backward(tape_real, grad_real);
            const auto gd_fake = gan.discriminator.backward(tape_fake, grad_fake);
            for (std::size_t l = 0; l < gd.weight.size(); ++l) {
                gd.weight[l] += gd_fake.weight[l];
                gd.bias[l] += gd_fake.bias[l];
            }
            adam_d.step(gan.discriminator, gd);

            // generator
            const auto gconds = draw_conditions(codec, train_weights, batch, rng, cond);
            nn::Tape tape_g, tape_d;
            const Matrix raw = gan.generator.forward(hstack(draw_latent(batch, params.latent_dim, rng), cond), tape_g);
            const Matrix head = apply_head(codec, raw);
            const Matrix logit = gan.discriminator.forward(hstack(head, cond), tape_d);
            double g_loss = 0.0;
            Matrix grad_logit(logit.rows(), 1);
            for (Eigen::Index r = 0; r < logit.rows(); ++r) {
                g_loss += softplus(-logit(r, 0)) * inv_b;
                grad_logit(r, 0) = (sigmoid(logit(r, 0)) - 1.0) * inv_b;
            }
            Matrix grad_input;
            gan.discriminator.backward(tape_d, grad_logit, &grad_input);
            Matrix grad_raw = head_backward(codec, head, grad_input.leftCols(static_cast<Eigen::Index>(w)));
            // cross-entropy keeping the generated category on the condition
            for (std::size_t r = 0; r < gconds.size(); ++r) {
                const auto& b = codec.blocks[codec.discrete_blocks[gconds[r].block]];
                const auto o = static_cast<Eigen::Index>(b.offset);
                const auto rr = static_cast<Eigen::Index>(r);
                const auto c = o + static_cast<Eigen::Index>(gconds[r].code);
                g_loss -= std::log(std::max(head(rr, c), 1e-12)) * inv_b;
                grad_raw.row(rr).segment(o, static_cast<Eigen::Index>(b.width)) +=
                    head.row(rr).segment(o, static_cast<Eigen::Index>(b.width)) * inv_b;
                grad_raw(rr, c) -= inv_b;
            }
            adam_g.step(gan.generator, gan.generator.backward(tape_g, grad_raw));

            if (!std::isfinite(d_loss) || !std::isfinite(g_loss))
                throw TrainingDivergence("GAN loss became non-finite", epoch);
            g_sum += g_loss;
            d_sum += d_loss;
        }
        gan.generator_loss.push_back(g_sum / static_cast<double>(steps));
        gan.discriminator_loss.push_back(d_sum / static_cast<double>(steps));
    }
    return gan;
}

Dataset TabularGan::sample(std::size_t n, Seed seed) const {
    if (n < 1) throw ParameterError("sample size must be at least 1");
    std::mt19937_64 rng(seed);
    Matrix cond;
    draw_conditions(codec, frequencies, n, rng, cond);
    const Matrix z = draw_latent(n, params.latent_dim, rng);
    const Matrix head = apply_head(codec, generator.forward(hstack(z, cond)));
    return Dataset(codec.schema, codec.decode_cells(head), std::vector<int>(n, 0), {}, {},
                   std::vector<Origin>(n, Origin::synthetic));
}

}  // namespace stinger
