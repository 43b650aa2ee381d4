#include "stinger/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stinger/error.hpp"

namespace stinger {

void OcsvmParams::validate() const {
    if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("nu must lie in (0, 1]");
    if (gamma < 0.0 || std::isnan(gamma)) throw ParameterError("gamma must be positive");
    if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
    if (max_iterations < 1) throw ParameterError("max_iterations must be at least 1");
}

namespace {

constexpr std::size_t kFullKernelLimit = 5000;
constexpr double kTau = 1e-12;

class Kernel {
public:
    Kernel(const Matrix& x, double gamma) : x_(x), gamma_(gamma) {
        sq_ = x.rowwise().squaredNorm();
        if (x.rows() <= static_cast<Eigen::Index>(kFullKernelLimit)) {
            full_.resize(x.rows(), x.rows());
            for (Eigen::Index i = 0; i < x.rows(); ++i) full_.row(i) = column(i).transpose();
            have_full_ = true;
        }
    }

    Eigen::VectorXd column(Eigen::Index i) const {
        if (have_full_) return full_.row(i).transpose();
        Eigen::VectorXd d = sq_.array() + sq_(i) - 2.0 * (x_ * x_.row(i).transpose()).array();
        return (-gamma_ * d.array().max(0.0)).exp();
    }

private:
    const Matrix& x_;
    double gamma_;
    Eigen::VectorXd sq_;
    Matrix full_;
    bool have_full_ = false;
};

}  // namespace

OneClassSvm OneClassSvm::fit(const Matrix& x, const OcsvmParams& params,
                             const std::function<void(const std::string&)>& warn) {
    params.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 2) throw DataError("one-class SVM needs at least 2 rows");

    OneClassSvm m;
    m.params_ = params;
    m.gamma_ = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, x.cols()));

    Kernel kernel(x, m.gamma_);
    std::vector<double> alpha(n, 0.0);
    const double total = params.nu * static_cast<double>(n);
    const auto whole = static_cast<std::size_t>(total);
    for (std::size_t i = 0; i < std::min(whole, n); ++i) alpha[i] = 1.0;
    if (whole < n) alpha[whole] = total - static_cast<double>(whole);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 0.0) grad += alpha[i] * kernel.column(static_cast<Eigen::Index>(i));

    auto upper = [&](std::size_t t) { return alpha[t] >= 1.0; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    std::size_t iter = 0;
    for (; iter < params.max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!upper(t) && -grad[static_cast<Eigen::Index>(t)] >= gmax) {
                if (-grad[static_cast<Eigen::Index>(t)] > gmax || i == n) {
                    gmax = -grad[static_cast<Eigen::Index>(t)];
                    i = t;
                }
            }
        }
        if (i == n) {
            m.converged_ = true;
            break;
        }
        const Eigen::VectorXd ki = kernel.column(static_cast<Eigen::Index>(i));
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (lower(t)) continue;
            const double gt = grad[static_cast<Eigen::Index>(t)];
            gmax2 = std::max(gmax2, gt);
            const double diff = gmax + gt;
            if (diff > 0.0) {
                double quad = 2.0 - 2.0 * ki[static_cast<Eigen::Index>(t)];
                if (quad <= 0.0) quad = kTau;
                const double obj = -diff * diff / quad;
                if (obj < best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < params.tolerance || j == n) {
            m.converged_ = true;
            break;
        }
        const Eigen::VectorXd kj = kernel.column(static_cast<Eigen::Index>(j));
        double quad = 2.0 - 2.0 * ki[static_cast<Eigen::Index>(j)];
        if (quad <= 0.0) quad = kTau;
        const double old_i = alpha[i], old_j = alpha[j];
        const double delta = (grad[static_cast<Eigen::Index>(i)] - grad[static_cast<Eigen::Index>(j)]) / quad;
        const double sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if (sum > 1.0) {
            if (alpha[i] > 1.0) {
                alpha[i] = 1.0;
                alpha[j] = sum - 1.0;
            }
        } else if (alpha[j] < 0.0) {
            alpha[j] = 0.0;
            alpha[i] = sum;
        }
        if (sum > 1.0) {
            if (alpha[j] > 1.0) {
                alpha[j] = 1.0;
                alpha[i] = sum - 1.0;
            }
        } else if (alpha[i] < 0.0) {
            alpha[i] = 0.0;
            alpha[j] = sum;
        }
        grad += (alpha[i] - old_i) * ki + (alpha[j] - old_j) * kj;
    }
    m.iterations_ = iter;
    if (!m.converged_ && warn)
        warn("one-class SVM stopped after " + std::to_string(iter) + " iterations without reaching tolerance");

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double g = grad[static_cast<Eigen::Index>(t)];
        if (upper(t)) lb = std::max(lb, g);
        else if (lower(t)) ub = std::min(ub, g);
        else {
            free_sum += g;
            ++free_count;
        }
    }
    m.rho_ = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

    std::vector<Eigen::Index> keep;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 0.0) keep.push_back(static_cast<Eigen::Index>(t));
    m.sv_.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        m.sv_.row(static_cast<Eigen::Index>(k)) = x.row(keep[k]);
        m.coef_.push_back(alpha[static_cast<std::size_t>(keep[k])]);
    }
    return m;
}

std::vector<double> OneClassSvm::decision(const Matrix& x) const {
    if (x.cols() != sv_.cols()) throw ContractError("input width does not match the one-class SVM");
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double f = -rho_;
        for (Eigen::Index k = 0; k < sv_.rows(); ++k)
            f += coef_[static_cast<std::size_t>(k)] * std::exp(-gamma_ * (sv_.row(k) - x.row(r)).squaredNorm());
        out[static_cast<std::size_t>(r)] = f;
    }
    return out;
}

std::vector<double> OneClassSvm::predict_proba(const Matrix& x) const {
    auto out = decision(x);
    for (auto& v : out) v = 1.0 / (1.0 + std::exp(-v));
    return out;
}

std::vector<int> OneClassSvm::predict(const Matrix& x) const {
    const auto f = decision(x);
    std::vector<int> out(f.size());
    std::transform(f.begin(), f.end(), out.begin(), [](double v) { return v >= 0.0 ? 1 : 0; });
    return out;
}

nlohmann::json OneClassSvm::to_json() const {
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index r = 0; r < sv_.rows(); ++r) {
        std::vector<double> row(sv_.row(r).begin(), sv_.row(r).end());
        sv.push_back(row);
    }
    return {{"params",
             {{"nu", params_.nu},
              {"gamma", params_.gamma},
              {"tolerance", params_.tolerance},
              {"max_iterations", params_.max_iterations}}},
            {"gamma", gamma_},
            {"rho", rho_},
            {"width", sv_.cols()},
            {"support_vectors", sv},
            {"coefficients", coef_},
            {"iterations", iterations_},
            {"converged", converged_}};
}

OneClassSvm OneClassSvm::from_json(const nlohmann::json& j) {
    OneClassSvm m;
    const auto& p = j.at("params");
    m.params_.nu = p.at("nu").get<double>();
    m.params_.gamma = p.at("gamma").get<double>();
    m.params_.tolerance = p.at("tolerance").get<double>();
    m.params_.max_iterations = p.at("max_iterations").get<std::size_t>();
    m.gamma_ = j.at("gamma").get<double>();
    m.rho_ = j.at("rho").get<double>();
    m.coef_ = j.at("coefficients").get<std::vector<double>>();
    const auto width = j.at("width").get<Eigen::Index>();
    const auto& sv = j.at("support_vectors");
    m.sv_.resize(static_cast<Eigen::Index>(sv.size()), width);
    for (std::size_t r = 0; r < sv.size(); ++r)
        for (Eigen::Index c = 0; c < width; ++c) m.sv_(static_cast<Eigen::Index>(r), c) = sv[r][static_cast<std::size_t>(c)].get<double>();
    m.iterations_ = j.at("iterations").get<std::size_t>();
    m.converged_ = j.at("converged").get<bool>();
    return m;
}

}  // namespace stinger
