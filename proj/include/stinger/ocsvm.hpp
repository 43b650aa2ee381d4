#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stinger/types.hpp"

namespace stinger {

struct OcsvmParams {
    double nu = 0.5;
    double gamma = 0.0;  // 0: 1 / width
    double tolerance = 1e-4;
    std::size_t max_iterations = 10000;

    void validate() const;
};

/// nu one-class SVM with an RBF kernel, solved by pairwise (SMO) updates
/// with second-order working-set selection. Dual variables live in [0, 1]
/// and sum to nu * n.
class OneClassSvm {
public:
    OneClassSvm() = default;

    static OneClassSvm fit(const Matrix& x, const OcsvmParams& params,
                           const std::function<void(const std::string&)>& warn = {});

    /// sum_i alpha_i K(x_i, x) - rho
    std::vector<double> decision(const Matrix& x) const;
    /// Logistic squash of the decision value.
    std::vector<double> predict_proba(const Matrix& x) const;
    /// 1 when the decision value is non-negative.
    std::vector<int> predict(const Matrix& x) const;

    double rho() const { return rho_; }
    double gamma() const { return gamma_; }
    const Matrix& support_vectors() const { return sv_; }
    const std::vector<double>& coefficients() const { return coef_; }
    std::size_t iterations() const { return iterations_; }
    bool converged() const { return converged_; }
    const OcsvmParams& params() const { return params_; }

    nlohmann::json to_json() const;
    static OneClassSvm from_json(const nlohmann::json& j);

private:
    OcsvmParams params_;
    double gamma_ = 1.0;
    double rho_ = 0.0;
    Matrix sv_;
    std::vector<double> coef_;
    std::size_t iterations_ = 0;
    bool converged_ = false;
};

}  // namespace stinger
