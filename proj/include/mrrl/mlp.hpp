#pragma once

#include <Eigen/Dense>

#include "mrrl/errors.hpp"
#include "mrrl/rng.hpp"

namespace mrrl {

// Two hidden tanh layers with a linear head. Weights are (out x in); batched
// activations hold one sample per column.
struct Mlp {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static Mlp create(int in, int h1, int h2, int out, double hidden_gain, double head_gain,
                      RngStream& rng);

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int output_dim() const { return static_cast<int>(w3.rows()); }
    Eigen::Index parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
};

// Activations cached by forward_batch_cached for the backward pass.
struct MlpCache {
    Eigen::MatrixXd x, h1, h2;
};

struct MlpGrads {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static MlpGrads zeros_like(const Mlp& net);
};

Eigen::MatrixXd forward_batch_cached(const Mlp& net, const Eigen::MatrixXd& x, MlpCache& cache);

// Backpropagates dL/dY (out x batch) through the cached activations.
MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dy);

// Adaptive-moment estimation over a flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
    int64_t steps() const { return t_; }

private:
    Eigen::VectorXd m_, v_;
    double beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

// Row-major flattening; the order here is the checkpoint parameter order.
void flatten_into(const Mlp& net, Eigen::VectorXd& out, Eigen::Index& offset);
void unflatten_from(Mlp& net, const Eigen::VectorXd& in, Eigen::Index& offset);
void flatten_into(const MlpGrads& grads, Eigen::VectorXd& out, Eigen::Index& offset);

}  // namespace mrrl
