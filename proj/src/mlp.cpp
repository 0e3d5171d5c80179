#include "mrrl/mlp.hpp"

namespace mrrl {

namespace {

// Orthogonal rows/columns scaled by gain; canonical sign via the R diagonal so
// the result is a pure function of the rng draw.
Eigen::MatrixXd orthogonal_init(int rows, int cols, double gain, RngStream& rng) {
    const bool tall = rows >= cols;
    const int r = tall ? rows : cols;
    const int c = tall ? cols : rows;
    Eigen::MatrixXd a(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
    const Eigen::MatrixXd rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    for (int j = 0; j < c; ++j)
        if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
    Eigen::MatrixXd w = tall ? q : Eigen::MatrixXd(q.transpose());
    return gain * w;
}

}  // namespace

Mlp Mlp::create(int in, int h1, int h2, int out, double hidden_gain, double head_gain,
                RngStream& rng) {
    Mlp net;
    net.w1 = orthogonal_init(h1, in, hidden_gain, rng);
    net.b1 = Eigen::VectorXd::Zero(h1);
    net.w2 = orthogonal_init(h2, h1, hidden_gain, rng);
    net.b2 = Eigen::VectorXd::Zero(h2);
    net.w3 = orthogonal_init(out, h2, head_gain, rng);
    net.b3 = Eigen::VectorXd::Zero(out);
    return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    if (x.size() != w1.cols()) throw ContractViolation("Mlp::forward: input dimension mismatch");
    const Eigen::VectorXd h1 = (w1 * x + b1).array().tanh();
    const Eigen::VectorXd h2 = (w2 * h1 + b2).array().tanh();
    return w3 * h2 + b3;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
    if (x.rows() != w1.cols()) throw ContractViolation("Mlp::forward_batch: input dimension mismatch");
    const Eigen::MatrixXd h1 = ((w1 * x).colwise() + b1).array().tanh();
    const Eigen::MatrixXd h2 = ((w2 * h1).colwise() + b2).array().tanh();
    return (w3 * h2).colwise() + b3;
}

Eigen::MatrixXd forward_batch_cached(const Mlp& net, const Eigen::MatrixXd& x, MlpCache& cache) {
    if (x.rows() != net.w1.cols())
        throw ContractViolation("forward_batch_cached: input dimension mismatch");
    cache.x = x;
    cache.h1 = ((net.w1 * x).colwise() + net.b1).array().tanh();
    cache.h2 = ((net.w2 * cache.h1).colwise() + net.b2).array().tanh();
    return (net.w3 * cache.h2).colwise() + net.b3;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
    MlpGrads g;
    g.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    g.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    g.w3 = Eigen::MatrixXd::Zero(net.w3.rows(), net.w3.cols());
    g.b1 = Eigen::VectorXd::Zero(net.b1.size());
    g.b2 = Eigen::VectorXd::Zero(net.b2.size());
    g.b3 = Eigen::VectorXd::Zero(net.b3.size());
    return g;
}

MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dy) {
    MlpGrads g;
    g.w3 = dy * cache.h2.transpose();
    g.b3 = dy.rowwise().sum();
    const Eigen::MatrixXd d2 =
        (net.w3.transpose() * dy).array() * (1.0 - cache.h2.array().square());
    g.w2 = d2 * cache.h1.transpose();
    g.b2 = d2.rowwise().sum();
    const Eigen::MatrixXd d1 =
        (net.w2.transpose() * d2).array() * (1.0 - cache.h1.array().square());
    g.w1 = d1 * cache.x.transpose();
    g.b1 = d1.rowwise().sum();
    return g;
}

Adam::Adam(Eigen::Index size, double beta1, double beta2, double eps)
    : m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)), beta1_(beta1),
      beta2_(beta2), eps_(eps) {}

void Adam::update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ContractViolation("Adam::update: parameter size mismatch");
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

namespace {

void flatten_matrix(const Eigen::MatrixXd& m, Eigen::VectorXd& out, Eigen::Index& offset) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[offset++] = m(r, c);
}

void unflatten_matrix(Eigen::MatrixXd& m, const Eigen::VectorXd& in, Eigen::Index& offset) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in[offset++];
}

}  // namespace

void flatten_into(const Mlp& net, Eigen::VectorXd& out, Eigen::Index& offset) {
    flatten_matrix(net.w1, out, offset);
    for (Eigen::Index i = 0; i < net.b1.size(); ++i) out[offset++] = net.b1[i];
    flatten_matrix(net.w2, out, offset);
    for (Eigen::Index i = 0; i < net.b2.size(); ++i) out[offset++] = net.b2[i];
    flatten_matrix(net.w3, out, offset);
    for (Eigen::Index i = 0; i < net.b3.size(); ++i) out[offset++] = net.b3[i];
}

void unflatten_from(Mlp& net, const Eigen::VectorXd& in, Eigen::Index& offset) {
    unflatten_matrix(net.w1, in, offset);
    for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1[i] = in[offset++];
    unflatten_matrix(net.w2, in, offset);
    for (Eigen::Index i = 0; i < net.b2.size(); ++i) net.b2[i] = in[offset++];
    unflatten_matrix(net.w3, in, offset);
    for (Eigen::Index i = 0; i < net.b3.size(); ++i) net.b3[i] = in[offset++];
}

void flatten_into(const MlpGrads& grads, Eigen::VectorXd& out, Eigen::Index& offset) {
    flatten_matrix(grads.w1, out, offset);
    for (Eigen::Index i = 0; i < grads.b1.size(); ++i) out[offset++] = grads.b1[i];
    flatten_matrix(grads.w2, out, offset);
    for (Eigen::Index i = 0; i < grads.b2.size(); ++i) out[offset++] = grads.b2[i];
    flatten_matrix(grads.w3, out, offset);
    for (Eigen::Index i = 0; i < grads.b3.size(); ++i) out[offset++] = grads.b3[i];
}

}  // namespace mrrl
