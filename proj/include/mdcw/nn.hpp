#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mdcw::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Ordered collection of named tensors; the unit of optimization, soft
// updates, checkpointing and gradient checking.
class ParamSet {
  public:
    Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        if (index_.count(name)) throw ShapeError("duplicate tensor name: " + name);
        index_.emplace(name, entries_.size());
        entries_.emplace_back(name, Mat::Zero(rows, cols));
        return entries_.back().second;
    }
    Mat& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ShapeError("no tensor named: " + name);
        return entries_[it->second].second;
    }
    const Mat& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ShapeError("no tensor named: " + name);
        return entries_[it->second].second;
    }
    std::vector<std::pair<std::string, Mat>>& entries() { return entries_; }
    const std::vector<std::pair<std::string, Mat>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    ParamSet shaped_zeros() const {
        ParamSet out;
        for (const auto& [name, m] : entries_) out.add(name, m.rows(), m.cols());
        return out;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [name, m] : entries_) n += static_cast<std::size_t>(m.size());
        return n;
    }

    void set_zero() {
        for (auto& [name, m] : entries_) m.setZero();
    }

    bool same_shape(const ParamSet& o) const {
        if (entries_.size() != o.entries_.size()) return false;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].first != o.entries_[i].first ||
                entries_[i].second.rows() != o.entries_[i].second.rows() ||
                entries_[i].second.cols() != o.entries_[i].second.cols())
                return false;
        return true;
    }

  private:
    std::vector<std::pair<std::string, Mat>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// target <- tau * online + (1 - tau) * target, entrywise
inline void soft_update(ParamSet& target, const ParamSet& online, double tau) {
    if (!target.same_shape(online)) throw ShapeError("soft_update: parameter sets differ in shape");
    for (std::size_t i = 0; i < target.entries().size(); ++i) {
        Mat& t = target.entries()[i].second;
        const Mat& o = online.entries()[i].second;
        t = tau * o + (1.0 - tau) * t;
    }
}

struct AdamState {
    ParamSet m, v;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(const ParamSet& params) : m(params.shaped_zeros()), v(params.shaped_zeros()) {}
};

inline void adam_step(ParamSet& params, const ParamSet& grads, AdamState& st, double lr) {
    if (!params.same_shape(grads)) throw ShapeError("adam_step: gradient shapes differ");
    st.t += 1;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.entries().size(); ++i) {
        Mat& p = params.entries()[i].second;
        const Mat& g = grads.entries()[i].second;
        Mat& m = st.m.entries()[i].second;
        Mat& v = st.v.entries()[i].second;
        m = st.beta1 * m + (1.0 - st.beta1) * g;
        v = st.beta2 * v + (1.0 - st.beta2) * g.cwiseProduct(g);
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + st.eps);
    }
}

namespace detail {

inline Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }
inline Mat relu(const Mat& x) { return x.cwiseMax(0.0); }
inline Mat relu_mask(const Mat& post) { return (post.array() > 0.0).cast<double>().matrix(); }

inline void init_uniform(Mat& w, std::mt19937_64& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-s, s);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
}

inline Mat affine(const Mat& w, const Mat& x, const Mat& b) {
    Mat out = w * x;
    out.colwise() += b.col(0);
    return out;
}

} // namespace detail

// state -> GRU(hidden) -> dense(fc, ReLU) -> dense(fc, ReLU) -> dense(K, sigmoid).
// The GRU hidden state is carried across the episode by the caller; training
// treats the stored hidden state as a constant (length-1 truncation).
class PolicyNet {
  public:
    PolicyNet(int state_dim, int action_dim, int hidden = 32, int fc = 48)
        : sd_(state_dim), k_(action_dim), hd_(hidden), fcd_(fc) {
        params.add("gru.wz", hd_, sd_);
        params.add("gru.uz", hd_, hd_);
        params.add("gru.bz", hd_, 1);
        params.add("gru.wr", hd_, sd_);
        params.add("gru.ur", hd_, hd_);
        params.add("gru.br", hd_, 1);
        params.add("gru.wn", hd_, sd_);
        params.add("gru.un", hd_, hd_);
        params.add("gru.bn", hd_, 1);
        params.add("fc1.w", fcd_, hd_);
        params.add("fc1.b", fcd_, 1);
        params.add("fc2.w", fcd_, fcd_);
        params.add("fc2.b", fcd_, 1);
        params.add("out.w", k_, fcd_);
        params.add("out.b", k_, 1);
    }

    void init(std::mt19937_64& rng) {
        for (auto& [name, m] : params.entries())
            if (m.cols() > 1) detail::init_uniform(m, rng); // biases (n x 1) stay zero
    }

    int state_dim() const { return sd_; }
    int action_dim() const { return k_; }
    int hidden_dim() const { return hd_; }

    struct Cache {
        Mat x, h, z, r, unh, n, h2, a1, a2, proto;
    };

    // X: (state_dim x m), H: (hidden x m). Returns proto (K x m); the new
    // hidden states are cache.h2.
    Mat forward(const Mat& x, const Mat& h, Cache& c) const {
        if (x.rows() != sd_) throw ShapeError("PolicyNet: state dim mismatch");
        if (h.rows() != hd_ || h.cols() != x.cols()) throw ShapeError("PolicyNet: hidden shape mismatch");
        using namespace detail;
        c.x = x;
        c.h = h;
        c.z = sigmoid(affine(params.at("gru.wz"), x, params.at("gru.bz")) + params.at("gru.uz") * h);
        c.r = sigmoid(affine(params.at("gru.wr"), x, params.at("gru.br")) + params.at("gru.ur") * h);
        c.unh = params.at("gru.un") * h;
        c.n = (affine(params.at("gru.wn"), x, params.at("gru.bn")) + c.r.cwiseProduct(c.unh))
                  .array()
                  .tanh()
                  .matrix();
        c.h2 = (1.0 - c.z.array()).matrix().cwiseProduct(c.n) + c.z.cwiseProduct(h);
        c.a1 = relu(affine(params.at("fc1.w"), c.h2, params.at("fc1.b")));
        c.a2 = relu(affine(params.at("fc2.w"), c.a1, params.at("fc2.b")));
        c.proto = sigmoid(affine(params.at("out.w"), c.a2, params.at("out.b")));
        return c.proto;
    }

    std::pair<Vec, Vec> forward_step(const Vec& x, const Vec& h) const {
        Cache c;
        Mat proto = forward(x, h, c);
        return {proto.col(0), c.h2.col(0)};
    }

    // Accumulates dLoss/dParams into `grads` given dLoss/dProto.
    void backward(const Cache& c, const Mat& dproto, ParamSet& grads) const {
        using namespace detail;
        Mat d_out = dproto.cwiseProduct(c.proto).cwiseProduct((1.0 - c.proto.array()).matrix());
        grads.at("out.w") += d_out * c.a2.transpose();
        grads.at("out.b") += d_out.rowwise().sum();
        Mat d_a2 = (params.at("out.w").transpose() * d_out).cwiseProduct(relu_mask(c.a2));
        grads.at("fc2.w") += d_a2 * c.a1.transpose();
        grads.at("fc2.b") += d_a2.rowwise().sum();
        Mat d_a1 = (params.at("fc2.w").transpose() * d_a2).cwiseProduct(relu_mask(c.a1));
        grads.at("fc1.w") += d_a1 * c.h2.transpose();
        grads.at("fc1.b") += d_a1.rowwise().sum();
        Mat d_h2 = params.at("fc1.w").transpose() * d_a1;

        Mat d_n = d_h2.cwiseProduct((1.0 - c.z.array()).matrix());
        Mat d_z = d_h2.cwiseProduct(c.h - c.n);
        Mat d_n_pre = d_n.cwiseProduct((1.0 - c.n.array().square()).matrix());
        Mat d_z_pre = d_z.cwiseProduct(c.z).cwiseProduct((1.0 - c.z.array()).matrix());
        Mat d_r = d_n_pre.cwiseProduct(c.unh);
        Mat d_r_pre = d_r.cwiseProduct(c.r).cwiseProduct((1.0 - c.r.array()).matrix());

        grads.at("gru.wn") += d_n_pre * c.x.transpose();
        grads.at("gru.un") += d_n_pre.cwiseProduct(c.r) * c.h.transpose();
        grads.at("gru.bn") += d_n_pre.rowwise().sum();
        grads.at("gru.wz") += d_z_pre * c.x.transpose();
        grads.at("gru.uz") += d_z_pre * c.h.transpose();
        grads.at("gru.bz") += d_z_pre.rowwise().sum();
        grads.at("gru.wr") += d_r_pre * c.x.transpose();
        grads.at("gru.ur") += d_r_pre * c.h.transpose();
        grads.at("gru.br") += d_r_pre.rowwise().sum();
    }

    ParamSet params;

  private:
    int sd_, k_, hd_, fcd_;
};

// (state ++ action) -> dense(fc, ReLU) -> dense(fc, ReLU) -> dense(1, linear)
class QNet {
  public:
    explicit QNet(int input_dim, int fc = 48) : in_(input_dim), fcd_(fc) {
        params.add("fc1.w", fcd_, in_);
        params.add("fc1.b", fcd_, 1);
        params.add("fc2.w", fcd_, fcd_);
        params.add("fc2.b", fcd_, 1);
        params.add("out.w", 1, fcd_);
        params.add("out.b", 1, 1);
    }

    void init(std::mt19937_64& rng) {
        detail::init_uniform(params.at("fc1.w"), rng);
        detail::init_uniform(params.at("fc2.w"), rng);
        detail::init_uniform(params.at("out.w"), rng);
    }

    int input_dim() const { return in_; }

    struct Cache {
        Mat in, a1, a2;
        RowVec q;
    };

    RowVec forward(const Mat& input, Cache& c) const {
        if (input.rows() != in_) throw ShapeError("QNet: input dim mismatch");
        using namespace detail;
        c.in = input;
        c.a1 = relu(affine(params.at("fc1.w"), input, params.at("fc1.b")));
        c.a2 = relu(affine(params.at("fc2.w"), c.a1, params.at("fc2.b")));
        c.q = (params.at("out.w") * c.a2).row(0);
        c.q.array() += params.at("out.b")(0, 0);
        return c.q;
    }

    double forward_one(const Vec& input) const {
        Cache c;
        return forward(input, c)(0);
    }

    // dq: gradient on the scalar outputs, one per batch column. Optionally
    // also yields the gradient w.r.t. the input block (for the actor).
    void backward(const Cache& c, const RowVec& dq, ParamSet& grads, Mat* d_input = nullptr) const {
        using namespace detail;
        Mat d_out = dq; // 1 x m
        grads.at("out.w") += d_out * c.a2.transpose();
        grads.at("out.b")(0, 0) += d_out.sum();
        Mat d_a2 = (params.at("out.w").transpose() * d_out).cwiseProduct(relu_mask(c.a2));
        grads.at("fc2.w") += d_a2 * c.a1.transpose();
        grads.at("fc2.b") += d_a2.rowwise().sum();
        Mat d_a1 = (params.at("fc2.w").transpose() * d_a2).cwiseProduct(relu_mask(c.a1));
        grads.at("fc1.w") += d_a1 * c.in.transpose();
        grads.at("fc1.b") += d_a1.rowwise().sum();
        if (d_input) *d_input = params.at("fc1.w").transpose() * d_a1;
    }

    ParamSet params;

  private:
    int in_, fcd_;
};

// Eq.-style mean squared TD loss over a batch: L = (1/m) sum_j (y_j - q_j)^2
inline double critic_loss(const QNet& qnet, const Mat& input, const RowVec& y, ParamSet& grads) {
    if (input.cols() != y.cols()) throw ShapeError("critic_loss: batch size mismatch");
    QNet::Cache c;
    RowVec q = qnet.forward(input, c);
    const double m = static_cast<double>(y.cols());
    double loss = (y - q).squaredNorm() / m;
    RowVec dq = (2.0 / m) * (q - y);
    qnet.backward(c, dq, grads);
    return loss;
}

// Deterministic policy gradient: d/dtheta of the actor objective
//   J = -(1/m) sum_j Q(s_j, a_j) + (reg/2m) sum_j |mu(s_j,h_j) - 1/2|^2
// where a_j is the proto-action mu(s_j, h_j), optionally normalized with a
// column softmax at temperature T (softmax_t > 0). Normalization keeps the
// critic query on the simplex spanned by the one-hot encodings it is trained
// on, instead of extrapolating to multi-hot inputs; the argmax — and thus the
// deployed policy — is unchanged by it. The quadratic term keeps proto
// entries away from the exact sigmoid rails, where ordering information would
// be lost to rounding.
inline double actor_gradient(const PolicyNet& policy, const QNet& qnet, const Mat& states,
                             const Mat& hiddens, ParamSet& grads, double reg = 0.0,
                             double softmax_t = 0.0) {
    PolicyNet::Cache pc;
    Mat proto = policy.forward(states, hiddens, pc);
    Mat act = proto;
    if (softmax_t > 0.0) {
        for (Eigen::Index j = 0; j < act.cols(); ++j) {
            Vec col = proto.col(j) / softmax_t;
            col.array() -= col.maxCoeff();
            col = col.array().exp();
            act.col(j) = col / col.sum();
        }
    }
    Mat input(states.rows() + act.rows(), states.cols());
    input.topRows(states.rows()) = states;
    input.bottomRows(act.rows()) = act;
    QNet::Cache qc;
    RowVec q = qnet.forward(input, qc);
    const double m = static_cast<double>(states.cols());
    RowVec dq = RowVec::Constant(states.cols(), -1.0 / m);
    ParamSet scratch = qnet.params.shaped_zeros();
    Mat d_input;
    qnet.backward(qc, dq, scratch, &d_input);
    Mat d_proto = d_input.bottomRows(act.rows());
    if (softmax_t > 0.0) {
        // softmax VJP per column: d_proto = p .* (d_act - <d_act, p>) / T
        for (Eigen::Index j = 0; j < d_proto.cols(); ++j) {
            const Vec da = d_proto.col(j);
            const double dot = da.dot(act.col(j));
            d_proto.col(j) = act.col(j).array() * (da.array() - dot) / softmax_t;
        }
    }
    double objective = -q.sum() / m;
    if (reg != 0.0) {
        Mat off_center = proto.array() - 0.5;
        objective += (reg / (2.0 * m)) * off_center.squaredNorm();
        d_proto += (reg / m) * off_center;
    }
    policy.backward(pc, d_proto, grads);
    return objective;
}

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    bool ok = true;
};

// Central finite differences against analytic gradients. `loss` must be a
// pure function of `params`.
template <typename LossFn>
GradCheckReport grad_check(ParamSet& params, const ParamSet& analytic, LossFn loss,
                           double eps = 1e-5, double tol = 1e-4) {
    GradCheckReport rep;
    for (std::size_t t = 0; t < params.entries().size(); ++t) {
        Mat& p = params.entries()[t].second;
        const Mat& a = analytic.entries()[t].second;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double saved = p.data()[i];
            p.data()[i] = saved + eps;
            const double up = loss(const_cast<const ParamSet&>(params));
            p.data()[i] = saved - eps;
            const double down = loss(const_cast<const ParamSet&>(params));
            p.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double exact = a.data()[i];
            const double abs_err = std::abs(numeric - exact);
            const double rel = abs_err / std::max({1e-6, std::abs(numeric), std::abs(exact)});
            rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
            rep.max_rel_err = std::max(rep.max_rel_err, rel);
        }
    }
    rep.ok = rep.max_rel_err <= tol;
    return rep;
}

} // namespace mdcw::nn
