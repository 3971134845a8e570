#include "sleepssl/objectives/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace sleepssl {

namespace {

constexpr double kNormEps = 1e-8;

Eigen::VectorXd stabilized_norms(const MatrixXd& A) {
    return A.rowwise().norm().array() + kNormEps;
}

// Gradient of sum_ab M[a][b] * cos(z_a, z_b) w.r.t. Z, where M carries the
// loss sensitivities (diagonal ignored). cos uses eps-stabilized norms.
MatrixXd cosine_backward(const MatrixXd& Z, const MatrixXd& M) {
    const Eigen::VectorXd n = stabilized_norms(Z);
    MatrixXd Uhat = Z.array().colwise() / n.array();  // z_b / nb
    MatrixXd C = Uhat * Uhat.transpose();
    Eigen::VectorXd r = (M.array() * C.array()).rowwise().sum();
    MatrixXd V = M * Uhat;
    // unit direction of z_a (0 for zero rows)
    Eigen::VectorXd raw = Z.rowwise().norm();
    MatrixXd G(Z.rows(), Z.cols());
    for (Eigen::Index a = 0; a < Z.rows(); ++a) {
        Eigen::RowVectorXd ahat = Eigen::RowVectorXd::Zero(Z.cols());
        if (raw(a) > 0) ahat = Z.row(a) / raw(a);
        G.row(a) = (V.row(a) - r(a) * ahat) / n(a);
    }
    return G;
}

}  // namespace

MatrixXd cosine_similarity_matrix(const MatrixXd& A, const MatrixXd& B) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("cosine: dimension mismatch");
    const Eigen::VectorXd na = stabilized_norms(A);
    const Eigen::VectorXd nb = stabilized_norms(B);
    MatrixXd C = A * B.transpose();
    C.array().colwise() /= na.array();
    C.array().rowwise() /= nb.transpose().array();
    return C;
}

void QuadrupleEmbedding::validate() const {
    if (z_t_i.rows() != z_t_j.rows() || z_t_i.rows() != z_s_i.rows() ||
        z_t_i.rows() != z_s_j.rows() || z_t_i.cols() != z_t_j.cols() ||
        z_t_i.cols() != z_s_i.cols() || z_t_i.cols() != z_s_j.cols())
        throw std::invalid_argument("quadruple embedding: shape mismatch");
    if (z_t_i.rows() < 1 || z_t_i.cols() < 1)
        throw std::invalid_argument("quadruple embedding: empty");
}

static MatrixXd interleave(const MatrixXd& Zi, const MatrixXd& Zj) {
    if (Zi.rows() != Zj.rows() || Zi.cols() != Zj.cols())
        throw std::invalid_argument("nt_xent: shape mismatch");
    if (Zi.rows() < 1) throw std::invalid_argument("nt_xent: empty batch");
    MatrixXd Z(2 * Zi.rows(), Zi.cols());
    for (Eigen::Index k = 0; k < Zi.rows(); ++k) {
        Z.row(2 * k) = Zi.row(k);
        Z.row(2 * k + 1) = Zj.row(k);
    }
    return Z;
}

double nt_xent_grad(const MatrixXd& Zi, const MatrixXd& Zj, double tau,
                    MatrixXd* dZi, MatrixXd* dZj) {
    if (!(tau > 0.0)) throw std::invalid_argument("nt_xent: tau must be > 0");
    const MatrixXd Z = interleave(Zi, Zj);
    const Eigen::Index two_n = Z.rows();
    MatrixXd S = cosine_similarity_matrix(Z, Z) / tau;

    double loss = 0.0;
    MatrixXd G = MatrixXd::Zero(two_n, two_n);  // dL/dS
    for (Eigen::Index i = 0; i < two_n; ++i) {
        const Eigen::Index pos = i ^ 1;
        // log-sum-exp over k != i
        double mx = -1e300;
        for (Eigen::Index k = 0; k < two_n; ++k)
            if (k != i) mx = std::max(mx, S(i, k));
        double denom = 0.0;
        for (Eigen::Index k = 0; k < two_n; ++k)
            if (k != i) denom += std::exp(S(i, k) - mx);
        loss += -(S(i, pos) - mx) + std::log(denom);
        if (dZi || dZj) {
            for (Eigen::Index k = 0; k < two_n; ++k)
                if (k != i) G(i, k) = std::exp(S(i, k) - mx) / denom;
            G(i, pos) -= 1.0;
        }
    }
    loss /= static_cast<double>(two_n);

    if (dZi || dZj) {
        // S(a,b) and S(b,a) are distinct entries of the same cosine pair;
        // fold both sensitivities into one coefficient matrix.
        MatrixXd M = (G + G.transpose()) / (tau * static_cast<double>(two_n));
        MatrixXd dZ = cosine_backward(Z, M);
        if (dZi) {
            dZi->resize(Zi.rows(), Zi.cols());
            for (Eigen::Index k = 0; k < Zi.rows(); ++k)
                dZi->row(k) = dZ.row(2 * k);
        }
        if (dZj) {
            dZj->resize(Zj.rows(), Zj.cols());
            for (Eigen::Index k = 0; k < Zj.rows(); ++k)
                dZj->row(k) = dZ.row(2 * k + 1);
        }
    }
    return loss;
}

double nt_xent(const MatrixXd& Zi, const MatrixXd& Zj, double tau) {
    return nt_xent_grad(Zi, Zj, tau, nullptr, nullptr);
}

double diverse_loss_grad(const QuadrupleEmbedding& q, double tau_d,
                         QuadrupleEmbedding* grads) {
    if (!(tau_d > 0.0))
        throw std::invalid_argument("diverse_loss: tau_d must be > 0");
    q.validate();
    const Eigen::Index n = q.z_t_i.rows();
    const Eigen::Index d = q.z_t_i.cols();

    if (grads) {
        grads->z_t_i = MatrixXd::Zero(n, d);
        grads->z_t_j = MatrixXd::Zero(n, d);
        grads->z_s_i = MatrixXd::Zero(n, d);
        grads->z_s_j = MatrixXd::Zero(n, d);
    }

    // anchor -> positive within the 4-stack: (0,1), (1,0), (2,3), (3,2)
    static constexpr int kPos[4] = {1, 0, 3, 2};
    double loss = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        MatrixXd Z(4, d);
        Z.row(0) = q.z_t_i.row(k);
        Z.row(1) = q.z_t_j.row(k);
        Z.row(2) = q.z_s_i.row(k);
        Z.row(3) = q.z_s_j.row(k);
        MatrixXd S = cosine_similarity_matrix(Z, Z) / tau_d;
        MatrixXd G = MatrixXd::Zero(4, 4);
        for (int a = 0; a < 4; ++a) {
            double mx = -1e300;
            for (int i = 0; i < 4; ++i)
                if (i != a) mx = std::max(mx, S(a, i));
            double denom = 0.0;
            for (int i = 0; i < 4; ++i)
                if (i != a) denom += std::exp(S(a, i) - mx);
            loss += -(S(a, kPos[a]) - mx) + std::log(denom);
            if (grads) {
                for (int i = 0; i < 4; ++i)
                    if (i != a) G(a, i) = std::exp(S(a, i) - mx) / denom;
                G(a, kPos[a]) -= 1.0;
            }
        }
        if (grads) {
            MatrixXd M =
                (G + G.transpose()) / (tau_d * 4.0 * static_cast<double>(n));
            MatrixXd dZ = cosine_backward(Z, M);
            grads->z_t_i.row(k) = dZ.row(0);
            grads->z_t_j.row(k) = dZ.row(1);
            grads->z_s_i.row(k) = dZ.row(2);
            grads->z_s_j.row(k) = dZ.row(3);
        }
    }
    return loss / (4.0 * static_cast<double>(n));
}

double diverse_loss(const QuadrupleEmbedding& q, double tau_d) {
    return diverse_loss_grad(q, tau_d, nullptr);
}

double total_loss(double l_tt, double l_ss, double l_ff, double l_d,
                  double lambda1, double lambda2) {
    return lambda1 * (l_tt + l_ff + l_ss) + lambda2 * l_d;
}

double nt_xent_reference(const MatrixXd& Zi, const MatrixXd& Zj, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("nt_xent: tau must be > 0");
    const MatrixXd Z = interleave(Zi, Zj);
    const int two_n = static_cast<int>(Z.rows());
    const int d = static_cast<int>(Z.cols());
    auto cosine = [&](int a, int b) {
        double dot = 0, na = 0, nb = 0;
        for (int c = 0; c < d; ++c) {
            dot += Z(a, c) * Z(b, c);
            na += Z(a, c) * Z(a, c);
            nb += Z(b, c) * Z(b, c);
        }
        return dot / ((std::sqrt(na) + kNormEps) * (std::sqrt(nb) + kNormEps));
    };
    double total = 0.0;
    for (int i = 0; i < two_n; ++i) {
        const int j = i ^ 1;
        double denom = 0.0;
        for (int k = 0; k < two_n; ++k)
            if (k != i) denom += std::exp(cosine(i, k) / tau);
        total += -std::log(std::exp(cosine(i, j) / tau) / denom);
    }
    return total / two_n;
}

double diverse_loss_reference(const QuadrupleEmbedding& q, double tau_d) {
    if (!(tau_d > 0.0))
        throw std::invalid_argument("diverse_loss: tau_d must be > 0");
    q.validate();
    const int n = static_cast<int>(q.z_t_i.rows());
    const int d = static_cast<int>(q.z_t_i.cols());
    static constexpr int kPos[4] = {1, 0, 3, 2};
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        std::vector<Eigen::RowVectorXd> z = {q.z_t_i.row(k), q.z_t_j.row(k),
                                             q.z_s_i.row(k), q.z_s_j.row(k)};
        auto cosine = [&](int a, int b) {
            double dot = 0, na = 0, nb = 0;
            for (int c = 0; c < d; ++c) {
                dot += z[a](c) * z[b](c);
                na += z[a](c) * z[a](c);
                nb += z[b](c) * z[b](c);
            }
            return dot /
                   ((std::sqrt(na) + kNormEps) * (std::sqrt(nb) + kNormEps));
        };
        for (int a = 0; a < 4; ++a) {
            double denom = 0.0;
            for (int i = 0; i < 4; ++i)
                if (i != a) denom += std::exp(cosine(a, i) / tau_d);
            total += -std::log(std::exp(cosine(a, kPos[a]) / tau_d) / denom);
        }
    }
    return total / (4.0 * n);
}

}  // namespace sleepssl
