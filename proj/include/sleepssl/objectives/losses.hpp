#pragma once

#include <Eigen/Dense>

namespace sleepssl {

using Eigen::MatrixXd;

// Pairwise cosine similarity between the rows of A [N x D] and B [M x D].
// Norms are stabilized with eps = 1e-8 so zero rows do not divide by zero.
MatrixXd cosine_similarity_matrix(const MatrixXd& A, const MatrixXd& B);

// Normalized-temperature cross entropy over N positive pairs. Rows are
// interleaved internally as (Zi_k, Zj_k); the loss averages both anchor
// directions over all 2N anchors. The denominator for anchor i runs over all
// other 2N-1 rows (the positive included).
double nt_xent(const MatrixXd& Zi, const MatrixXd& Zj, double tau);

// Same value, also writing d(loss)/dZi and d(loss)/dZj when non-null.
double nt_xent_grad(const MatrixXd& Zi, const MatrixXd& Zj, double tau,
                    MatrixXd* dZi, MatrixXd* dZj);

// Per-sample stack [z_t_i, z_t_j, z_s_i, z_s_j], each [N x D].
struct QuadrupleEmbedding {
    MatrixXd z_t_i, z_t_j, z_s_i, z_s_j;
    void validate() const;
};

// Per-sample 4-way contrastive term: for every sample the two time-view
// embeddings are pulled together against the spectrogram pair and vice
// versa. Mean over the 4N anchor terms.
double diverse_loss(const QuadrupleEmbedding& q, double tau_d);
double diverse_loss_grad(const QuadrupleEmbedding& q, double tau_d,
                         QuadrupleEmbedding* grads);

// lambda1 * (l_tt + l_ff + l_ss) + lambda2 * l_d
double total_loss(double l_tt, double l_ss, double l_ff, double l_d,
                  double lambda1, double lambda2);

struct LossBundle {
    double l_tt = 0, l_ss = 0, l_ff = 0, l_d = 0, total = 0;
    double lambda1 = 1.0, lambda2 = 1.0, tau = 1.0, tau_d = 10.0;
};

// Slow scalar double-loop oracles, test-only by convention; identical
// contracts to the vectorized versions.
double nt_xent_reference(const MatrixXd& Zi, const MatrixXd& Zj, double tau);
double diverse_loss_reference(const QuadrupleEmbedding& q, double tau_d);

}  // namespace sleepssl
