#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shapekrrc/kernels.hpp"
#include "shapekrrc/shape.hpp"

namespace shapekrrc {

// Predicted label plus the per-class objective values (lower = closer).
// The label is the argmin; ties break toward the lowest class index.
struct Prediction {
    int label;
    std::vector<double> per_class_scores;  // aligned with the model's class_labels
};

// ---------------------------------------------------------------------------
// Naive ridge-regression classifier: shapes treated as raw complex vectors.
// ---------------------------------------------------------------------------

struct NaiveRrcModel {
    std::vector<int> class_labels;              // ascending
    std::vector<ComplexMatrix> per_class_data;  // k x n_i, preshapes stacked column-wise
    double lambda;
};

// Stacks per-class preshapes column-wise. No solving happens at fit time;
// the regularized solves are per-query. Throws EmptyClass / InvalidInput.
NaiveRrcModel rrc_fit(const LabeledPreshapes& train, double lambda);

// Ridge projection of u onto the span of the columns of `data`:
// data (data* data + lambda I)^{-1} data* u. This is the route the classifier
// scores with; exposed so it can be checked against the push-through identity.
ComplexVector rrc_project(const ComplexMatrix& data, double lambda, const ComplexVector& u);

// argmin_i || proj_i(u) - u ||^2 over classes.
Prediction rrc_predict(const NaiveRrcModel& model, const Preshape& u);

// ---------------------------------------------------------------------------
// Kernel ridge-regression classifier.
// ---------------------------------------------------------------------------

// One class's cached solve: holds K and a factorization of (K + lambda I),
// and evaluates the kernel-trick objective
//   k^T (K + lambda I)^{-1} (-K - 2 lambda I) (K + lambda I)^{-1} k
// for a query's kernel vector k. The objective omits the constant ||Phi(u)||^2
// term, so values may be negative; only the argmin across classes matters.
class KrrcClassScorer {
public:
    // Factorizes (gram + lambda I). When the matrix is not positive definite
    // (possible for non-PSD kernels with small lambda) either falls back to a
    // symmetric indefinite solve (allow_indefinite) or throws
    // FactorizationFailure naming the class and the Gram's min eigenvalue.
    KrrcClassScorer(Eigen::MatrixXd gram_values, double lambda, bool allow_indefinite,
                    int class_label);

    double score(const Eigen::VectorXd& kernel_vec) const;

    bool used_indefinite_solve() const { return indefinite_; }
    const Eigen::MatrixXd& gram_values() const { return gram_; }

private:
    Eigen::MatrixXd gram_;
    double lambda_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    bool indefinite_ = false;
};

struct KrrcModel {
    std::vector<int> class_labels;                    // ascending
    std::vector<std::vector<Preshape>> class_shapes;  // training preshapes per class
    KernelSpec kernel;
    double lambda;
    std::vector<KrrcClassScorer> scorers;
    bool used_indefinite_solve = false;  // true if any class needed the fallback
};

// Builds and factorizes the per-class Gram systems; the model is immutable
// thereafter. Throws EmptyClass, InvalidInput, FactorizationFailure.
KrrcModel krrc_fit(const LabeledPreshapes& train, const KernelSpec& kernel, double lambda,
                   bool allow_indefinite = false);

// argmin_i of the kernel-trick objective. `add_unit_norm` shifts every score
// by kappa(u,u) = 1, turning it into the true squared feature-space residual;
// the argmin is unaffected.
Prediction krrc_predict(const KrrcModel& model, const Preshape& u, bool add_unit_norm = false);

// ---------------------------------------------------------------------------
// Extrinsic (embedding) mean.
// ---------------------------------------------------------------------------

// Top unit eigenvector of (1/n) sum_i u_i u_i*, phase-normalized so the
// largest-modulus entry is real positive. n = 1 returns the input unchanged.
// Throws EmptyInput; NonUniqueMean if the top two eigenvalues are within 1e-10.
Preshape extrinsic_mean(const std::vector<Preshape>& shapes);

// ---------------------------------------------------------------------------
// Serialization: versioned JSON, complex numbers as [re, im] pairs.
// Factorizations are recomputed on load.
// ---------------------------------------------------------------------------

std::string krrc_model_to_json(const KrrcModel& model);
KrrcModel krrc_model_from_json(const std::string& text);

std::string rrc_model_to_json(const NaiveRrcModel& model);
NaiveRrcModel rrc_model_from_json(const std::string& text);

}  // namespace shapekrrc
