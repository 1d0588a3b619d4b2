#include "shapekrrc/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace shapekrrc {

namespace {

// Groups training shapes by label, labels ascending. Throws on empty input
// and on ragged landmark counts.
std::map<int, std::vector<Preshape>> group_by_class(const LabeledPreshapes& train) {
    if (train.shapes.empty()) throw EmptyClass("training set is empty");
    if (train.labels.size() != train.shapes.size()) {
        throw InvalidInput("labels and shapes must have equal length");
    }
    const int k = train.shapes.front().landmark_count();
    std::map<int, std::vector<Preshape>> classes;
    for (std::size_t i = 0; i < train.shapes.size(); ++i) {
        if (train.shapes[i].landmark_count() != k) {
            throw InvalidInput("all training shapes must share the landmark count");
        }
        classes                     // map keeps labels sorted ascending
            .try_emplace(train.labels[i])
            .first->second.push_back(train.shapes[i]);
    }
    return classes;
}

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidInput("ridge parameter lambda must be positive and finite");
    }
}

int argmin_score(const std::vector<double>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
        if (scores[i] < scores[best]) best = i;  // strict: ties keep the lowest index
    }
    return best;
}

}  // namespace

// --------------------------------------------------------------------------
// Naive RRC
// --------------------------------------------------------------------------

NaiveRrcModel rrc_fit(const LabeledPreshapes& train, double lambda) {
    require_positive_lambda(lambda);
    const auto classes = group_by_class(train);

    NaiveRrcModel model;
    model.lambda = lambda;
    for (const auto& [label, shapes] : classes) {
        const int k = shapes.front().landmark_count();
        ComplexMatrix data(k, shapes.size());
        for (std::size_t j = 0; j < shapes.size(); ++j) data.col(j) = shapes[j].coords();
        model.class_labels.push_back(label);
        model.per_class_data.push_back(std::move(data));
    }
    return model;
}

ComplexVector rrc_project(const ComplexMatrix& data, double lambda, const ComplexVector& u) {
    ComplexMatrix normal = data.adjoint() * data;
    normal.diagonal().array() += Complex(lambda, 0.0);
    // Hermitian positive definite for lambda > 0; solved fresh per query.
    const ComplexVector beta = normal.llt().solve(data.adjoint() * u);
    return data * beta;
}

Prediction rrc_predict(const NaiveRrcModel& model, const Preshape& u) {
    if (model.class_labels.empty()) throw InvalidInput("model has no classes");
    std::vector<double> scores;
    scores.reserve(model.per_class_data.size());
    for (const ComplexMatrix& data : model.per_class_data) {
        scores.push_back((rrc_project(data, model.lambda, u.coords()) - u.coords()).squaredNorm());
    }
    const int best = argmin_score(scores);
    return Prediction{model.class_labels[best], std::move(scores)};
}

// --------------------------------------------------------------------------
// KRRC
// --------------------------------------------------------------------------

KrrcClassScorer::KrrcClassScorer(Eigen::MatrixXd gram_values, double lambda,
                                 bool allow_indefinite, int class_label)
    : gram_(std::move(gram_values)), lambda_(lambda) {
    require_positive_lambda(lambda);
    Eigen::MatrixXd system = gram_;
    system.diagonal().array() += lambda_;

    llt_.compute(system);
    if (llt_.info() == Eigen::Success) return;

    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram_, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    if (!allow_indefinite) {
        throw FactorizationFailure(
            "class " + std::to_string(class_label) +
                ": (K + lambda I) is not positive definite (Gram min eigenvalue " +
                std::to_string(min_eig) + ", lambda " + std::to_string(lambda_) + ")",
            class_label, min_eig);
    }
    ldlt_.compute(system);
    indefinite_ = true;
}

double KrrcClassScorer::score(const Eigen::VectorXd& kernel_vec) const {
    const Eigen::VectorXd a =
        indefinite_ ? ldlt_.solve(kernel_vec).eval() : llt_.solve(kernel_vec).eval();
    // a^T (-K - 2 lambda I) a
    return -a.dot(gram_ * a) - 2.0 * lambda_ * a.squaredNorm();
}

KrrcModel krrc_fit(const LabeledPreshapes& train, const KernelSpec& kernel, double lambda,
                   bool allow_indefinite) {
    require_positive_lambda(lambda);
    const auto classes = group_by_class(train);

    KrrcModel model{{}, {}, kernel, lambda, {}, false};
    for (const auto& [label, shapes] : classes) {
        const GramMatrix g = gram(kernel, shapes);
        model.scorers.emplace_back(g.values, lambda, allow_indefinite, label);
        model.used_indefinite_solve |= model.scorers.back().used_indefinite_solve();
        model.class_labels.push_back(label);
        model.class_shapes.push_back(shapes);
    }
    return model;
}

Prediction krrc_predict(const KrrcModel& model, const Preshape& u, bool add_unit_norm) {
    if (model.class_labels.empty()) throw InvalidInput("model has no classes");
    std::vector<double> scores;
    scores.reserve(model.class_labels.size());
    for (std::size_t c = 0; c < model.class_labels.size(); ++c) {
        const auto& shapes = model.class_shapes[c];
        Eigen::VectorXd kvec(shapes.size());
        for (std::size_t j = 0; j < shapes.size(); ++j) {
            kvec[j] = kernel_eval(model.kernel, shapes[j], u);
        }
        double s = model.scorers[c].score(kvec);
        if (add_unit_norm) s += 1.0;  // kappa(u,u) = 1 for every family
        scores.push_back(s);
    }
    const int best = argmin_score(scores);
    return Prediction{model.class_labels[best], std::move(scores)};
}

// --------------------------------------------------------------------------
// Extrinsic mean
// --------------------------------------------------------------------------

Preshape extrinsic_mean(const std::vector<Preshape>& shapes) {
    if (shapes.empty()) throw EmptyInput("extrinsic_mean of an empty sequence");
    // n = 1: the mean is the shape itself; returning the input verbatim keeps
    // the round trip exact instead of within eigensolver tolerance.
    if (shapes.size() == 1) return shapes.front();

    const int k = shapes.front().landmark_count();
    ComplexMatrix m = ComplexMatrix::Zero(k, k);
    for (const Preshape& u : shapes) {
        if (u.landmark_count() != k) {
            throw InvalidInput("all shapes must share the landmark count");
        }
        m.noalias() += u.coords() * u.coords().adjoint();
    }
    m /= static_cast<double>(shapes.size());

    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    const auto& eigenvalues = solver.eigenvalues();  // ascending
    const double top = eigenvalues[k - 1];
    const double second = eigenvalues[k - 2];
    if (top - second < 1e-10) {
        throw NonUniqueMean("extrinsic mean is not well defined: top eigenvalue gap " +
                            std::to_string(top - second));
    }

    ComplexVector v = solver.eigenvectors().col(k - 1);
    // The eigenvector is centered only up to solver tolerance; re-center and
    // renormalize before fixing the phase.
    v.array() -= v.mean();
    v /= v.norm();

    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    const Complex p = v[pivot];
    v *= std::conj(p) / std::abs(p);  // largest-modulus entry becomes real positive
    return Preshape(std::move(v));
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

namespace {

using nlohmann::json;

json preshape_to_json(const Preshape& u) {
    json coords = json::array();
    for (Eigen::Index i = 0; i < u.coords().size(); ++i) {
        coords.push_back({u.coords()[i].real(), u.coords()[i].imag()});
    }
    return coords;
}

Preshape preshape_from_json(const json& coords) {
    ComplexVector v(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] =
            Complex(coords[i].at(0).get<double>(), coords[i].at(1).get<double>());
    }
    return Preshape(std::move(v));
}

json classes_to_json(const std::vector<int>& labels,
                     const std::vector<std::vector<Preshape>>& class_shapes) {
    json classes = json::array();
    for (std::size_t c = 0; c < labels.size(); ++c) {
        json shapes = json::array();
        for (const Preshape& u : class_shapes[c]) shapes.push_back(preshape_to_json(u));
        classes.push_back({{"label", labels[c]}, {"shapes", std::move(shapes)}});
    }
    return classes;
}

LabeledPreshapes classes_from_json(const json& classes) {
    LabeledPreshapes out;
    for (const auto& cls : classes) {
        const int label = cls.at("label").get<int>();
        for (const auto& coords : cls.at("shapes")) {
            out.shapes.push_back(preshape_from_json(coords));
            out.labels.push_back(label);
        }
    }
    return out;
}

json parse_model_document(const std::string& text, const std::string& expected_type) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model document is not valid JSON: ") + e.what(), 0);
    }
    if (doc.value("format", "") != "shapekrrc-model") {
        throw InvalidInput("not a shapekrrc model document");
    }
    if (doc.value("version", 0) != 1) {
        throw InvalidInput("unsupported model document version");
    }
    if (doc.value("type", "") != expected_type) {
        throw InvalidInput("model document type is '" + doc.value("type", "") + "', expected '" +
                           expected_type + "'");
    }
    return doc;
}

}  // namespace

std::string krrc_model_to_json(const KrrcModel& model) {
    json doc{{"format", "shapekrrc-model"},
             {"version", 1},
             {"type", "krrc"},
             {"lambda", model.lambda},
             {"kernel",
              {{"family", kernel_family_name(model.kernel.family)},
               {"sigma_sq", model.kernel.bandwidth_sq}}},
             {"allow_indefinite", model.used_indefinite_solve},
             {"classes", classes_to_json(model.class_labels, model.class_shapes)}};
    return doc.dump();
}

KrrcModel krrc_model_from_json(const std::string& text) {
    const json doc = parse_model_document(text, "krrc");
    const KernelSpec kernel(kernel_family_from_name(doc.at("kernel").at("family").get<std::string>()),
                            doc.at("kernel").at("sigma_sq").get<double>());
    return krrc_fit(classes_from_json(doc.at("classes")), kernel, doc.at("lambda").get<double>(),
                    doc.value("allow_indefinite", false));
}

std::string rrc_model_to_json(const NaiveRrcModel& model) {
    std::vector<std::vector<Preshape>> class_shapes;
    for (const ComplexMatrix& data : model.per_class_data) {
        std::vector<Preshape> shapes;
        for (Eigen::Index j = 0; j < data.cols(); ++j) shapes.emplace_back(data.col(j));
        class_shapes.push_back(std::move(shapes));
    }
    json doc{{"format", "shapekrrc-model"},
             {"version", 1},
             {"type", "naive-rrc"},
             {"lambda", model.lambda},
             {"classes", classes_to_json(model.class_labels, class_shapes)}};
    return doc.dump();
}

NaiveRrcModel rrc_model_from_json(const std::string& text) {
    const json doc = parse_model_document(text, "naive-rrc");
    return rrc_fit(classes_from_json(doc.at("classes")), doc.at("lambda").get<double>());
}

}  // namespace shapekrrc
