// Multinomial logistic classifier plus a small level-set OOD detector,
// trained jointly: cross-entropy on ID and human-labeled covariate data,
// plus alpha times a sigmoid surrogate of the 0/1 level-set risk that
// separates S_in from human-labeled semantic OOD.
#ifndef WILDLABEL_LEARNER_HPP
#define WILDLABEL_LEARNER_HPP

#include "wildlabel/core.hpp"
#include "wildlabel/metrics.hpp"
#include "wildlabel/wildgen.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

namespace wildlabel {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct ClassifierParams {
  MatrixX<Scalar> weights;  // K x d
  VectorX<Scalar> biases;   // K

  static ClassifierParams zeros(int num_classes, int dim) {
    return {MatrixX<Scalar>::Zero(num_classes, dim), VectorX<Scalar>::Zero(num_classes)};
  }

  Eigen::Index num_classes() const { return weights.rows(); }
  Eigen::Index dim() const { return weights.cols(); }

  /// n x K logits for the rows of `x`.
  template <typename Derived>
  MatrixX<Scalar> logits(const Eigen::MatrixBase<Derived>& x) const {
    return (x * weights.transpose()).rowwise() + biases.transpose();
  }
};

/// Predicted class in [1..K] for one feature vector; ties go to the smallest index.
template <typename Scalar, typename Derived>
int classify(const ClassifierParams<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != f.dim()) throw InputError("classify: feature dimension mismatch");
  if (!x.allFinite()) throw InputError("classify: features must be finite");
  const VectorX<Scalar> z = f.weights * x.derived().template cast<Scalar>() + f.biases;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < z.size(); ++i)
    if (z(i) > z(best)) best = i;
  return static_cast<int>(best) + 1;
}

/// Row-wise classify.
template <typename Scalar, typename Derived>
std::vector<int> classify_rows(const ClassifierParams<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = classify(f, x.row(i).transpose());
  return out;
}

/// g(x) = w2 . tanh(W1 x + b1) + b2, or w2 . x + b2 when H = 0.
/// Positive output means "in-distribution".
template <typename Scalar>
struct DetectorParams {
  MatrixX<Scalar> hidden_weights;  // H x d
  VectorX<Scalar> hidden_biases;   // H
  VectorX<Scalar> output_weights;  // H, or d when H = 0
  Scalar output_bias = 0;

  Eigen::Index hidden_width() const { return hidden_weights.rows(); }

  static DetectorParams zeros(int hidden, int dim) {
    DetectorParams p;
    p.hidden_weights = MatrixX<Scalar>::Zero(hidden, dim);
    p.hidden_biases = VectorX<Scalar>::Zero(hidden);
    p.output_weights = VectorX<Scalar>::Zero(hidden > 0 ? hidden : dim);
    return p;
  }

  template <typename Derived>
  VectorX<Scalar> id_output(const Eigen::MatrixBase<Derived>& x) const {
    if (hidden_width() == 0) return (x * output_weights).array() + output_bias;
    const MatrixX<Scalar> act = ((x * hidden_weights.transpose()).rowwise() + hidden_biases.transpose()).array().tanh();
    return (act * output_weights).array() + output_bias;
  }

  /// OOD-oriented detector score (-g), the orientation used for evaluation.
  template <typename Derived>
  VectorX<Scalar> ood_scores(const Eigen::MatrixBase<Derived>& x) const {
    return -id_output(x);
  }
};

template <typename Scalar>
struct JointParams {
  ClassifierParams<Scalar> classifier;
  DetectorParams<Scalar> detector;

  Eigen::Index size() const {
    return classifier.weights.size() + classifier.biases.size() + detector.hidden_weights.size() +
           detector.hidden_biases.size() + detector.output_weights.size() + 1;
  }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> v(size());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
      v.segment(at, m.size()) = Eigen::Map<const VectorX<Scalar>>(m.data(), m.size());
      at += m.size();
    };
    put(classifier.weights);
    put(classifier.biases);
    put(detector.hidden_weights);
    put(detector.hidden_biases);
    put(detector.output_weights);
    v(at) = detector.output_bias;
    return v;
  }

  void unflatten(const VectorX<Scalar>& v) {
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
      Eigen::Map<VectorX<Scalar>>(m.data(), m.size()) = v.segment(at, m.size());
      at += m.size();
    };
    take(classifier.weights);
    take(classifier.biases);
    take(detector.hidden_weights);
    take(detector.hidden_biases);
    take(detector.output_weights);
    detector.output_bias = v(at);
  }

  JointParams zeros_like() const {
    JointParams z = *this;
    z.unflatten(VectorX<Scalar>::Zero(size()));
    return z;
  }
};

/// Training sets for the joint objective.
template <typename Scalar>
struct JointData {
  MatrixX<Scalar> class_x;       // S_in and human-labeled non-OOD examples
  std::vector<int> class_y;      // labels in [1..K]
  MatrixX<Scalar> detector_id;   // positive (in-distribution) level-set term
  MatrixX<Scalar> detector_ood;  // human-labeled semantic OOD
};

template <typename Scalar>
struct LossParts {
  Scalar ce = 0;
  Scalar detector = 0;  // unweighted level-set risk
  Scalar total = 0;     // ce + alpha * detector
};

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  return Scalar(1) / (Scalar(1) + std::exp(-z));
}

}  // namespace detail

/// Sigmoid-surrogate level-set risk: mean sigma(-g) over ID plus mean sigma(g)
/// over OOD. Empty sides contribute nothing.
template <typename Scalar>
Scalar level_set_surrogate(const VectorX<Scalar>& g_id, const VectorX<Scalar>& g_ood) {
  Scalar r = 0;
  if (g_id.size() > 0) r += (-g_id).unaryExpr([](Scalar z) { return detail::sigmoid(z); }).mean();
  if (g_ood.size() > 0) r += g_ood.unaryExpr([](Scalar z) { return detail::sigmoid(z); }).mean();
  return r;
}

/// The 0/1 risk the surrogate smooths: ID with g <= 0 plus OOD with g > 0.
template <typename Scalar>
Scalar level_set_zero_one(const VectorX<Scalar>& g_id, const VectorX<Scalar>& g_ood) {
  Scalar r = 0;
  if (g_id.size() > 0) r += (g_id.array() <= Scalar(0)).template cast<Scalar>().mean();
  if (g_ood.size() > 0) r += (g_ood.array() > Scalar(0)).template cast<Scalar>().mean();
  return r;
}

/// Joint objective value; fills `grad` (same shapes as params) when non-null.
/// The detector term is skipped entirely when `data.detector_ood` is empty.
template <typename Scalar>
LossParts<Scalar> joint_loss(const JointParams<Scalar>& params, const JointData<Scalar>& data,
                             std::type_identity_t<Scalar> alpha,
                             std::type_identity_t<JointParams<Scalar>>* grad = nullptr) {
  LossParts<Scalar> out;
  if (grad) *grad = params.zeros_like();

  // Cross-entropy over the classifier set.
  const auto n = data.class_x.rows();
  if (n > 0) {
    const MatrixX<Scalar> z = params.classifier.logits(data.class_x);
    MatrixX<Scalar> p(z.rows(), z.cols());
    Scalar ce = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar top = z.row(i).maxCoeff();
      p.row(i) = (z.row(i).array() - top).exp();
      const Scalar sum = p.row(i).sum();
      p.row(i) /= sum;
      const int y = data.class_y[static_cast<std::size_t>(i)] - 1;
      ce += top + std::log(sum) - z(i, y);
    }
    out.ce = ce / Scalar(n);
    if (grad) {
      for (Eigen::Index i = 0; i < n; ++i) p(i, data.class_y[static_cast<std::size_t>(i)] - 1) -= Scalar(1);
      p /= Scalar(n);
      grad->classifier.weights = p.transpose() * data.class_x;
      grad->classifier.biases = p.colwise().sum().transpose();
    }
  }

  if (data.detector_ood.rows() > 0) {
    const auto& det = params.detector;
    const Eigen::Index hidden = det.hidden_width();
    auto forward = [&](const MatrixX<Scalar>& x, MatrixX<Scalar>& act) -> VectorX<Scalar> {
      if (hidden == 0) return (x * det.output_weights).array() + det.output_bias;
      act = ((x * det.hidden_weights.transpose()).rowwise() + det.hidden_biases.transpose()).array().tanh();
      return (act * det.output_weights).array() + det.output_bias;
    };
    MatrixX<Scalar> act_id, act_ood;
    const VectorX<Scalar> g_id = forward(data.detector_id, act_id);
    const VectorX<Scalar> g_ood = forward(data.detector_ood, act_ood);
    out.detector = level_set_surrogate(g_id, g_ood);

    if (grad) {
      auto& gd = grad->detector;
      auto backward = [&](const MatrixX<Scalar>& x, const MatrixX<Scalar>& act, const VectorX<Scalar>& dg) {
        gd.output_bias += dg.sum();
        if (hidden == 0) {
          gd.output_weights += x.transpose() * dg;
          return;
        }
        gd.output_weights += act.transpose() * dg;
        const MatrixX<Scalar> da =
            ((dg * det.output_weights.transpose()).array() * (Scalar(1) - act.array().square())).matrix();
        gd.hidden_weights += da.transpose() * x;
        gd.hidden_biases += da.colwise().sum().transpose();
      };
      // d/dg sigma(-g) = -sigma(g) sigma(-g);  d/dg sigma(g) = sigma(g) sigma(-g)
      auto slope = [](Scalar g) { return detail::sigmoid(g) * detail::sigmoid(-g); };
      if (g_id.size() > 0) {
        const VectorX<Scalar> dg = -alpha / Scalar(g_id.size()) * g_id.unaryExpr(slope);
        backward(data.detector_id, act_id, dg);
      }
      const VectorX<Scalar> dg = alpha / Scalar(g_ood.size()) * g_ood.unaryExpr(slope);
      backward(data.detector_ood, act_ood, dg);
    }
  }

  out.total = out.ce + alpha * out.detector;
  return out;
}

struct TrainConfig {
  double alpha = 10.0;
  double learning_rate = 0.1;
  int epochs = 200;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  int hidden_width = 0;
  bool cosine_decay = false;

  void validate() const;
};

struct LossRecord {
  int epoch = 0;
  double ce = 0.0;
  double detector = 0.0;
  double total = 0.0;
};

struct TrainResult {
  JointParams<double> params;
  std::vector<LossRecord> trace;
  std::vector<std::string> warnings;
};

/// Initial parameters: zeros for H = 0, seeded uniform(-0.1, 0.1) detector
/// weights otherwise.
JointParams<double> initial_params(int num_classes, int dim, const TrainConfig& cfg);

/// Gradient descent on the joint objective. `num_classes` fixes K even when
/// some class is absent from the data.
TrainResult train_joint(const JointData<double>& data, int num_classes, const TrainConfig& cfg);

/// Cross-entropy-only fit of the classifier on S_in (the initial scoring model).
ClassifierParams<double> train_classifier(const LabeledFeatures& labeled, int num_classes, const TrainConfig& cfg);

struct MetricsReport {
  std::optional<double> id_acc;
  std::optional<double> ood_acc;
  std::optional<double> fpr95;
  std::optional<double> auroc;
  std::optional<double> threshold;  // score threshold used for fpr95
};

/// Classifier accuracy on a labeled split.
double accuracy(const ClassifierParams<double>& f, const LabeledFeatures& split);

/// Metrics on held-out splits. Missing (empty) splits leave their metric absent.
MetricsReport evaluate(const ClassifierParams<double>& f, const DetectorParams<double>& g, const TestSplits& splits);

}  // namespace wildlabel

#endif  // WILDLABEL_LEARNER_HPP
