#include "wildlabel/learner.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <span>

namespace wildlabel {

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 0) throw ConfigError("batch size must be >= 0");
  if (hidden_width < 0) throw ConfigError("hidden width must be >= 0");
}

JointParams<double> initial_params(int num_classes, int dim, const TrainConfig& cfg) {
  JointParams<double> p{ClassifierParams<double>::zeros(num_classes, dim),
                        DetectorParams<double>::zeros(cfg.hidden_width, dim)};
  if (cfg.hidden_width > 0) {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    auto fill = [&](auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    };
    fill(p.detector.hidden_weights);
    fill(p.detector.hidden_biases);
    fill(p.detector.output_weights);
    p.detector.output_bias = u(rng);
  }
  return p;
}

namespace {

MatrixX<double> gather_rows(const MatrixX<double>& x, std::span<const Eigen::Index> rows) {
  MatrixX<double> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

// Splits [0, n) into `parts` shuffled, near-equal chunks.
std::vector<std::vector<Eigen::Index>> chunks(Eigen::Index n, std::size_t parts, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<Eigen::Index>> out(parts);
  for (std::size_t i = 0; i < idx.size(); ++i) out[i % parts].push_back(idx[i]);
  return out;
}

}  // namespace

TrainResult train_joint(const JointData<double>& data, int num_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (data.class_x.rows() == 0) throw InputError("train_joint: classifier training set is empty");
  if (static_cast<std::size_t>(data.class_x.rows()) != data.class_y.size())
    throw InputError("train_joint: feature/label count mismatch");
  for (int y : data.class_y)
    if (y < 1 || y > num_classes) throw InputError("train_joint: class label out of range");
  const auto dim = static_cast<int>(data.class_x.cols());

  TrainResult out;
  out.params = initial_params(num_classes, dim, cfg);
  if (data.detector_ood.rows() == 0)
    out.warnings.emplace_back("no human-labeled semantic OOD examples; detector term skipped");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n_batches =
      cfg.batch_size == 0 ? 1
                          : static_cast<std::size_t>(std::max<Eigen::Index>(
                                1, (data.class_x.rows() + cfg.batch_size - 1) / cfg.batch_size));

  JointParams<double> grad;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate;
    if (cfg.cosine_decay) lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * (epoch - 1) / cfg.epochs));

    if (n_batches == 1) {
      joint_loss(out.params, data, cfg.alpha, &grad);
      out.params.unflatten(out.params.flatten() - lr * grad.flatten());
    } else {
      // Smaller sets cycle through fewer chunks so every batch sees each term.
      auto split = [&](Eigen::Index n) {
        return chunks(n, std::min<std::size_t>(n_batches, static_cast<std::size_t>(std::max<Eigen::Index>(n, 1))), rng);
      };
      const auto cls = split(data.class_x.rows());
      const auto det_id = split(data.detector_id.rows());
      const auto det_ood = split(data.detector_ood.rows());
      for (std::size_t b = 0; b < n_batches; ++b) {
        const auto& c = cls[b % cls.size()];
        JointData<double> batch;
        batch.class_x = gather_rows(data.class_x, c);
        batch.class_y.reserve(c.size());
        for (auto i : c) batch.class_y.push_back(data.class_y[static_cast<std::size_t>(i)]);
        batch.detector_id = gather_rows(data.detector_id, det_id[b % det_id.size()]);
        batch.detector_ood = gather_rows(data.detector_ood, det_ood[b % det_ood.size()]);
        if (batch.class_x.rows() == 0) continue;
        joint_loss(out.params, batch, cfg.alpha, &grad);
        out.params.unflatten(out.params.flatten() - lr * grad.flatten());
      }
    }

    const auto loss = joint_loss(out.params, data, cfg.alpha);
    if (!std::isfinite(loss.total))
      throw TrainingError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    out.trace.push_back({epoch, loss.ce, loss.detector, loss.total});
  }
  return out;
}

ClassifierParams<double> train_classifier(const LabeledFeatures& labeled, int num_classes, const TrainConfig& cfg) {
  JointData<double> data;
  data.class_x = labeled.x;
  data.class_y = labeled.labels;
  TrainConfig ce_only = cfg;
  ce_only.hidden_width = 0;
  return train_joint(data, num_classes, ce_only).params.classifier;
}

double accuracy(const ClassifierParams<double>& f, const LabeledFeatures& split) {
  if (split.size() == 0) throw InputError("accuracy of an empty split");
  const auto pred = classify_rows(f, split.x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == split.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

MetricsReport evaluate(const ClassifierParams<double>& f, const DetectorParams<double>& g, const TestSplits& splits) {
  MetricsReport r;
  if (splits.id.size() > 0) r.id_acc = accuracy(f, splits.id);
  if (splits.covariate.size() > 0) r.ood_acc = accuracy(f, splits.covariate);
  if (splits.id.size() > 0 && splits.semantic.rows() > 0) {
    const Eigen::VectorXd id_scores = g.ood_scores(splits.id.x);
    const Eigen::VectorXd sem_scores = g.ood_scores(splits.semantic);
    const std::span<const double> ids(id_scores.data(), static_cast<std::size_t>(id_scores.size()));
    const std::span<const double> sems(sem_scores.data(), static_cast<std::size_t>(sem_scores.size()));
    const auto fpr = fpr_at_tpr(ids, sems, 0.95);
    r.fpr95 = fpr.fpr;
    r.threshold = fpr.threshold;
    r.auroc = auroc(ids, sems);
  }
  return r;
}

}  // namespace wildlabel
