// Core value types shared by every wildlabel module.
#ifndef WILDLABEL_CORE_HPP
#define WILDLABEL_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wildlabel {

// Error taxonomy. The CLI maps ConfigError to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct InputError : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};
struct TrainingError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

enum class Membership : std::uint8_t { Id = 0, Covariate = 1, Semantic = 2 };

std::string_view to_string(Membership m);

/// A label as returned by the human oracle: a class in [1..K] or the OOD
/// symbol. Class 0 is reserved for OOD so a label fits in one int.
class HumanLabel {
 public:
  constexpr HumanLabel() = default;

  static constexpr HumanLabel ood() { return HumanLabel{kOodValue}; }
  static HumanLabel of_class(int cls) {
    if (cls < 1) throw InputError("class label must be >= 1, got " + std::to_string(cls));
    return HumanLabel{cls};
  }

  constexpr bool is_ood() const { return value_ == kOodValue; }
  /// Class index in [1..K]; meaningless for OOD labels.
  constexpr int cls() const { return value_; }
  constexpr int raw() const { return value_; }

  friend constexpr bool operator==(HumanLabel, HumanLabel) = default;

 private:
  static constexpr int kOodValue = 0;
  constexpr explicit HumanLabel(int v) : value_(v) {}
  int value_ = kOodValue;
};

std::string to_string(HumanLabel label);

using ExampleId = std::int64_t;

/// One wild-pool item. Feature vectors live in WildPool::features (row = id)
/// so the pool stays a single dense matrix.
struct WildExample {
  ExampleId id = 0;
  double score = 0.0;  // larger = more semantically OOD
  Membership membership = Membership::Id;  // hidden
  HumanLabel label;                        // hidden
};

enum class PoolMode : std::uint8_t { Score, Feature };

struct WildPool {
  PoolMode mode = PoolMode::Score;
  std::uint64_t seed = 0;
  int num_classes = 0;
  std::vector<WildExample> examples;
  // N x d in feature mode, N x 0 in score mode.
  Eigen::MatrixXd features;
  // False in feature mode until a scoring function has run.
  bool scored = false;
  // Generation-time diagnostics (e.g. membership fractions far from the spec).
  std::vector<std::string> warnings;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  auto feature_row(ExampleId id) const { return features.row(static_cast<Eigen::Index>(id)); }
};

struct Composition {
  int n_id = 0;
  int n_covariate = 0;
  int n_semantic = 0;

  int total() const { return n_id + n_covariate + n_semantic; }
  void add(Membership m);
  friend bool operator==(const Composition&, const Composition&) = default;
};

}  // namespace wildlabel

#endif  // WILDLABEL_CORE_HPP
