#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "maxent/approximator.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

/// Feature library for sequentially thresholded least squares: monomials up
/// to a total degree, optionally followed by sin/cos of each coordinate at a
/// set of angular frequencies.  The first feature is always the constant 1.
class Dictionary {
 public:
  struct Feature {
    enum class Kind { Monomial, Sin, Cos };
    Kind kind = Kind::Monomial;
    std::vector<int> powers;  // Monomial only
    int coordinate = 0;       // Sin/Cos only
    double frequency = 1.0;   // Sin/Cos only
  };

  Dictionary() = default;

  /// Monomials ordered by total degree, then lexicographically by exponents
  /// (highest power of x1 first); trig features follow per coordinate.
  static Dictionary polynomial(int dim, int degree, bool trig = false,
                               std::vector<double> frequencies = {1.0});

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(features_.size()); }
  const std::vector<Feature>& features() const noexcept { return features_; }
  const std::vector<double>& frequencies() const noexcept { return frequencies_; }
  bool trig() const noexcept { return trig_; }

  Eigen::VectorXd evaluate(const Point& x) const;

  /// n x n_F matrix of features at the columns of `points`.
  Eigen::MatrixXd design(const Eigen::MatrixXd& points) const;

  std::vector<std::string> names() const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  bool trig_ = false;
  std::vector<double> frequencies_;
  std::vector<Feature> features_;
};

struct DictionaryModel {
  Dictionary dictionary;
  Eigen::MatrixXd coefficients;  // n_F x m
  double threshold = 0.0;
  std::vector<bool> emptied;  // per output: every feature was thresholded away
  int sweeps_used = 0;
};

inline constexpr double kDefaultDictThreshold = 0.05;
inline constexpr int kDefaultDictSweeps = 10;

/// Least squares followed by up to `n_sweeps` rounds of zeroing
/// coefficients below `threshold` and refitting the survivors, per output.
DictionaryModel dict_fit(const Dictionary& dictionary, const Dataset& data,
                         double threshold = kDefaultDictThreshold,
                         int n_sweeps = kDefaultDictSweeps);

Eigen::VectorXd dict_predict(const DictionaryModel& model, const Point& x);

/// Predictions at the columns of `points`, n x m.
Eigen::MatrixXd dict_predict_many(const DictionaryModel& model, const Eigen::MatrixXd& points);

}  // namespace maxent
