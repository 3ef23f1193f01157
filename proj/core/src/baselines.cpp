#include "maxent/baselines.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/QR>

#include "maxent/errors.hpp"

namespace maxent {

Dictionary Dictionary::polynomial(int dim, int degree, bool trig, std::vector<double> frequencies) {
  if (dim < 1) throw ConfigError("dictionary dimension must be >= 1");
  if (degree < 0) throw ConfigError("dictionary degree must be >= 0");
  Dictionary dict;
  dict.dim_ = dim;
  dict.degree_ = degree;
  dict.trig_ = trig;
  dict.frequencies_ = trig ? std::move(frequencies) : std::vector<double>{};

  std::vector<int> powers(static_cast<std::size_t>(dim), 0);
  // Exponent vectors of total degree `total`, x1's power descending.
  std::function<void(std::size_t, int)> emit = [&](std::size_t axis, int left) {
    if (axis + 1 == powers.size()) {
      powers[axis] = left;
      dict.features_.push_back({Feature::Kind::Monomial, powers, 0, 1.0});
      return;
    }
    for (int p = left; p >= 0; --p) {
      powers[axis] = p;
      emit(axis + 1, left - p);
    }
  };
  for (int total = 0; total <= degree; ++total) emit(0, total);

  for (int c = 0; c < dim && trig; ++c) {
    for (double w : dict.frequencies_) {
      dict.features_.push_back({Feature::Kind::Sin, {}, c, w});
      dict.features_.push_back({Feature::Kind::Cos, {}, c, w});
    }
  }
  return dict;
}

Eigen::VectorXd Dictionary::evaluate(const Point& x) const {
  if (x.size() != dim_) throw DimensionError("point dimension does not match dictionary");
  Eigen::VectorXd out(size());
  for (std::size_t k = 0; k < features_.size(); ++k) {
    const Feature& f = features_[k];
    double v = 1.0;
    switch (f.kind) {
      case Feature::Kind::Monomial:
        for (int c = 0; c < dim_; ++c) {
          for (int p = 0; p < f.powers[static_cast<std::size_t>(c)]; ++p) v *= x(c);
        }
        break;
      case Feature::Kind::Sin: v = std::sin(f.frequency * x(f.coordinate)); break;
      case Feature::Kind::Cos: v = std::cos(f.frequency * x(f.coordinate)); break;
    }
    out(static_cast<Eigen::Index>(k)) = v;
  }
  return out;
}

Eigen::MatrixXd Dictionary::design(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd m(points.cols(), size());
  for (Eigen::Index i = 0; i < points.cols(); ++i) m.row(i) = evaluate(points.col(i)).transpose();
  return m;
}

std::vector<std::string> Dictionary::names() const {
  std::vector<std::string> out;
  for (const Feature& f : features_) {
    std::ostringstream s;
    if (f.kind == Feature::Kind::Monomial) {
      bool any = false;
      for (int c = 0; c < dim_; ++c) {
        const int p = f.powers[static_cast<std::size_t>(c)];
        if (p == 0) continue;
        if (any) s << '*';
        s << 'x' << (c + 1);
        if (p > 1) s << '^' << p;
        any = true;
      }
      if (!any) s << '1';
    } else {
      s << (f.kind == Feature::Kind::Sin ? "sin(" : "cos(") << f.frequency << "*x"
        << (f.coordinate + 1) << ')';
    }
    out.push_back(s.str());
  }
  return out;
}

namespace {

Eigen::VectorXd solve_subset(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                             const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = design.col(keep[k]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
  const Eigen::VectorXd c = cod.solve(y);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(design.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) full(keep[k]) = c(static_cast<Eigen::Index>(k));
  return full;
}

}  // namespace

DictionaryModel dict_fit(const Dictionary& dictionary, const Dataset& data, double threshold,
                         int n_sweeps) {
  data.validate();
  if (n_sweeps < 1) throw ConfigError("n_sweeps must be >= 1");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  if (data.size() == 0) throw DomainError("cannot fit a dictionary to an empty dataset");
  if (data.dim() != dictionary.dim()) throw DimensionError("data and dictionary dimensions differ");

  const Eigen::MatrixXd design = dictionary.design(data.points);
  DictionaryModel model;
  model.dictionary = dictionary;
  model.threshold = threshold;
  model.coefficients = Eigen::MatrixXd::Zero(dictionary.size(), data.outputs());
  model.emptied.assign(static_cast<std::size_t>(data.outputs()), false);

  for (Eigen::Index j = 0; j < data.outputs(); ++j) {
    const Eigen::VectorXd y = data.values.col(j);
    std::vector<Eigen::Index> keep(static_cast<std::size_t>(dictionary.size()));
    for (Eigen::Index k = 0; k < dictionary.size(); ++k) keep[static_cast<std::size_t>(k)] = k;
    Eigen::VectorXd c = solve_subset(design, y, keep);

    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
      std::vector<Eigen::Index> survivors;
      for (Eigen::Index k : keep) {
        if (std::abs(c(k)) >= threshold) survivors.push_back(k);
      }
      if (survivors.empty()) {
        c.setZero();
        model.emptied[static_cast<std::size_t>(j)] = true;
        break;
      }
      if (survivors == keep) break;
      keep = std::move(survivors);
      c = solve_subset(design, y, keep);
      model.sweeps_used = std::max(model.sweeps_used, sweep + 1);
    }
    model.coefficients.col(j) = c;
  }
  return model;
}

Eigen::VectorXd dict_predict(const DictionaryModel& model, const Point& x) {
  return model.coefficients.transpose() * model.dictionary.evaluate(x);
}

Eigen::MatrixXd dict_predict_many(const DictionaryModel& model, const Eigen::MatrixXd& points) {
  return model.dictionary.design(points) * model.coefficients;
}

}  // namespace maxent
