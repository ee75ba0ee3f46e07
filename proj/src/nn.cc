//
// Copyright 2026 The dstlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dstlab/nn.h"

#include <cmath>

namespace dstlab {
namespace {

constexpr double kGeluK = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluC = 0.044715;

}  // namespace

Matrix RandomNormal(Eigen::Index rows, Eigen::Index cols, double stddev,
                    Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = Normal(rng, 0.0, stddev);
  }
  return m;
}

Matrix Linear(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

Matrix LinearBackward(const Matrix& dy, const Matrix& x, const Matrix& w,
                      Matrix& dw, Matrix& db) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  return dy * w.transpose();
}

Matrix LayerNorm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                 LayerNormCache* cache) {
  const Eigen::Index n = x.cols();
  Matrix normalized(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(n);
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    normalized.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Matrix y = normalized.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNormBackward(const Matrix& dy, const Matrix& gain,
                         const LayerNormCache& cache, Matrix& dgain,
                         Matrix& dbias) {
  const Matrix& xhat = cache.normalized;
  const auto n = static_cast<double>(dy.cols());
  dgain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double sum = dxhat.row(r).sum();
    const double dot = dxhat.row(r).dot(xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / n) *
                (n * dxhat.row(r).array() - sum - xhat.row(r).array() * dot);
  }
  return dx;
}

Matrix Gelu(const Matrix& x) {
  return x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluK * (v + kGeluC * v * v * v)));
  });
}

Matrix GeluDerivative(const Matrix& x) {
  return x.unaryExpr([](double v) {
    const double t = std::tanh(kGeluK * (v + kGeluC * v * v * v));
    return 0.5 * (1.0 + t) +
           0.5 * v * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * kGeluC * v * v);
  });
}

void SoftmaxRowsInPlace(Matrix& x) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    x.row(r) = (x.row(r).array() - m).exp();
    x.row(r) /= x.row(r).sum();
  }
}

RowVector Softmax(const RowVector& logits) {
  const double m = logits.maxCoeff();
  RowVector p = (logits.array() - m).exp();
  return p / p.sum();
}

Matrix SoftmaxRowsBackward(const Matrix& p, const Matrix& dp) {
  Matrix ds = p.array() * dp.array();
  const Eigen::VectorXd row_dot = ds.rowwise().sum();
  ds.array() -= p.array().colwise() * row_dot.array();
  return ds;
}

double CrossEntropy(const RowVector& logits, Eigen::Index target, double scale,
                    RowVector* dlogits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  if (dlogits != nullptr) {
    *dlogits = (logits.array() - lse).exp();
    (*dlogits)(target) -= 1.0;
    *dlogits *= scale;
  }
  return lse - logits(target);
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double BinaryCrossEntropy(double logit, double target, double scale,
                          double* dlogit) {
  // log(1 + e^x) - t x, computed stably.
  const double softplus =
      logit > 0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
  if (dlogit != nullptr) *dlogit = scale * (Sigmoid(logit) - target);
  return softplus - target * logit;
}

Eigen::Index ArgmaxLowestIndex(const RowVector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace dstlab
