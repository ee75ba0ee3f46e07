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

#ifndef DSTLAB_NN_H_
#define DSTLAB_NN_H_

#include <Eigen/Dense>

#include "dstlab/rng.h"

namespace dstlab {

// Every parameter and activation is a row-major double matrix; vectors are
// 1 x n rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

Matrix RandomNormal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

// y = x W + b (b broadcast over rows).
Matrix Linear(const Matrix& x, const Matrix& w, const Matrix& b);
// Accumulates dW, db; returns dx.
Matrix LinearBackward(const Matrix& dy, const Matrix& x, const Matrix& w,
                      Matrix& dw, Matrix& db);

struct LayerNormCache {
  Matrix normalized;
  Eigen::VectorXd inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

Matrix LayerNorm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                 LayerNormCache* cache);
Matrix LayerNormBackward(const Matrix& dy, const Matrix& gain,
                         const LayerNormCache& cache, Matrix& dgain,
                         Matrix& dbias);

// tanh approximation of GELU.
Matrix Gelu(const Matrix& x);
Matrix GeluDerivative(const Matrix& x);

void SoftmaxRowsInPlace(Matrix& x);
RowVector Softmax(const RowVector& logits);
// Backward of row-wise softmax given its output p and upstream gradient dp.
Matrix SoftmaxRowsBackward(const Matrix& p, const Matrix& dp);

// -log softmax(logits)[target]; `dlogits` (if non-null) receives
// scale * (softmax - onehot).
double CrossEntropy(const RowVector& logits, Eigen::Index target, double scale,
                    RowVector* dlogits);

// Binary cross-entropy on a logit; returns loss and writes
// scale * (sigmoid - target) to *dlogit.
double BinaryCrossEntropy(double logit, double target, double scale,
                          double* dlogit);

double Sigmoid(double x);

// Lowest index among maximal entries.
Eigen::Index ArgmaxLowestIndex(const RowVector& v);

}  // namespace dstlab

#endif  // DSTLAB_NN_H_
