// Copyright (c) 2026 OrthoSpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "orthospot/autodiff/tensor.h"

#include <algorithm>
#include <sstream>

#include "orthospot/base/error.h"

namespace orthospot {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  std::size_t n = NumElements(shape);
  return FromData(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::FromData(Shape shape, std::vector<double> values,
                        bool requires_grad) {
  if (values.size() != NumElements(shape)) {
    throw ShapeError("tensor data has " + std::to_string(values.size()) +
                     " values but shape " + ShapeString(shape) + " needs " +
                     std::to_string(NumElements(shape)));
  }
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->values = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromData({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeString(impl_->shape));
  }
  return impl_->shape[axis];
}

std::size_t Tensor::size() const { return impl_->values.size(); }

std::span<double> Tensor::data() { return impl_->values; }
std::span<const double> Tensor::data() const { return impl_->values; }

double Tensor::item() const {
  if (impl_->values.size() != 1) {
    throw ShapeError("item() on tensor of shape " + ShapeString(shape()));
  }
  return impl_->values[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { impl_->requires_grad = flag; }

std::span<double> Tensor::grad() {
  if (impl_->grad.size() != impl_->values.size()) {
    impl_->grad.assign(impl_->values.size(), 0.0);
  }
  return impl_->grad;
}

std::span<const double> Tensor::grad() const {
  return const_cast<Tensor*>(this)->grad();
}

bool Tensor::has_grad() const {
  return impl_->grad.size() == impl_->values.size();
}

void Tensor::ZeroGrad() {
  impl_->grad.assign(impl_->values.size(), 0.0);
  impl_->grad_touched = false;
}

bool Tensor::grad_touched() const { return impl_->grad_touched; }
void Tensor::mark_grad_touched() { impl_->grad_touched = true; }

Tensor Tensor::Clone() const {
  return FromData(impl_->shape, impl_->values, false);
}

void Tape::Record(std::function<void()> backward) {
  if (recording_) nodes_.push_back(std::move(backward));
}

void Tape::Backward(Tensor loss) {
  if (!recording_) throw NumericError("Backward on a non-recording tape");
  if (consumed_) throw NumericError("Backward called twice on one tape");
  if (loss.size() != 1) {
    throw ShapeError("Backward needs a scalar loss, got shape " +
                     ShapeString(loss.shape()));
  }
  consumed_ = true;
  loss.grad()[0] += 1.0;
  loss.mark_grad_touched();
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  nodes_.clear();
}

}  // namespace orthospot
