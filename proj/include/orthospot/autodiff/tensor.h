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

#ifndef ORTHOSPOT_AUTODIFF_TENSOR_H_
#define ORTHOSPOT_AUTODIFF_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace orthospot {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major array of doubles with an optional gradient buffer. Tensor is
// a shared handle: copies alias the same storage, which is what lets the tape
// accumulate gradients into parameters owned elsewhere.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<double> values,
                         bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  // Lazily allocates a zero gradient buffer.
  std::span<double> grad();
  std::span<const double> grad() const;
  bool has_grad() const;
  void ZeroGrad();

  // Set whenever backward accumulates into this tensor; cleared by ZeroGrad.
  bool grad_touched() const;
  void mark_grad_touched();

  // Deep copy of values; the copy does not require grad.
  Tensor Clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    bool grad_touched = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Ordered record of differentiable operations. Ops append a backward closure
// after computing their output; Backward replays the closures once, in
// reverse order. A non-recording tape runs forward only.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  void Record(std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws on a non-scalar loss or
  // on a tape that was already replayed.
  void Backward(Tensor loss);

 private:
  bool recording_;
  bool consumed_ = false;
  std::vector<std::function<void()>> nodes_;
};

}  // namespace orthospot

#endif  // ORTHOSPOT_AUTODIFF_TENSOR_H_
