#pragma once

// Reverse-mode autodiff over dense row-major float64 matrices.
//
// A Tape owns the recorded graph. Tensors are cheap handles to immutable data
// plus an optional (tape, node) reference; a Tensor without a node is a
// constant. Every backward rule is written with the same ops, so computing a
// gradient with create_graph = true records it on the tape and it can be
// differentiated again.
//
// A tracked Tensor refers to its tape by pointer: detach() anything that must
// outlive the tape before using it in further ops.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mwgan::ag {

class Tape;

struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const { return rows * cols; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape s);

class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data) : Tensor(Shape{rows, cols}, std::move(data)) {}

    static Tensor zeros(Shape s) { return Tensor(s, std::vector<double>(s.size(), 0.0)); }
    static Tensor filled(Shape s, double v) { return Tensor(s, std::vector<double>(s.size(), v)); }
    static Tensor scalar(double v) { return Tensor(Shape{1, 1}, {v}); }

    Shape shape() const { return shape_; }
    std::size_t rows() const { return shape_.rows; }
    std::size_t cols() const { return shape_.cols; }
    std::size_t size() const { return shape_.size(); }

    std::span<const double> data() const { return {data_->data(), data_->size()}; }
    double operator()(std::size_t r, std::size_t c) const { return (*data_)[r * shape_.cols + c]; }
    double operator[](std::size_t k) const { return (*data_)[k]; }
    // Value of a 1x1 tensor.
    double item() const;

    // True when the tensor is a node on a tape (requires_grad).
    bool requires_grad() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    std::size_t node() const { return node_; }

    // Same data, no graph reference.
    Tensor detach() const;

private:
    friend class Tape;
    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_ = std::make_shared<const std::vector<double>>();
    Tape* tape_ = nullptr;
    std::size_t node_ = 0;
};

// Maps the upstream gradient to one gradient per recorded parent, in order.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_output)>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf node that gradients can be taken with respect to.
    Tensor variable(const Tensor& value);

    // Adds `value` as a node computed from `parents`. Used by every op; public
    // so callers can define custom ops. Returns `value` untracked when no
    // parent is tracked or recording is off.
    Tensor record(const Tensor& value, std::vector<Tensor> parents, BackwardFn backward);

    bool recording() const { return recording_; }
    std::size_t size() const { return nodes_.size(); }

private:
    friend std::vector<Tensor> grad(const Tensor&, std::span<const Tensor>, bool);
    friend class RecordingGuard;

    struct Node {
        std::vector<Tensor> parents;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
    bool recording_ = true;
};

// Gradients of the scalar `output` with respect to each input. Inputs that the
// output does not depend on get a zero gradient. With create_graph the result
// is recorded on the tape; otherwise it is a constant.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs, bool create_graph = false);
inline Tensor grad(const Tensor& output, const Tensor& input, bool create_graph = false) {
    return grad(output, std::span<const Tensor>(&input, 1), create_graph)[0];
}

// ---------------------------------------------------------------------------
// Ops. Shape mismatches throw ShapeError naming both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b); // elementwise
Tensor div(const Tensor& a, const Tensor& b); // elementwise
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor neg(const Tensor& a);
// x (m x n) + b (1 x n) broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& b);

Tensor leaky_relu(const Tensor& a, double slope);
Tensor tanh(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
// max(a, floor) with zero gradient where the floor is active.
Tensor clamp_min(const Tensor& a, double floor);

Tensor sum(const Tensor& a);  // 1 x 1
Tensor mean(const Tensor& a); // 1 x 1
// Broadcasts a 1x1 tensor to `shape`.
Tensor expand(const Tensor& scalar, Shape shape);

Tensor sum_rows(const Tensor& a);                      // m x n -> 1 x n
Tensor repeat_rows(const Tensor& a, std::size_t m);    // 1 x n -> m x n
Tensor group_sum(const Tensor& a, std::size_t group);  // m x (g k) -> m x k, sums consecutive column groups
Tensor group_repeat(const Tensor& a, std::size_t group); // m x k -> m x (g k)

enum class Axis { Rows = 0, Cols = 1 };
Tensor concat(const Tensor& a, const Tensor& b, Axis axis);
Tensor slice(const Tensor& a, Axis axis, std::size_t begin, std::size_t end);
// Inverse of slice: embeds `a` at offset `begin` in zeros of extent `total` along `axis`.
Tensor pad(const Tensor& a, Axis axis, std::size_t begin, std::size_t total);

inline constexpr double kNormFloor = 1e-12;

enum class NormAxis { All, Rows, Cols };
// sqrt(max(sum of squares, kNormFloor)). Rows: one norm per row (m x 1);
// Cols: one per column (1 x n); All: 1 x 1.
Tensor l2_norm(const Tensor& a, NormAxis axis = NormAxis::All);

// ---------------------------------------------------------------------------

struct GradientCheckReport {
    double relative_error = 0.0; // |analytic - numeric|_2 / max(|analytic|_2, |numeric|_2)
    double max_abs_error = 0.0;  // largest entrywise difference
    bool passed = false;
};

// f builds a scalar from a tracked input on the given tape. Compares grad()
// against central differences with the given step.
using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;
GradientCheckReport gradient_check(const ScalarFn& f, const Tensor& x, double step = 1e-5, double tol = 1e-6);

} // namespace mwgan::ag
