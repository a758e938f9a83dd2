#include "mwgan/autograd.hpp"

#include "mwgan/errors.hpp"
#include "mwgan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mwgan::ag {

std::string to_string(Shape s) { return "[" + std::to_string(s.rows) + " x " + std::to_string(s.cols) + "]"; }

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape) {
    if (data.size() != shape.size())
        throw ShapeError("Tensor: " + std::to_string(data.size()) + " values for shape " + to_string(shape));
    data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("Tensor::item: expected a 1 x 1 tensor, got " + to_string(shape_));
    return (*data_)[0];
}

Tensor Tensor::detach() const {
    Tensor t = *this;
    t.tape_ = nullptr;
    t.node_ = 0;
    return t;
}

class RecordingGuard {
public:
    RecordingGuard(Tape& tape, bool on) : tape_(tape), saved_(tape.recording_) { tape.recording_ = on; }
    ~RecordingGuard() { tape_.recording_ = saved_; }
    RecordingGuard(const RecordingGuard&) = delete;
    RecordingGuard& operator=(const RecordingGuard&) = delete;

private:
    Tape& tape_;
    bool saved_;
};

Tensor Tape::variable(const Tensor& value) {
    Tensor t = value.detach();
    nodes_.push_back(Node{});
    t.tape_ = this;
    t.node_ = nodes_.size() - 1;
    return t;
}

Tensor Tape::record(const Tensor& value, std::vector<Tensor> parents, BackwardFn backward) {
    Tensor out = value.detach();
    if (!recording_) return out;
    bool any = false;
    for (const auto& p : parents) {
        if (p.tape_ == nullptr) continue;
        if (p.tape_ != this) throw std::logic_error("autograd: operands recorded on different tapes");
        any = true;
    }
    if (!any) return out;
    nodes_.push_back(Node{std::move(parents), std::move(backward)});
    out.tape_ = this;
    out.node_ = nodes_.size() - 1;
    return out;
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> inputs, bool create_graph) {
    if (output.size() != 1) throw ShapeError("grad: output must be 1 x 1, got " + to_string(output.shape()));
    std::vector<Tensor> result;
    result.reserve(inputs.size());
    Tape* tape = output.tape();
    if (tape == nullptr) {
        for (const auto& x : inputs) result.push_back(Tensor::zeros(x.shape()));
        return result;
    }

    RecordingGuard guard(*tape, create_graph);
    const std::size_t top = output.node();
    std::vector<Tensor> g(top + 1);
    std::vector<char> has(top + 1, 0);
    g[top] = Tensor::scalar(1.0);
    has[top] = 1;
    for (std::size_t id = top + 1; id-- > 0;) {
        if (!has[id]) continue;
        // Copies: the backward pass may append to nodes_ and reallocate it.
        const std::vector<Tensor> parents = tape->nodes_[id].parents;
        const BackwardFn backward = tape->nodes_[id].backward;
        if (!backward) continue;
        const std::vector<Tensor> grads = backward(g[id]);
        if (grads.size() != parents.size()) throw std::logic_error("autograd: backward rule returned the wrong arity");
        for (std::size_t k = 0; k < parents.size(); ++k) {
            const Tensor& p = parents[k];
            if (p.tape() != tape) continue;
            if (!(grads[k].shape() == p.shape()))
                throw std::logic_error("autograd: backward rule produced gradient of shape " + to_string(grads[k].shape()) +
                                       " for operand " + to_string(p.shape()));
            if (has[p.node()]) {
                g[p.node()] = add(g[p.node()], grads[k]);
            } else {
                g[p.node()] = grads[k];
                has[p.node()] = 1;
            }
        }
    }
    for (const auto& x : inputs) {
        if (x.tape() == tape && x.node() <= top && has[x.node()])
            result.push_back(create_graph ? g[x.node()] : g[x.node()].detach());
        else
            result.push_back(Tensor::zeros(x.shape()));
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

Tensor make(const Tensor& value, std::vector<Tensor> parents, BackwardFn backward) {
    Tape* tape = nullptr;
    for (const auto& p : parents)
        if (p.tape() != nullptr) {
            tape = p.tape();
            break;
        }
    if (tape == nullptr) return value;
    return tape->record(value, std::move(parents), std::move(backward));
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
}

void same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!(a.shape() == b.shape())) mismatch(op, a, b);
}

template <class F>
Tensor map(const Tensor& a, F f) {
    std::vector<double> out(a.size());
    const auto d = a.data();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(d[k]);
    return Tensor(a.shape(), std::move(out));
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
    std::vector<double> out(a.size());
    const auto da = a.data(), db = b.data();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(da[k], db[k]);
    return Tensor(a.shape(), std::move(out));
}

std::size_t extent(const Tensor& a, Axis axis) { return axis == Axis::Rows ? a.rows() : a.cols(); }

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) mismatch("matmul", a, b);
    std::vector<double> out(a.rows() * b.cols());
    kernels::matmul(a.data(), b.data(), out, a.rows(), a.cols(), b.cols());
    return make(Tensor(a.rows(), b.cols(), std::move(out)), {a, b}, [a, b](const Tensor& g) {
        return std::vector<Tensor>{matmul(g, transpose(b)), matmul(transpose(a), g)};
    });
}

Tensor transpose(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j * a.rows() + i] = a(i, j);
    return make(Tensor(a.cols(), a.rows(), std::move(out)), {a},
                [](const Tensor& g) { return std::vector<Tensor>{transpose(g)}; });
}

Tensor add(const Tensor& a, const Tensor& b) {
    same_shape("add", a, b);
    return make(zip(a, b, std::plus<>{}), {a, b}, [](const Tensor& g) { return std::vector<Tensor>{g, g}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    same_shape("sub", a, b);
    return make(zip(a, b, std::minus<>{}), {a, b}, [](const Tensor& g) { return std::vector<Tensor>{g, neg(g)}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    same_shape("mul", a, b);
    return make(zip(a, b, std::multiplies<>{}), {a, b},
                [a, b](const Tensor& g) { return std::vector<Tensor>{mul(g, b), mul(g, a)}; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    same_shape("div", a, b);
    return make(zip(a, b, std::divides<>{}), {a, b}, [a, b](const Tensor& g) {
        return std::vector<Tensor>{div(g, b), neg(div(mul(g, a), square(b)))};
    });
}

Tensor scale(const Tensor& a, double c) {
    return make(map(a, [c](double x) { return c * x; }), {a},
                [c](const Tensor& g) { return std::vector<Tensor>{scale(g, c)}; });
}

Tensor add_scalar(const Tensor& a, double c) {
    return make(map(a, [c](double x) { return x + c; }), {a}, [](const Tensor& g) { return std::vector<Tensor>{g}; });
}

Tensor neg(const Tensor& a) {
    return make(map(a, [](double x) { return -x; }), {a}, [](const Tensor& g) { return std::vector<Tensor>{neg(g)}; });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    if (b.rows() != 1 || b.cols() != x.cols()) mismatch("add_bias", x, b);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out[i * x.cols() + j] = x(i, j) + b[j];
    return make(Tensor(x.shape(), std::move(out)), {x, b},
                [](const Tensor& g) { return std::vector<Tensor>{g, sum_rows(g)}; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    // Subgradient at 0 is the negative-side slope.
    const Tensor mask = map(a, [slope](double x) { return x > 0.0 ? 1.0 : slope; });
    return make(zip(a, mask, std::multiplies<>{}), {a},
                [mask](const Tensor& g) { return std::vector<Tensor>{mul(g, mask)}; });
}

Tensor tanh(const Tensor& a) {
    return make(map(a, [](double x) { return std::tanh(x); }), {a}, [a](const Tensor& g) {
        return std::vector<Tensor>{mul(g, add_scalar(neg(square(tanh(a))), 1.0))};
    });
}

Tensor square(const Tensor& a) {
    return make(map(a, [](double x) { return x * x; }), {a},
                [a](const Tensor& g) { return std::vector<Tensor>{mul(g, scale(a, 2.0))}; });
}

Tensor sqrt(const Tensor& a) {
    return make(map(a, [](double x) { return std::sqrt(x); }), {a},
                [a](const Tensor& g) { return std::vector<Tensor>{div(g, scale(sqrt(a), 2.0))}; });
}

Tensor clamp_min(const Tensor& a, double floor) {
    const Tensor mask = map(a, [floor](double x) { return x > floor ? 1.0 : 0.0; });
    return make(map(a, [floor](double x) { return std::max(x, floor); }), {a},
                [mask](const Tensor& g) { return std::vector<Tensor>{mul(g, mask)}; });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.data()) s += x;
    const Shape shape = a.shape();
    return make(Tensor::scalar(s), {a}, [shape](const Tensor& g) { return std::vector<Tensor>{expand(g, shape)}; });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor expand(const Tensor& scalar, Shape shape) {
    if (scalar.size() != 1) throw ShapeError("expand: expected a 1 x 1 tensor, got " + to_string(scalar.shape()));
    return make(Tensor::filled(shape, scalar[0]), {scalar}, [](const Tensor& g) { return std::vector<Tensor>{sum(g)}; });
}

Tensor sum_rows(const Tensor& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
    const std::size_t m = a.rows();
    return make(Tensor(1, a.cols(), std::move(out)), {a},
                [m](const Tensor& g) { return std::vector<Tensor>{repeat_rows(g, m)}; });
}

Tensor repeat_rows(const Tensor& a, std::size_t m) {
    if (a.rows() != 1) throw ShapeError("repeat_rows: expected a single row, got " + to_string(a.shape()));
    std::vector<double> out;
    out.reserve(m * a.cols());
    for (std::size_t i = 0; i < m; ++i) out.insert(out.end(), a.data().begin(), a.data().end());
    return make(Tensor(m, a.cols(), std::move(out)), {a},
                [](const Tensor& g) { return std::vector<Tensor>{sum_rows(g)}; });
}

Tensor group_sum(const Tensor& a, std::size_t group) {
    if (group == 0 || a.cols() % group != 0)
        throw ShapeError("group_sum: group " + std::to_string(group) + " does not divide " + to_string(a.shape()));
    const std::size_t k = a.cols() / group;
    std::vector<double> out(a.rows() * k, 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i * k + j / group] += a(i, j);
    return make(Tensor(a.rows(), k, std::move(out)), {a},
                [group](const Tensor& g) { return std::vector<Tensor>{group_repeat(g, group)}; });
}

Tensor group_repeat(const Tensor& a, std::size_t group) {
    if (group == 0) throw ShapeError("group_repeat: group must be positive");
    const std::size_t n = a.cols() * group;
    std::vector<double> out(a.rows() * n);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a(i, j / group);
    return make(Tensor(a.rows(), n, std::move(out)), {a},
                [group](const Tensor& g) { return std::vector<Tensor>{group_sum(g, group)}; });
}

Tensor concat(const Tensor& a, const Tensor& b, Axis axis) {
    const bool rows = axis == Axis::Rows;
    if ((rows && a.cols() != b.cols()) || (!rows && a.rows() != b.rows())) mismatch("concat", a, b);
    const Shape shape = rows ? Shape{a.rows() + b.rows(), a.cols()} : Shape{a.rows(), a.cols() + b.cols()};
    std::vector<double> out(shape.size());
    for (std::size_t i = 0; i < shape.rows; ++i)
        for (std::size_t j = 0; j < shape.cols; ++j) {
            const bool first = rows ? i < a.rows() : j < a.cols();
            out[i * shape.cols + j] = first ? a(i, j) : (rows ? b(i - a.rows(), j) : b(i, j - a.cols()));
        }
    const std::size_t split = extent(a, axis), total = extent(a, axis) + extent(b, axis);
    return make(Tensor(shape, std::move(out)), {a, b}, [axis, split, total](const Tensor& g) {
        return std::vector<Tensor>{slice(g, axis, 0, split), slice(g, axis, split, total)};
    });
}

Tensor slice(const Tensor& a, Axis axis, std::size_t begin, std::size_t end) {
    const std::size_t ext = extent(a, axis);
    if (begin >= end || end > ext)
        throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of bounds for " +
                         to_string(a.shape()));
    const bool rows = axis == Axis::Rows;
    const Shape shape = rows ? Shape{end - begin, a.cols()} : Shape{a.rows(), end - begin};
    std::vector<double> out(shape.size());
    for (std::size_t i = 0; i < shape.rows; ++i)
        for (std::size_t j = 0; j < shape.cols; ++j) out[i * shape.cols + j] = rows ? a(i + begin, j) : a(i, j + begin);
    return make(Tensor(shape, std::move(out)), {a},
                [axis, begin, ext](const Tensor& g) { return std::vector<Tensor>{pad(g, axis, begin, ext)}; });
}

Tensor pad(const Tensor& a, Axis axis, std::size_t begin, std::size_t total) {
    const std::size_t len = extent(a, axis);
    if (begin + len > total) throw ShapeError("pad: " + to_string(a.shape()) + " does not fit in extent " + std::to_string(total));
    const bool rows = axis == Axis::Rows;
    const Shape shape = rows ? Shape{total, a.cols()} : Shape{a.rows(), total};
    std::vector<double> out(shape.size(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out[rows ? (i + begin) * shape.cols + j : i * shape.cols + j + begin] = a(i, j);
    return make(Tensor(shape, std::move(out)), {a},
                [axis, begin, len](const Tensor& g) { return std::vector<Tensor>{slice(g, axis, begin, begin + len)}; });
}

Tensor l2_norm(const Tensor& a, NormAxis axis) {
    const Tensor sq = square(a);
    Tensor s;
    switch (axis) {
    case NormAxis::All: s = sum(sq); break;
    case NormAxis::Rows: s = group_sum(sq, a.cols()); break;
    case NormAxis::Cols: s = sum_rows(sq); break;
    }
    return sqrt(clamp_min(s, kNormFloor));
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const ScalarFn& f, const Tensor& x, double step, double tol) {
    Tensor analytic;
    {
        Tape tape;
        const Tensor xv = tape.variable(x);
        analytic = grad(f(tape, xv), xv);
    }
    auto eval = [&](std::vector<double> values) {
        Tape tape;
        return f(tape, tape.variable(Tensor(x.shape(), std::move(values)))).item();
    };
    const std::vector<double> base(x.data().begin(), x.data().end());
    double diff2 = 0.0, an2 = 0.0, nu2 = 0.0;
    GradientCheckReport report;
    for (std::size_t k = 0; k < base.size(); ++k) {
        auto plus = base, minus = base;
        plus[k] += step;
        minus[k] -= step;
        const double numeric = (eval(std::move(plus)) - eval(std::move(minus))) / (2.0 * step);
        const double d = analytic[k] - numeric;
        diff2 += d * d;
        an2 += analytic[k] * analytic[k];
        nu2 += numeric * numeric;
        report.max_abs_error = std::max(report.max_abs_error, std::abs(d));
    }
    const double denom = std::sqrt(std::max(an2, nu2));
    report.relative_error = denom > 0.0 ? std::sqrt(diff2) / denom : std::sqrt(diff2);
    report.passed = report.relative_error < tol;
    return report;
}

} // namespace mwgan::ag
