#include "tae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace tae {

std::size_t element_count(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape))
{
    if (shape_.empty() || std::find(shape_.begin(), shape_.end(), 0) != shape_.end())
        throw ShapeError("tensor shape must be non-empty with positive extents, got " + shape_string(shape_));
    values_.assign(element_count(shape_), fill);
    grad_.assign(values_.size(), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values))
{
    if (shape_.empty() || std::find(shape_.begin(), shape_.end(), 0) != shape_.end())
        throw ShapeError("tensor shape must be non-empty with positive extents, got " + shape_string(shape_));
    if (element_count(shape_) != values_.size())
        throw ShapeError("shape " + shape_string(shape_) + " does not match " + std::to_string(values_.size()) +
                         " values");
    grad_.assign(values_.size(), 0.0);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged matrix literal");
        v.insert(v.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(v));
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (element_count(shape) != size())
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), values_);
}

void Tensor::zero_grad()
{
    std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool Tensor::all_finite() const
{
    auto finite = [](double x) { return std::isfinite(x); };
    return std::all_of(values_.begin(), values_.end(), finite) && std::all_of(grad_.begin(), grad_.end(), finite);
}

}  // namespace tae
