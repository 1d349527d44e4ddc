#pragma once

#include "tae/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tae {

/// Handle to a node in a Graph.
struct Var {
    std::size_t id = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so every input
/// id of node n is smaller than n and the insertion order is topological.
///
/// Parameters enter through `parameter()`, which copies the value onto the
/// tape; after `backward()` the tape gradient is added into the bound
/// tensor's grad buffer. Forward evaluation never writes to a parameter.
class Graph {
public:
    using BackwardFn = std::function<void(Graph&, const Tensor& out)>;

    Var constant(Tensor value, std::string label = "constant");
    Var parameter(Tensor& bound, std::string label);

    /// Appends an op node. `backward` receives the node's own tensor (value
    /// and accumulated output gradient) and adds into its inputs' grads.
    Var record(std::string op, Tensor out, std::vector<Var> inputs, BackwardFn backward);

    const Tensor& value(Var v) const { return nodes_.at(v.id).out; }
    std::vector<double>& grad(Var v) { return nodes_.at(v.id).out.grad(); }
    const std::vector<double>& grad(Var v) const { return nodes_.at(v.id).out.grad(); }
    bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
    const std::string& op(Var v) const { return nodes_.at(v.id).op; }
    const std::vector<Var>& inputs(Var v) const { return nodes_.at(v.id).inputs; }
    std::size_t size() const { return nodes_.size(); }

    /// Seeds d(root)/d(root) = 1; root must hold a single element.
    void backward(Var root);
    /// Seeds the root gradient with an arbitrary cotangent.
    void backward(Var root, std::span<const double> seed);

    /// True if `target` lies on any input path of `from` (or equals it).
    bool depends_on(Var from, Var target) const;

private:
    struct Node {
        std::string op;
        std::vector<Var> inputs;
        Tensor out;
        BackwardFn backward;
        Tensor* bound = nullptr;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;
};

}  // namespace tae
