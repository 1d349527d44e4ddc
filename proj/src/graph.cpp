#include "tae/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace tae {

Var Graph::constant(Tensor value, std::string label)
{
    value.zero_grad();
    nodes_.push_back(Node{std::move(label), {}, std::move(value), nullptr, nullptr, false});
    return Var{nodes_.size() - 1};
}

Var Graph::parameter(Tensor& bound, std::string label)
{
    Tensor copy(bound.shape(), bound.values());
    nodes_.push_back(Node{std::move(label), {}, std::move(copy), nullptr, &bound, true});
    return Var{nodes_.size() - 1};
}

Var Graph::record(std::string op, Tensor out, std::vector<Var> inputs, BackwardFn backward)
{
    const std::size_t id = nodes_.size();
    bool needs = false;
    for (Var in : inputs) {
        if (in.id >= id) throw std::logic_error("graph input refers to a later node");
        needs = needs || nodes_[in.id].needs_grad;
    }
    out.zero_grad();
    nodes_.push_back(Node{std::move(op), std::move(inputs), std::move(out), std::move(backward), nullptr, needs});
    return Var{id};
}

void Graph::backward(Var root)
{
    if (value(root).size() != 1)
        throw ShapeError("backward() without a seed requires a scalar root, got " + shape_string(value(root).shape()));
    const double one = 1.0;
    backward(root, std::span<const double>(&one, 1));
}

void Graph::backward(Var root, std::span<const double> seed)
{
    Node& r = nodes_.at(root.id);
    if (seed.size() != r.out.size()) throw ShapeError("backward seed size does not match root");

    std::vector<char> live(root.id + 1, 0);
    live[root.id] = 1;
    for (std::size_t n = root.id + 1; n-- > 0;) {
        if (!live[n] || !nodes_[n].needs_grad) continue;
        for (Var in : nodes_[n].inputs) live[in.id] = 1;
    }
    for (std::size_t n = 0; n <= root.id; ++n)
        if (live[n]) nodes_[n].out.zero_grad();

    std::copy(seed.begin(), seed.end(), r.out.grad().begin());
    for (std::size_t n = root.id + 1; n-- > 0;) {
        Node& node = nodes_[n];
        if (!live[n] || !node.needs_grad) continue;
        if (node.backward) node.backward(*this, node.out);
        if (node.bound) {
            auto& dst = node.bound->grad();
            const auto& src = node.out.grad();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
    }
}

bool Graph::depends_on(Var from, Var target) const
{
    if (from.id == target.id) return true;
    if (target.id > from.id) return false;
    std::vector<char> seen(from.id + 1, 0);
    std::vector<std::size_t> stack{from.id};
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (n == target.id) return true;
        if (seen[n]) continue;
        seen[n] = 1;
        for (Var in : nodes_[n].inputs)
            if (in.id >= target.id) stack.push_back(in.id);
    }
    return false;
}

}  // namespace tae
