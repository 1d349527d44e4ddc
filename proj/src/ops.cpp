#include "tae/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tae::nn {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw ShapeError(what);
}

std::string describe(const Tensor& t)
{
    return shape_string(t.shape());
}

void accumulate(std::vector<double>& dst, const std::vector<double>& src)
{
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

struct ConvGeometry {
    std::size_t batch, channels, height, width;
    std::size_t kernels, kh, kw;
    std::size_t out_h, out_w;
    std::ptrdiff_t pad_top, pad_left;
};

// Range of output columns ox for which ox + kx - pad_left lies in [0, width).
std::pair<std::size_t, std::size_t> valid_span(std::ptrdiff_t offset, std::size_t extent, std::size_t out_extent)
{
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out_extent), static_cast<std::ptrdiff_t>(extent) - offset);
    if (hi <= lo) return {0, 0};
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

Var dense(Graph& g, Var x, Var w, Var b)
{
    const Tensor& in = g.value(x);
    const Tensor& wt = g.value(w);
    const Tensor& bt = g.value(b);
    require(in.rank() == 2 && wt.rank() == 2 && bt.rank() == 1,
            "dense expects a matrix input, matrix weights and vector bias; got " + describe(in) + ", " + describe(wt) +
                ", " + describe(bt));
    const std::size_t S = in.dim(0), m = in.dim(1), n = wt.dim(1);
    require(wt.dim(0) == m && bt.dim(0) == n,
            "dense shape mismatch: input " + describe(in) + ", weights " + describe(wt) + ", bias " + describe(bt));

    Tensor out({S, n});
    const double* X = in.values().data();
    const double* W = wt.values().data();
    double* Y = out.values().data();
    for (std::size_t s = 0; s < S; ++s) {
        double* y = Y + s * n;
        std::copy(bt.values().begin(), bt.values().end(), y);
        for (std::size_t i = 0; i < m; ++i) {
            const double a = X[s * m + i];
            if (a == 0.0) continue;
            const double* wr = W + i * n;
            for (std::size_t j = 0; j < n; ++j) y[j] += a * wr[j];
        }
    }

    return g.record("dense", std::move(out), {x, w, b}, [x, w, b, S, m, n](Graph& g, const Tensor& self) {
        const double* dY = self.grad().data();
        if (g.needs_grad(x)) {
            const double* W = g.value(w).values().data();
            double* dX = g.grad(x).data();
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t i = 0; i < m; ++i) {
                    const double* wr = W + i * n;
                    const double* dy = dY + s * n;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += dy[j] * wr[j];
                    dX[s * m + i] += acc;
                }
        }
        if (g.needs_grad(w)) {
            const double* X = g.value(x).values().data();
            double* dW = g.grad(w).data();
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t i = 0; i < m; ++i) {
                    const double a = X[s * m + i];
                    if (a == 0.0) continue;
                    double* dw = dW + i * n;
                    const double* dy = dY + s * n;
                    for (std::size_t j = 0; j < n; ++j) dw[j] += a * dy[j];
                }
        }
        if (g.needs_grad(b)) {
            double* dB = g.grad(b).data();
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t j = 0; j < n; ++j) dB[j] += dY[s * n + j];
        }
    });
}

Var conv2d(Graph& g, Var x, Var kernels, Var bias, Padding padding)
{
    const Tensor& in = g.value(x);
    const Tensor& kt = g.value(kernels);
    const Tensor& bt = g.value(bias);
    require(in.rank() == 4 && kt.rank() == 4 && bt.rank() == 1,
            "conv2d expects NCHW input, KCHW kernels and a bias vector; got " + describe(in) + ", " + describe(kt) +
                ", " + describe(bt));
    require(kt.dim(1) == in.dim(1), "conv2d channel mismatch: input " + describe(in) + ", kernels " + describe(kt));
    require(bt.dim(0) == kt.dim(0), "conv2d bias " + describe(bt) + " does not match kernels " + describe(kt));

    ConvGeometry geo{};
    geo.batch = in.dim(0);
    geo.channels = in.dim(1);
    geo.height = in.dim(2);
    geo.width = in.dim(3);
    geo.kernels = kt.dim(0);
    geo.kh = kt.dim(2);
    geo.kw = kt.dim(3);
    if (padding == Padding::same) {
        geo.out_h = geo.height;
        geo.out_w = geo.width;
        geo.pad_top = static_cast<std::ptrdiff_t>((geo.kh - 1) / 2);
        geo.pad_left = static_cast<std::ptrdiff_t>((geo.kw - 1) / 2);
    } else {
        require(geo.kh <= geo.height && geo.kw <= geo.width,
                "conv2d kernel " + describe(kt) + " larger than input " + describe(in));
        geo.out_h = geo.height - geo.kh + 1;
        geo.out_w = geo.width - geo.kw + 1;
        geo.pad_top = 0;
        geo.pad_left = 0;
    }

    Tensor out({geo.batch, geo.kernels, geo.out_h, geo.out_w});
    {
        const double* I = in.values().data();
        const double* K = kt.values().data();
        double* O = out.values().data();
        const std::size_t plane = geo.height * geo.width, oplane = geo.out_h * geo.out_w;
        for (std::size_t s = 0; s < geo.batch; ++s)
            for (std::size_t k = 0; k < geo.kernels; ++k) {
                double* o = O + (s * geo.kernels + k) * oplane;
                std::fill(o, o + oplane, bt[k]);
                for (std::size_t c = 0; c < geo.channels; ++c) {
                    const double* ip = I + (s * geo.channels + c) * plane;
                    for (std::size_t ky = 0; ky < geo.kh; ++ky) {
                        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - geo.pad_top;
                        const auto [y0, y1] = valid_span(dy, geo.height, geo.out_h);
                        for (std::size_t kx = 0; kx < geo.kw; ++kx) {
                            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - geo.pad_left;
                            const auto [x0, x1] = valid_span(dx, geo.width, geo.out_w);
                            const double wv = K[((k * geo.channels + c) * geo.kh + ky) * geo.kw + kx];
                            for (std::size_t oy = y0; oy < y1; ++oy) {
                                const double* row = ip + (oy + dy) * geo.width + dx;
                                double* orow = o + oy * geo.out_w;
                                for (std::size_t ox = x0; ox < x1; ++ox) orow[ox] += wv * row[ox];
                            }
                        }
                    }
                }
            }
    }

    return g.record("conv2d", std::move(out), {x, kernels, bias}, [x, kernels, bias, geo](Graph& g, const Tensor& self) {
        const double* dO = self.grad().data();
        const std::size_t plane = geo.height * geo.width, oplane = geo.out_h * geo.out_w;
        const bool want_x = g.needs_grad(x), want_k = g.needs_grad(kernels);
        const double* I = g.value(x).values().data();
        const double* K = g.value(kernels).values().data();
        double* dI = want_x ? g.grad(x).data() : nullptr;
        double* dK = want_k ? g.grad(kernels).data() : nullptr;
        for (std::size_t s = 0; s < geo.batch; ++s)
            for (std::size_t k = 0; k < geo.kernels; ++k) {
                const double* go = dO + (s * geo.kernels + k) * oplane;
                for (std::size_t c = 0; c < geo.channels; ++c) {
                    const double* ip = I + (s * geo.channels + c) * plane;
                    double* dip = want_x ? dI + (s * geo.channels + c) * plane : nullptr;
                    for (std::size_t ky = 0; ky < geo.kh; ++ky) {
                        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - geo.pad_top;
                        const auto [y0, y1] = valid_span(dy, geo.height, geo.out_h);
                        for (std::size_t kx = 0; kx < geo.kw; ++kx) {
                            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - geo.pad_left;
                            const auto [x0, x1] = valid_span(dx, geo.width, geo.out_w);
                            const std::size_t widx = ((k * geo.channels + c) * geo.kh + ky) * geo.kw + kx;
                            const double wv = K[widx];
                            double wacc = 0.0;
                            for (std::size_t oy = y0; oy < y1; ++oy) {
                                const double* grow = go + oy * geo.out_w;
                                const double* irow = ip + (oy + dy) * geo.width + dx;
                                if (want_k)
                                    for (std::size_t ox = x0; ox < x1; ++ox) wacc += grow[ox] * irow[ox];
                                if (want_x) {
                                    double* drow = dip + (oy + dy) * geo.width + dx;
                                    for (std::size_t ox = x0; ox < x1; ++ox) drow[ox] += wv * grow[ox];
                                }
                            }
                            if (want_k) dK[widx] += wacc;
                        }
                    }
                }
            }
        if (g.needs_grad(bias)) {
            double* dB = g.grad(bias).data();
            for (std::size_t s = 0; s < geo.batch; ++s)
                for (std::size_t k = 0; k < geo.kernels; ++k) {
                    const double* go = dO + (s * geo.kernels + k) * oplane;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < oplane; ++i) acc += go[i];
                    dB[k] += acc;
                }
        }
    });
}

Var maxpool2(Graph& g, Var x)
{
    const Tensor& in = g.value(x);
    require(in.rank() == 4, "maxpool2 expects an NCHW tensor, got " + describe(in));
    const std::size_t N = in.dim(0) * in.dim(1), H = in.dim(2), W = in.dim(3);
    const std::size_t oh = (H + 1) / 2, ow = (W + 1) / 2;

    Tensor out({in.dim(0), in.dim(1), oh, ow});
    std::vector<std::size_t> argmax(out.size());
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t where = p * H * W + (2 * oy) * W + 2 * ox;
                for (std::size_t wy = 0; wy < 2; ++wy)
                    for (std::size_t wx = 0; wx < 2; ++wx) {
                        const std::size_t iy = 2 * oy + wy, ix = 2 * ox + wx;
                        if (iy >= H || ix >= W) continue;
                        const std::size_t idx = p * H * W + iy * W + ix;
                        if (in[idx] > best) {
                            best = in[idx];
                            where = idx;
                        }
                    }
                const std::size_t o = p * oh * ow + oy * ow + ox;
                out[o] = best;
                argmax[o] = where;
            }

    return g.record("maxpool2", std::move(out), {x}, [x, argmax = std::move(argmax)](Graph& g, const Tensor& self) {
        auto& dx = g.grad(x);
        for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += self.grad()[o];
    });
}

Var upsample2(Graph& g, Var x)
{
    const Tensor& in = g.value(x);
    require(in.rank() == 4, "upsample2 expects an NCHW tensor, got " + describe(in));
    const std::size_t N = in.dim(0) * in.dim(1), H = in.dim(2), W = in.dim(3);
    Tensor out({in.dim(0), in.dim(1), 2 * H, 2 * W});
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t y = 0; y < 2 * H; ++y)
            for (std::size_t xx = 0; xx < 2 * W; ++xx)
                out[(p * 2 * H + y) * 2 * W + xx] = in[(p * H + y / 2) * W + xx / 2];

    return g.record("upsample2", std::move(out), {x}, [x, N, H, W](Graph& g, const Tensor& self) {
        auto& dx = g.grad(x);
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t y = 0; y < 2 * H; ++y)
                for (std::size_t xx = 0; xx < 2 * W; ++xx)
                    dx[(p * H + y / 2) * W + xx / 2] += self.grad()[(p * 2 * H + y) * 2 * W + xx];
    });
}

Var relu(Graph& g, Var x)
{
    const Tensor& in = g.value(x);
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    return g.record("relu", std::move(out), {x}, [x](Graph& g, const Tensor& self) {
        const auto& v = g.value(x).values();
        auto& dx = g.grad(x);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] > 0.0) dx[i] += self.grad()[i];
    });
}

Var sigmoid(Graph& g, Var x)
{
    const Tensor& in = g.value(x);
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double v = in[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return g.record("sigmoid", std::move(out), {x}, [x](Graph& g, const Tensor& self) {
        auto& dx = g.grad(x);
        for (std::size_t i = 0; i < self.size(); ++i) dx[i] += self.grad()[i] * self[i] * (1.0 - self[i]);
    });
}

Var softmax_cross_entropy(Graph& g, Var logits, std::span<const int> labels)
{
    const Tensor& z = g.value(logits);
    require(z.rank() == 2, "softmax_cross_entropy expects S x classes logits, got " + describe(z));
    const std::size_t S = z.dim(0), C = z.dim(1);
    require(labels.size() == S, "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(S) + " rows");
    for (int label : labels)
        if (label < 0 || static_cast<std::size_t>(label) >= C)
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                                    std::to_string(C) + ")");

    std::vector<double> probs(S * C);
    double loss = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        const double* row = z.values().data() + s * C;
        const double peak = *std::max_element(row, row + C);
        double total = 0.0;
        for (std::size_t c = 0; c < C; ++c) total += std::exp(row[c] - peak);
        const double log_total = std::log(total);
        for (std::size_t c = 0; c < C; ++c) probs[s * C + c] = std::exp(row[c] - peak - log_total);
        loss -= row[labels[s]] - peak - log_total;
    }
    loss /= static_cast<double>(S);

    std::vector<int> targets(labels.begin(), labels.end());
    return g.record("softmax_cross_entropy", Tensor::scalar(loss), {logits},
                    [logits, S, C, probs = std::move(probs), targets = std::move(targets)](Graph& g, const Tensor& self) {
                        const double scale = self.grad()[0] / static_cast<double>(S);
                        auto& dz = g.grad(logits);
                        for (std::size_t s = 0; s < S; ++s)
                            for (std::size_t c = 0; c < C; ++c) {
                                const double onehot = static_cast<std::size_t>(targets[s]) == c ? 1.0 : 0.0;
                                dz[s * C + c] += scale * (probs[s * C + c] - onehot);
                            }
                    });
}

Var mse(Graph& g, Var pred, const Tensor& target)
{
    const Tensor& p = g.value(pred);
    require(p.shape() == target.shape(),
            "mse shape mismatch: prediction " + describe(p) + ", target " + describe(target));
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - target[i];
        acc += d * d;
    }
    const double n = static_cast<double>(p.size());
    return g.record("mse", Tensor::scalar(acc / n), {pred}, [pred, target = target.values(), n](Graph& g, const Tensor& self) {
        const auto& v = g.value(pred).values();
        auto& dp = g.grad(pred);
        const double scale = 2.0 * self.grad()[0] / n;
        for (std::size_t i = 0; i < v.size(); ++i) dp[i] += scale * (v[i] - target[i]);
    });
}

Var reshape(Graph& g, Var x, Shape shape)
{
    Tensor out = g.value(x).reshaped(std::move(shape));
    return g.record("reshape", std::move(out), {x}, [x](Graph& g, const Tensor& self) {
        accumulate(g.grad(x), self.grad());
    });
}

Var center_crop(Graph& g, Var x, std::size_t h, std::size_t w)
{
    const Tensor& in = g.value(x);
    require(in.rank() == 4, "center_crop expects an NCHW tensor, got " + describe(in));
    const std::size_t N = in.dim(0) * in.dim(1), H = in.dim(2), W = in.dim(3);
    require(h <= H && w <= W, "center_crop target larger than input " + describe(in));
    const std::size_t top = (H - h) / 2, left = (W - w) / 2;
    Tensor out({in.dim(0), in.dim(1), h, w});
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t xx = 0; xx < w; ++xx) out[(p * h + y) * w + xx] = in[(p * H + y + top) * W + xx + left];

    return g.record("center_crop", std::move(out), {x}, [x, N, H, W, h, w, top, left](Graph& g, const Tensor& self) {
        auto& dx = g.grad(x);
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t xx = 0; xx < w; ++xx)
                    dx[(p * H + y + top) * W + xx + left] += self.grad()[(p * h + y) * w + xx];
    });
}

Var concat_columns(Graph& g, Var a, Var b)
{
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    require(ta.rank() == 2 && tb.rank() == 2 && ta.dim(0) == tb.dim(0),
            "concat_columns needs matrices with equal row counts, got " + describe(ta) + " and " + describe(tb));
    const std::size_t S = ta.dim(0), m = ta.dim(1), n = tb.dim(1);
    Tensor out({S, m + n});
    for (std::size_t s = 0; s < S; ++s) {
        std::copy_n(ta.values().data() + s * m, m, out.values().data() + s * (m + n));
        std::copy_n(tb.values().data() + s * n, n, out.values().data() + s * (m + n) + m);
    }
    return g.record("concat_columns", std::move(out), {a, b}, [a, b, S, m, n](Graph& g, const Tensor& self) {
        const double* d = self.grad().data();
        if (g.needs_grad(a)) {
            auto& da = g.grad(a);
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t i = 0; i < m; ++i) da[s * m + i] += d[s * (m + n) + i];
        }
        if (g.needs_grad(b)) {
            auto& db = g.grad(b);
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t i = 0; i < n; ++i) db[s * n + i] += d[s * (m + n) + m + i];
        }
    });
}

Var add(Graph& g, Var a, Var b)
{
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    require(ta.shape() == tb.shape(), "add shape mismatch: " + describe(ta) + " vs " + describe(tb));
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
    return g.record("add", std::move(out), {a, b}, [a, b](Graph& g, const Tensor& self) {
        if (g.needs_grad(a)) accumulate(g.grad(a), self.grad());
        if (g.needs_grad(b)) accumulate(g.grad(b), self.grad());
    });
}

Var scale(Graph& g, Var x, double factor)
{
    const Tensor& in = g.value(x);
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = factor * in[i];
    return g.record("scale", std::move(out), {x}, [x, factor](Graph& g, const Tensor& self) {
        auto& dx = g.grad(x);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * self.grad()[i];
    });
}

Var sum(Graph& g, Var x)
{
    const Tensor& in = g.value(x);
    double acc = 0.0;
    for (double v : in.values()) acc += v;
    return g.record("sum", Tensor::scalar(acc), {x}, [x](Graph& g, const Tensor& self) {
        for (double& d : g.grad(x)) d += self.grad()[0];
    });
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels)
{
    const std::size_t S = logits.dim(0), C = logits.dim(1);
    std::size_t correct = 0;
    for (std::size_t s = 0; s < S && s < labels.size(); ++s) {
        const double* row = logits.values().data() + s * C;
        const auto best = static_cast<int>(std::max_element(row, row + C) - row);
        if (best == labels[s]) ++correct;
    }
    return correct;
}

}  // namespace tae::nn
