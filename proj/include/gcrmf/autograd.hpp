// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/tensor.hpp"

namespace gcrmf {

// Handle into a Tape. Cheap to copy; only meaningful together with the tape
// that produced it.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Every operation records its inputs and a backward
// closure; backward() replays the closures in reverse creation order, which
// is a topological order by construction. Closures capture node ids, never
// references, so the node vector may reallocate freely.
//
// With grads disabled the same ops compute identical forward values and skip
// the recording, which is what scoring paths use.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    bool grad_enabled() const { return grad_enabled_; }

    int size() const { return static_cast<int>(nodes_.size()); }

    // ---- node creation -------------------------------------------------

    Var leaf(Tensor value) { return make(std::move(value), {}); }

    Var constant(Tensor value) { return make(std::move(value), {}); }

    Var scalar(double v) { return make(Tensor::scalar(v), {}); }

    // ---- accessors -----------------------------------------------------

    const Tensor& val(Var v) const {
        check(v);
        return nodes_[static_cast<std::size_t>(v.id)].value;
    }

    // Gradient of a node after backward(); zeros if the node never received
    // a contribution.
    const Tensor& grad(Var v) {
        check(v);
        return grad_ref(v.id);
    }

    // ---- arithmetic ----------------------------------------------------

    Var add(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        require_same_shape(ta, tb, "add");
        Tensor out = ta;
        for (int i = 0; i < out.size(); ++i) out[i] += tb[i];
        return make(std::move(out), [a = a.id, b = b.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            t.accumulate(a, g);
            t.accumulate(b, g);
        });
    }

    Var sub(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        require_same_shape(ta, tb, "sub");
        Tensor out = ta;
        for (int i = 0; i < out.size(); ++i) out[i] -= tb[i];
        return make(std::move(out), [a = a.id, b = b.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            t.accumulate(a, g);
            Tensor& gb = t.grad_ref(b);
            for (int i = 0; i < g.size(); ++i) gb[i] -= g[i];
        });
    }

    Var add_n(const std::vector<Var>& xs) {
        if (xs.empty()) throw DomainError("add_n: empty input list");
        Tensor out = val(xs[0]);
        for (std::size_t k = 1; k < xs.size(); ++k) {
            const Tensor& tk = val(xs[k]);
            require_same_shape(out, tk, "add_n");
            for (int i = 0; i < out.size(); ++i) out[i] += tk[i];
        }
        std::vector<int> ids;
        ids.reserve(xs.size());
        for (Var v : xs) ids.push_back(v.id);
        return make(std::move(out), [ids = std::move(ids)](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            for (int id : ids) t.accumulate(id, g);
        });
    }

    // out = s * a, with scalar variable s
    Var scale(Var s, Var a) {
        const Tensor& ts = val(s);
        if (!ts.is_scalar()) throw DimensionError("scale: multiplier must be scalar");
        const Tensor& ta = val(a);
        Tensor out = ta;
        const double sv = ts.scalar_value();
        for (int i = 0; i < out.size(); ++i) out[i] *= sv;
        return make(std::move(out), [s = s.id, a = a.id, sv](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& ta = t.node_value(a);
            Tensor& ga = t.grad_ref(a);
            double ds = 0.0;
            for (int i = 0; i < g.size(); ++i) {
                ga[i] += sv * g[i];
                ds += g[i] * ta[i];
            }
            t.grad_ref(s)[0] += ds;
        });
    }

    Var scale_const(Var a, double c) {
        Tensor out = val(a);
        for (int i = 0; i < out.size(); ++i) out[i] *= c;
        return make(std::move(out), [a = a.id, c](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += c * g[i];
        });
    }

    // ---- linear algebra ------------------------------------------------

    Var matvec(Var w, Var x) {
        const Tensor& tw = val(w);
        const Tensor& tx = val(x);
        if (tw.rank() != 2) throw DimensionError("matvec: first operand must be rank 2");
        if (!tx.is_vector()) throw DimensionError("matvec: second operand must be a vector");
        if (tw.cols() != tx.rows()) throw DimensionError("matvec: inner dimensions differ");
        Tensor out = Tensor::zeros_vec(tw.rows());
        for (int i = 0; i < tw.rows(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < tw.cols(); ++j) acc += tw.at(i, j) * tx[j];
            out[i] = acc;
        }
        return make(std::move(out), [w = w.id, x = x.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& tw = t.node_value(w);
            const Tensor& tx = t.node_value(x);
            Tensor& gw = t.grad_ref(w);
            Tensor& gx = t.grad_ref(x);
            for (int i = 0; i < tw.rows(); ++i) {
                const double gi = g[i];
                for (int j = 0; j < tw.cols(); ++j) {
                    gw.at(i, j) += gi * tx[j];
                    gx[j] += tw.at(i, j) * gi;
                }
            }
        });
    }

    Var matmul(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        if (ta.rank() != 2 || tb.rank() != 2)
            throw DimensionError("matmul: operands must be rank 2");
        if (ta.cols() != tb.rows()) throw DimensionError("matmul: inner dimensions differ");
        Tensor out = Tensor::zeros_mat(ta.rows(), tb.cols());
        for (int i = 0; i < ta.rows(); ++i)
            for (int k = 0; k < ta.cols(); ++k) {
                const double aik = ta.at(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < tb.cols(); ++j) out.at(i, j) += aik * tb.at(k, j);
            }
        return make(std::move(out), [a = a.id, b = b.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& ta = t.node_value(a);
            const Tensor& tb = t.node_value(b);
            Tensor& ga = t.grad_ref(a);
            Tensor& gb = t.grad_ref(b);
            // dA = g B^T, dB = A^T g
            for (int i = 0; i < ta.rows(); ++i)
                for (int k = 0; k < ta.cols(); ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < tb.cols(); ++j) acc += g.at(i, j) * tb.at(k, j);
                    ga.at(i, k) += acc;
                }
            for (int k = 0; k < tb.rows(); ++k)
                for (int j = 0; j < tb.cols(); ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < ta.rows(); ++i) acc += ta.at(i, k) * g.at(i, j);
                    gb.at(k, j) += acc;
                }
        });
    }

    Var concat(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        if (!ta.is_vector() || !tb.is_vector())
            throw DimensionError("concat: operands must be vectors");
        Tensor out = Tensor::zeros_vec(ta.rows() + tb.rows());
        for (int i = 0; i < ta.rows(); ++i) out[i] = ta[i];
        for (int i = 0; i < tb.rows(); ++i) out[ta.rows() + i] = tb[i];
        const int na = ta.rows();
        return make(std::move(out), [a = a.id, b = b.id, na](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            Tensor& ga = t.grad_ref(a);
            Tensor& gb = t.grad_ref(b);
            for (int i = 0; i < na; ++i) ga[i] += g[i];
            for (int i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
        });
    }

    Var dot(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        require_same_shape(ta, tb, "dot");
        double acc = 0.0;
        for (int i = 0; i < ta.size(); ++i) acc += ta[i] * tb[i];
        return make(Tensor::scalar(acc), [a = a.id, b = b.id](Tape& t, int o) {
            const double g = t.grad_ref(o)[0];
            const Tensor& ta = t.node_value(a);
            const Tensor& tb = t.node_value(b);
            Tensor& ga = t.grad_ref(a);
            Tensor& gb = t.grad_ref(b);
            for (int i = 0; i < ta.size(); ++i) {
                ga[i] += g * tb[i];
                gb[i] += g * ta[i];
            }
        });
    }

    // scalar element a[i]
    Var index(Var a, int i) {
        const Tensor& ta = val(a);
        if (i < 0 || i >= ta.size()) throw DimensionError("index: out of range");
        return make(Tensor::scalar(ta[i]), [a = a.id, i](Tape& t, int o) {
            t.grad_ref(a)[i] += t.grad_ref(o)[0];
        });
    }

    // vector from a list of scalar vars
    Var stack(const std::vector<Var>& xs) {
        if (xs.empty()) throw DomainError("stack: empty input list");
        Tensor out = Tensor::zeros_vec(static_cast<int>(xs.size()));
        std::vector<int> ids;
        ids.reserve(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const Tensor& tk = val(xs[k]);
            if (!tk.is_scalar()) throw DimensionError("stack: inputs must be scalars");
            out[static_cast<int>(k)] = tk.scalar_value();
            ids.push_back(xs[k].id);
        }
        return make(std::move(out), [ids = std::move(ids)](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            for (std::size_t k = 0; k < ids.size(); ++k)
                t.grad_ref(ids[k])[0] += g[static_cast<int>(k)];
        });
    }

    // ---- nonlinearities ------------------------------------------------

    Var leaky_relu(Var a, double slope) {
        const Tensor& ta = val(a);
        Tensor out = ta;
        for (int i = 0; i < out.size(); ++i)
            if (out[i] < 0.0) out[i] *= slope;
        return make(std::move(out), [a = a.id, slope](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& ta = t.node_value(a);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i)
                ga[i] += g[i] * (ta[i] > 0.0 ? 1.0 : slope);
        });
    }

    Var tanh_op(Var a) {
        Tensor out = val(a);
        for (int i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& y = t.node_value(o);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        });
    }

    Var sigmoid(Var a) {
        Tensor out = val(a);
        for (int i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(out[i]);
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& y = t.node_value(o);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        });
    }

    Var exp_op(Var a) {
        Tensor out = val(a);
        for (int i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& y = t.node_value(o);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
        });
    }

    Var log_op(Var a) {
        const Tensor& ta = val(a);
        Tensor out = ta;
        for (int i = 0; i < out.size(); ++i) {
            if (out[i] <= 0.0) throw NumericError("log: nonpositive input");
            out[i] = std::log(out[i]);
        }
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& ta = t.node_value(a);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] / ta[i];
        });
    }

    Var softplus(Var a) {
        Tensor out = val(a);
        for (int i = 0; i < out.size(); ++i) out[i] = softplus_scalar(out[i]);
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& ta = t.node_value(a);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * sigmoid_scalar(ta[i]);
        });
    }

    Var softmax(Var a) {
        const Tensor& ta = val(a);
        if (!ta.is_vector()) throw DimensionError("softmax: input must be a vector");
        if (ta.size() < 1) throw DomainError("softmax: empty input");
        Tensor out = ta;
        double mx = out[0];
        for (int i = 1; i < out.size(); ++i) mx = std::max(mx, out[i]);
        double sum = 0.0;
        for (int i = 0; i < out.size(); ++i) {
            out[i] = std::exp(out[i] - mx);
            sum += out[i];
        }
        for (int i = 0; i < out.size(); ++i) out[i] /= sum;
        return make(std::move(out), [a = a.id](Tape& t, int o) {
            const Tensor& g = t.grad_ref(o);
            const Tensor& y = t.node_value(o);
            Tensor& ga = t.grad_ref(a);
            double inner = 0.0;
            for (int i = 0; i < g.size(); ++i) inner += g[i] * y[i];
            for (int i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - inner);
        });
    }

    Var l2_norm_sq(Var a) {
        const Tensor& ta = val(a);
        double acc = 0.0;
        for (int i = 0; i < ta.size(); ++i) acc += ta[i] * ta[i];
        return make(Tensor::scalar(acc), [a = a.id](Tape& t, int o) {
            const double g = t.grad_ref(o)[0];
            const Tensor& ta = t.node_value(a);
            Tensor& ga = t.grad_ref(a);
            for (int i = 0; i < ta.size(); ++i) ga[i] += 2.0 * g * ta[i];
        });
    }

    // cos(a,b) with norms guarded by +1e-12 so zero vectors stay finite.
    Var cosine_sim(Var a, Var b) {
        const Tensor& ta = val(a);
        const Tensor& tb = val(b);
        require_same_shape(ta, tb, "cosine_sim");
        double s = 0.0, ra2 = 0.0, rb2 = 0.0;
        for (int i = 0; i < ta.size(); ++i) {
            s += ta[i] * tb[i];
            ra2 += ta[i] * ta[i];
            rb2 += tb[i] * tb[i];
        }
        const double ra = std::sqrt(ra2);
        const double rb = std::sqrt(rb2);
        const double na = ra + kNormGuard;
        const double nb = rb + kNormGuard;
        const double c = s / (na * nb);
        return make(Tensor::scalar(c),
                    [a = a.id, b = b.id, ra, rb, na, nb, c](Tape& t, int o) {
            const double g = t.grad_ref(o)[0];
            const Tensor& ta = t.node_value(a);
            const Tensor& tb = t.node_value(b);
            Tensor& ga = t.grad_ref(a);
            Tensor& gb = t.grad_ref(b);
            const double denom = na * nb;
            for (int i = 0; i < ta.size(); ++i) {
                const double da = tb[i] / denom - (ra > 0.0 ? c * ta[i] / (ra * na) : 0.0);
                const double db = ta[i] / denom - (rb > 0.0 ? c * tb[i] / (rb * nb) : 0.0);
                ga[i] += g * da;
                gb[i] += g * db;
            }
        });
    }

    // Cross-entropy of a binary label against a probability already in (0,1).
    // The probability is clamped away from {0,1} so the loss stays finite.
    Var binary_cross_entropy(Var p, double target) {
        const Tensor& tp = val(p);
        if (!tp.is_scalar()) throw DimensionError("binary_cross_entropy: probability must be scalar");
        if (target != 0.0 && target != 1.0)
            throw DomainError("binary_cross_entropy: target must be 0 or 1");
        const double pc = std::clamp(tp.scalar_value(), kProbGuard, 1.0 - kProbGuard);
        const double loss = -(target * std::log(pc) + (1.0 - target) * std::log(1.0 - pc));
        return make(Tensor::scalar(loss), [p = p.id, target, pc](Tape& t, int o) {
            const double g = t.grad_ref(o)[0];
            t.grad_ref(p)[0] += g * (pc - target) / (pc * (1.0 - pc));
        });
    }

    // ---- backward ------------------------------------------------------

    void backward(Var root) {
        check(root);
        if (!grad_enabled_) throw StateError("backward: gradients are disabled on this tape");
        if (backward_done_) throw StateError("backward: already run on this tape");
        const Tensor& rv = val(root);
        if (!rv.is_scalar()) throw DimensionError("backward: root must be a scalar");
        backward_done_ = true;
        grad_ref(root.id)[0] = 1.0;
        for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            if (n.backward && !n.grad.empty()) n.backward(*this, id);
        }
    }

    static double sigmoid_scalar(double x) {
        if (x >= 0.0) {
            const double e = std::exp(-x);
            return 1.0 / (1.0 + e);
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    static double softplus_scalar(double x) {
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }

    static constexpr double kNormGuard = 1e-12;
    static constexpr double kProbGuard = 1e-12;

private:
    using BackwardFn = std::function<void(Tape&, int)>;

    struct Node {
        Tensor value;
        Tensor grad; // empty until first contribution
        BackwardFn backward;
    };

    Var make(Tensor value, BackwardFn fn) {
        Node n;
        n.value = std::move(value);
        if (grad_enabled_) n.backward = std::move(fn);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void check(Var v) const {
        if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
            throw StateError("tape: variable does not belong to this tape");
    }

    const Tensor& node_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

    Tensor& grad_ref(int id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.empty()) n.grad = n.value.zeros_like();
        return n.grad;
    }

    void accumulate(int id, const Tensor& g) {
        Tensor& dst = grad_ref(id);
        for (int i = 0; i < g.size(); ++i) dst[i] += g[i];
    }

    static void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
        if (!a.same_shape(b))
            throw DimensionError(std::string(op) + ": operand shapes differ");
    }

    std::vector<Node> nodes_;
    bool grad_enabled_ = true;
    bool backward_done_ = false;
};

} // namespace gcrmf
