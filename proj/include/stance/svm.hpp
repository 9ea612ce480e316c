#pragma once

// Soft-margin binary SVM trained by sequential minimal optimization.
//
// Dual problem:
//   maximize   W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//   subject to 0 <= a_i <= C,  sum_i a_i y_i = 0
// Decision function f(x) = sum_i a_i y_i K(x_i, x) + b, which for the linear
// kernel collapses to w.x + b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stance/corpus.hpp"
#include "stance/error.hpp"
#include "stance/format.hpp"
#include "stance/sparse.hpp"

namespace stance {

struct TrainConfig {
    double c = 1.0;
    double kkt_tol = 1e-3;
    double alpha_eps = 1e-12;
    std::size_t max_passes = 10000;

    void validate() const {
        if (!(c > 0.0)) throw PreconditionError("C must be positive");
        if (!(kkt_tol > 0.0) || !(alpha_eps > 0.0)) throw PreconditionError("tolerances must be positive");
        if (!(kkt_tol > alpha_eps)) throw PreconditionError("kkt_tol must exceed alpha_eps");
        if (max_passes == 0) throw PreconditionError("max_passes must be positive");
    }
};

struct LabeledExample {
    SparseVector x;
    int y = 1;  // +1 Favor, -1 Against
};

inline int to_sign(StanceLabel l) { return l == StanceLabel::Favor ? 1 : -1; }

struct LinearKernel {
    static constexpr bool is_linear = true;
    double operator()(const SparseVector& a, const SparseVector& b) const { return a.dot(b); }
};

struct SvmModel {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<double> weights;
    std::size_t dimension = 0;
    double c = 1.0;

    // Training diagnostics.
    bool converged = false;
    std::size_t sweeps = 0;
    double max_kkt_violation = 0.0;
};

/// Per-sweep progress line of the outer loop.
struct SweepRecord {
    std::size_t sweep = 0;
    std::size_t changed_pairs = 0;
    double dual_objective = 0.0;
};

/// Optional hooks into training. `on_pair_update` sees the multipliers after
/// every accepted two-variable step.
struct TrainObserver {
    std::function<void(const SweepRecord&)> on_sweep;
    std::function<void(std::span<const double> alphas)> on_pair_update;
};

/// Dual objective W(a) evaluated directly from the kernel matrix.
template <class Kernel = LinearKernel>
double dual_objective(std::span<const LabeledExample> data, std::span<const double> alphas, const Kernel& k = {}) {
    if (alphas.size() != data.size()) throw PreconditionError("dual_objective: one multiplier per example expected");
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        linear += alphas[i];
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (alphas[j] == 0.0) continue;
            quad += alphas[i] * alphas[j] * data[i].y * data[j].y * k(data[i].x, data[j].x);
        }
    }
    return linear - 0.5 * quad;
}

/// w = sum_i a_i y_i x_i.
inline std::vector<double> primal_weights(std::span<const LabeledExample> data, std::span<const double> alphas,
                                          std::size_t dimension) {
    std::vector<double> w(dimension, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (alphas[i] == 0.0) continue;
        for (const auto& [idx, v] : data[i].x.entries()) w[idx] += alphas[i] * data[i].y * v;
    }
    return w;
}

namespace detail {

template <class Kernel>
class SmoSolver {
public:
    SmoSolver(std::span<const LabeledExample> data, std::size_t dimension, const TrainConfig& cfg,
              const Kernel& kernel, const TrainObserver* observer)
        : data_(data), dim_(dimension), cfg_(cfg), k_(kernel), obs_(observer), n_(data.size()),
          alpha_(n_, 0.0), err_(n_), y_(n_), diag_(n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            y_[i] = data_[i].y;
            diag_[i] = k_(data_[i].x, data_[i].x);
            err_[i] = -y_[i];  // f = 0 at a = 0, b = 0
        }
    }

    SvmModel run() {
        std::size_t changed = 0, sweeps = 0;
        bool examine_all = true;
        while ((changed > 0 || examine_all) && sweeps < cfg_.max_passes) {
            changed = 0;
            if (examine_all) {
                refresh_errors();
                for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
            } else {
                for (std::size_t i = 0; i < n_; ++i)
                    if (non_bound(i)) changed += examine(i);
            }
            ++sweeps;
            if (obs_ && obs_->on_sweep) obs_->on_sweep({sweeps, changed, objective()});
            if (examine_all) examine_all = false;
            else if (changed == 0) examine_all = true;
        }

        SvmModel m;
        m.converged = !(changed > 0 || examine_all);
        m.sweeps = sweeps;
        m.alphas = alpha_;
        m.bias = b_;
        m.dimension = dim_;
        m.c = cfg_.c;
        m.weights = primal_weights(data_, alpha_, dim_);
        m.bias = final_bias(m.weights);
        m.max_kkt_violation = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double margin = y_[i] * (data_[i].x.dot(m.weights) + m.bias);
            double v;
            if (alpha_[i] <= cfg_.alpha_eps) v = std::max(0.0, 1.0 - margin);
            else if (alpha_[i] >= cfg_.c - cfg_.alpha_eps) v = std::max(0.0, margin - 1.0);
            else v = std::abs(margin - 1.0);
            m.max_kkt_violation = std::max(m.max_kkt_violation, v);
        }
        return m;
    }

private:
    // The incremental bias only satisfies the last optimised pair. When every
    // alpha sits at a bound it can leave other points violating KKT although
    // the alphas are optimal, so the reported bias is recomputed from all
    // points as the value minimising the largest violation: each point bounds
    // b from below, above, or both (free vectors), and the minimiser is the
    // midpoint of the tightest lower and upper bound.
    double final_bias(const std::vector<double>& w) const {
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            const double g = y_[i] - data_[i].x.dot(w);
            const bool at_lower = alpha_[i] <= cfg_.alpha_eps, at_upper = alpha_[i] >= cfg_.c - cfg_.alpha_eps;
            const bool bounds_below = !(at_lower || at_upper) || (at_lower && y_[i] > 0) || (at_upper && y_[i] < 0);
            const bool bounds_above = !(at_lower || at_upper) || !bounds_below;
            if (bounds_below) lo = std::max(lo, g);
            if (bounds_above) hi = std::min(hi, g);
        }
        if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
        if (std::isfinite(lo)) return std::max(lo, b_);
        if (std::isfinite(hi)) return std::min(hi, b_);
        return b_;
    }

    bool non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < cfg_.c; }

    double objective() const {
        if constexpr (Kernel::is_linear) {
            const auto w = primal_weights(data_, alpha_, dim_);
            double s = 0.0, ww = 0.0;
            for (double a : alpha_) s += a;
            for (double v : w) ww += v * v;
            return s - 0.5 * ww;
        } else {
            return dual_objective(data_, alpha_, k_);
        }
    }

    // Recomputes the error cache from scratch to stop incremental drift.
    void refresh_errors() {
        if constexpr (Kernel::is_linear) {
            const auto w = primal_weights(data_, alpha_, dim_);
            for (std::size_t i = 0; i < n_; ++i) err_[i] = data_[i].x.dot(w) + b_ - y_[i];
        } else {
            for (std::size_t i = 0; i < n_; ++i) {
                double f = b_;
                for (std::size_t j = 0; j < n_; ++j)
                    if (alpha_[j] != 0.0) f += alpha_[j] * y_[j] * k_(data_[j].x, data_[i].x);
                err_[i] = f - y_[i];
            }
        }
    }

    std::size_t examine(std::size_t i2) {
        const double r2 = err_[i2] * y_[i2];
        const double a2 = alpha_[i2];
        if (!((r2 < -cfg_.kkt_tol && a2 < cfg_.c) || (r2 > cfg_.kkt_tol && a2 > 0.0))) return 0;

        // Second-choice heuristic: maximize |E1 - E2| over non-bound examples.
        std::size_t n_free = 0, best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!non_bound(i)) continue;
            ++n_free;
            const double gap = std::abs(err_[i] - err_[i2]);
            if (gap > best_gap) best_gap = gap, best = i;
        }
        if (n_free > 1 && best != n_ && take_step(best, i2)) return 1;
        for (std::size_t i = 0; i < n_; ++i)
            if (non_bound(i) && take_step(i, i2)) return 1;
        for (std::size_t i = 0; i < n_; ++i)
            if (take_step(i, i2)) return 1;
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double C = cfg_.c;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = err_[i1], e2 = err_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s < 0) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(C, C + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - C);
            hi = std::min(C, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = diag_[i1], k22 = diag_[i2];
        const double k12 = k_(data_[i1].x, data_[i2].x);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2n;
        if (eta > 0.0) {
            a2n = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Objective is linear (or degenerate) along the constraint line: take the better end.
            const double f1 = y1 * (e1 - b_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 - b_) - s * a1 * k12 - a2 * k22;
            const auto cost = [&](double a2x) {
                const double a1x = a1 + s * (a2 - a2x);
                return a1x * f1 + a2x * f2 + 0.5 * a1x * a1x * k11 + 0.5 * a2x * a2x * k22 + s * a2x * a1x * k12;
            };
            const double lo_cost = cost(lo), hi_cost = cost(hi);
            if (lo_cost < hi_cost - cfg_.alpha_eps) a2n = lo;
            else if (lo_cost > hi_cost + cfg_.alpha_eps) a2n = hi;
            else a2n = a2;
        }

        const double snap = cfg_.alpha_eps * C;
        if (a2n < snap) a2n = 0.0;
        else if (a2n > C - snap) a2n = C;
        if (std::abs(a2n - a2) < cfg_.alpha_eps * (a2n + a2 + cfg_.alpha_eps)) return false;

        double a1n = a1 + s * (a2 - a2n);
        // Roundoff can push a1 marginally outside the box; move the excess back onto a2.
        if (a1n < 0.0) {
            a2n += s * a1n;
            a1n = 0.0;
        } else if (a1n > C) {
            a2n += s * (a1n - C);
            a1n = C;
        }

        const double d1 = y1 * (a1n - a1), d2 = y2 * (a2n - a2);
        const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
        double bn;
        if (a1n > 0.0 && a1n < C) bn = b1;
        else if (a2n > 0.0 && a2n < C) bn = b2;
        else bn = 0.5 * (b1 + b2);
        const double db = bn - b_;

        for (std::size_t i = 0; i < n_; ++i) {
            const double k1i = i == i1 ? k11 : (i == i2 ? k12 : k_(data_[i1].x, data_[i].x));
            const double k2i = i == i2 ? k22 : (i == i1 ? k12 : k_(data_[i2].x, data_[i].x));
            err_[i] += d1 * k1i + d2 * k2i + db;
        }
        alpha_[i1] = a1n;
        alpha_[i2] = a2n;
        b_ = bn;
        if (obs_ && obs_->on_pair_update) obs_->on_pair_update(alpha_);
        return true;
    }

    std::span<const LabeledExample> data_;
    std::size_t dim_;
    TrainConfig cfg_;
    Kernel k_;
    const TrainObserver* obs_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> err_;  // f(x_i) - y_i
    std::vector<double> y_;
    std::vector<double> diag_;
    double b_ = 0.0;
};

}  // namespace detail

/// Trains with Platt-style SMO. A run that hits `max_passes` returns a usable
/// model with `converged == false`.
template <class Kernel = LinearKernel>
SvmModel train(std::span<const LabeledExample> data, std::size_t dimension, const TrainConfig& cfg = {},
               const TrainObserver* observer = nullptr, const Kernel& kernel = {}) {
    static_assert(Kernel::is_linear, "SvmModel stores primal weights; only linear kernels are supported");
    cfg.validate();
    bool pos = false, neg = false;
    for (const auto& ex : data) {
        if (ex.y != 1 && ex.y != -1) throw PreconditionError("labels must be +1 or -1");
        pos = pos || ex.y == 1;
        neg = neg || ex.y == -1;
        if (ex.x.extent() > dimension)
            throw PreconditionError("dimension mismatch: feature index " + std::to_string(ex.x.extent() - 1) +
                                    " outside dimension " + std::to_string(dimension));
    }
    if (!pos || !neg) throw PreconditionError("training data must contain both classes");
    return detail::SmoSolver<Kernel>(data, dimension, cfg, kernel, observer).run();
}

/// Dimension inferred from the largest feature index.
inline SvmModel train(std::span<const LabeledExample> data, const TrainConfig& cfg = {},
                      const TrainObserver* observer = nullptr) {
    std::size_t dim = 0;
    for (const auto& ex : data) dim = std::max(dim, ex.x.extent());
    return train(data, dim, cfg, observer);
}

inline double decision_value(const SvmModel& m, const SparseVector& x) {
    if (x.extent() > m.dimension)
        throw PreconditionError("input index " + std::to_string(x.extent() - 1) + " exceeds model dimension " +
                                std::to_string(m.dimension));
    return x.dot(m.weights) + m.bias;
}

/// Favor iff the decision value is >= 0; an exact 0 goes to Favor.
inline StanceLabel predict(const SvmModel& m, const SparseVector& x) {
    return decision_value(m, x) >= 0.0 ? StanceLabel::Favor : StanceLabel::Against;
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr std::string_view kModelMagic = "stance-svm-model";
inline constexpr int kModelVersion = 1;

inline std::string serialize_model(const SvmModel& m) {
    std::ostringstream out;
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "dimension " << m.dimension << '\n';
    out << "c " << format_exact(m.c) << '\n';
    out << "bias " << format_exact(m.bias) << '\n';
    out << "converged " << (m.converged ? 1 : 0) << '\n';
    out << "sweeps " << m.sweeps << '\n';
    out << "weights\n";
    for (double w : m.weights) out << format_exact(w) << '\n';
    out << "alphas " << m.alphas.size() << '\n';
    for (double a : m.alphas) out << format_exact(a) << '\n';
    return out.str();
}

inline SvmModel parse_model(std::string_view content) {
    std::istringstream in{std::string(content)};
    std::string line;
    const std::string expected = std::string(kModelMagic) + " " + std::to_string(kModelVersion);
    if (!std::getline(in, line) || line != expected)
        throw DataError("model file: bad header '" + line + "', expected '" + expected + "'");
    SvmModel m;
    const auto field = [&](std::string_view key) {
        if (!std::getline(in, line) || line.rfind(std::string(key) + " ", 0) != 0)
            throw DataError("model file: expected field '" + std::string(key) + "'");
        return line.substr(key.size() + 1);
    };
    const auto number = [&](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') throw DataError("model file: bad number '" + s + "'");
        return v;
    };
    try {
        m.dimension = std::stoul(field("dimension"));
        m.c = number(field("c"));
        m.bias = number(field("bias"));
        m.converged = field("converged") == "1";
        m.sweeps = std::stoul(field("sweeps"));
        if (!std::getline(in, line) || line != "weights") throw DataError("model file: expected 'weights'");
        m.weights.resize(m.dimension);
        for (auto& w : m.weights) {
            if (!std::getline(in, line)) throw DataError("model file: truncated weights");
            w = number(line);
        }
        const std::size_t n_alpha = std::stoul(field("alphas"));
        m.alphas.resize(n_alpha);
        for (auto& a : m.alphas) {
            if (!std::getline(in, line)) throw DataError("model file: truncated alphas");
            a = number(line);
        }
    } catch (const std::logic_error&) {
        throw DataError("model file: malformed count field");
    }
    return m;
}

/// One `sweep,changed_pairs,dual_objective` line per outer-loop sweep.
inline TrainObserver trace_to(std::ostream& out) {
    TrainObserver obs;
    obs.on_sweep = [&out](const SweepRecord& r) {
        out << r.sweep << ',' << r.changed_pairs << ',' << format_exact(r.dual_objective) << '\n';
    };
    return obs;
}

}  // namespace stance
