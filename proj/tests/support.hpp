#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance runner. Everything here is synthetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stance/stance.hpp"

namespace stance::fixtures {

// ---------------------------------------------------------------------------
// Corpora

/// Dual-annotated set with `per_cell` tweets in each (target, label_a) cell and
/// `disagree[t][s]` of them carrying the opposite second label.
inline Dataset dual_annotated_corpus(std::size_t per_cell, const std::size_t (&disagree)[2][2],
                                     std::string tag = "synthetic") {
    std::vector<Tweet> tweets;
    std::size_t n = 0;
    for (auto t : kTargets) {
        for (auto s : kStanceLabels) {
            for (std::size_t i = 0; i < per_cell; ++i) {
                Tweet tw;
                tw.id = "t" + std::to_string(++n);
                tw.text = std::string("synthetic tweet ") + std::to_string(n);
                tw.target = t;
                tw.label_a = s;
                const bool flip = i < disagree[index_of(t)][index_of(s)];
                tw.label_b = flip ? (s == StanceLabel::Favor ? StanceLabel::Against : StanceLabel::Favor) : s;
                tweets.push_back(std::move(tw));
            }
        }
    }
    return Dataset(std::move(tag), std::move(tweets));
}

/// 700 tweets, 175 per cell; 346/350 agree on the first target, 340/350 on
/// the second.
inline Dataset version1_like() {
    const std::size_t disagree[2][2] = {{2, 2}, {2, 8}};
    return dual_annotated_corpus(175, disagree, "version-1-synthetic");
}

/// Declared entity counts by (target, stance, type) for the Version-1 sized
/// fixture: rows are T1 Favor, T1 Against, T2 Favor, T2 Against; columns PER,
/// LOC, ORG.
inline constexpr std::size_t kVersion1NeCounts[4][3] = {
    {12, 17, 207}, {70, 4, 221}, {8, 24, 247}, {69, 18, 277}};

inline Manifest version1_ne_manifest() {
    Manifest m;
    std::size_t per_type[3] = {0, 0, 0}, total = 0;
    for (auto t : kTargets) {
        for (auto s : kStanceLabels) {
            const auto& row = kVersion1NeCounts[index_of(t) * 2 + index_of(s)];
            for (auto e : kEntityTypes) {
                const auto v = row[index_of(e)];
                m.set("ne." + std::string(to_token(t)) + "." + std::string(to_token(s)) + "." +
                          std::string(to_token(e)),
                      std::to_string(v));
                per_type[index_of(e)] += v;
                total += v;
            }
        }
    }
    for (auto e : kEntityTypes) m.set("ne." + std::string(to_token(e)), std::to_string(per_type[index_of(e)]));
    m.set("ne.total", std::to_string(total));
    return m;
}

/// Gold annotations realising kVersion1NeCounts on `ds` (tweet texts are
/// rewritten so every span slices a real name).
struct AnnotatedCorpus {
    Dataset dataset;
    Annotations gold;
};

inline AnnotatedCorpus version1_annotated() {
    const Dataset base = version1_like();
    std::vector<Tweet> tweets(base.tweets().begin(), base.tweets().end());
    Annotations gold;
    const char* names[3] = {"Ali", "Kadıköy", "Galatasaray"};
    for (auto t : kTargets) {
        for (auto s : kStanceLabels) {
            const auto& row = kVersion1NeCounts[index_of(t) * 2 + index_of(s)];
            std::vector<Tweet*> cell;
            for (auto& tw : tweets)
                if (tw.target == t && tw.label_a == s) cell.push_back(&tw);
            std::vector<std::vector<EntityType>> per_tweet(cell.size());
            std::size_t k = 0;
            for (auto e : kEntityTypes)
                for (std::size_t i = 0; i < row[index_of(e)]; ++i) per_tweet[k++ % cell.size()].push_back(e);
            for (std::size_t i = 0; i < cell.size(); ++i) {
                std::string text;
                std::size_t pos = 0;
                for (auto e : per_tweet[i]) {
                    const std::string name = names[index_of(e)];
                    if (!text.empty()) {
                        text += ' ';
                        ++pos;
                    }
                    const auto len = unicode::length(name);
                    gold[cell[i]->id].push_back({pos, pos + len, e, name});
                    text += name;
                    pos += len;
                }
                if (text.empty()) text = "maç";
                cell[i]->text = text;
            }
        }
    }
    return {Dataset(base.version_tag(), std::move(tweets)), std::move(gold)};
}

/// Single-target corpus with class-specific words, shared noise words, and
/// hashtags on Favor tweets only. A fraction of tweets carries no class word,
/// so unigrams alone cannot get everything right while the hashtag flag can.
inline Dataset planted_corpus(std::size_t per_class, double no_signal_fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    std::vector<Tweet> tweets;
    std::size_t n = 0;
    for (auto s : kStanceLabels) {
        const std::string cls = s == StanceLabel::Favor ? "destek" : "karsi";
        const auto blind = static_cast<std::size_t>(std::llround(no_signal_fraction * static_cast<double>(per_class)));
        for (std::size_t i = 0; i < per_class; ++i) {
            std::string text;
            const auto add = [&](const std::string& w) { text += (text.empty() ? "" : " ") + w; };
            for (int j = 0; j < 3; ++j) add("gurultu" + std::to_string(pick(40)));
            if (i >= blind) {
                add(cls + std::to_string(pick(8)));
                if (pick(2)) add(cls + std::to_string(pick(8)));
            }
            if (s == StanceLabel::Favor) add("#etiket" + std::to_string(pick(30)));
            Tweet tw;
            tw.id = "p" + std::to_string(++n);
            tw.text = text;
            tw.target = TargetId::Target1;
            tw.label_a = s;
            tweets.push_back(std::move(tw));
        }
    }
    // Interleave so file order does not encode the label.
    std::shuffle(tweets.begin(), tweets.end(), rng);
    return Dataset("planted-synthetic", std::move(tweets));
}

// ---------------------------------------------------------------------------
// Dual QP oracle

/// Dense instance for the oracle: rows of x, labels +-1.
struct DenseProblem {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    double c = 1.0;

    std::vector<LabeledExample> examples() const {
        std::vector<LabeledExample> out;
        for (std::size_t i = 0; i < x.size(); ++i) out.push_back({SparseVector::from_dense(x[i]), y[i]});
        return out;
    }
    std::size_t dimension() const { return x.empty() ? 0 : x[0].size(); }
};

inline double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Q_ij = y_i y_j <x_i, x_j>.
inline std::vector<std::vector<double>> q_matrix(const DenseProblem& p) {
    const auto n = p.x.size();
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q[i][j] = p.y[i] * p.y[j] * dense_dot(p.x[i], p.x[j]);
    return q;
}

inline double oracle_objective(const std::vector<std::vector<double>>& q, const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * q[i][j];
    }
    return lin - 0.5 * quad;
}

/// Euclidean projection onto {0 <= a <= C, sum y_i a_i = 0}: a_i = clip(v_i -
/// lambda y_i), with lambda found by bisection on the monotone constraint.
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y, double c) {
    const auto at = [&](double lambda, std::vector<double>& out) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out[i] = std::clamp(v[i] - lambda * y[i], 0.0, c);
            s += y[i] * out[i];
        }
        return s;  // non-increasing in lambda
    };
    std::vector<double> a(v.size());
    double lo = -1.0, hi = 1.0;
    while (at(lo, a) < 0.0) lo *= 2.0;
    while (at(hi, a) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (at(mid, a) > 0.0) lo = mid;
        else hi = mid;
    }
    at(0.5 * (lo + hi), a);
    return a;
}

/// Accelerated projected gradient ascent on the dual, stopped at a fixed
/// point of the projected step. Returns the best objective value seen.
inline double oracle_dual_optimum(const DenseProblem& p, int iterations = 200000) {
    const auto q = q_matrix(p);
    const auto n = q.size();
    double lip = 0.0;  // Frobenius norm bounds the largest eigenvalue
    for (const auto& row : q)
        for (double v : row) lip += v * v;
    lip = std::max(std::sqrt(lip), 1e-12);
    std::vector<double> a(n, 0.0), prev = a, z = a, grad(n);
    double t = 1.0, best = 0.0;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double g = 1.0;
            for (std::size_t j = 0; j < n; ++j) g -= q[i][j] * z[j];
            grad[i] = z[i] + g / lip;
        }
        prev = a;
        a = project(grad, p.y, p.c);
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(a[i] - prev[i]));
        const double obj = oracle_objective(q, a);
        if (moved < 1e-15 * std::max(1.0, p.c) && it > 100) {
            // Fixed point of the projected step: a is optimal.
            best = std::max(best, obj);
            break;
        }
        if (obj < best - 1e-15) t = 1.0;  // restart on non-monotone step
        best = std::max(best, obj);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
        t = t_next;
    }
    return best;
}

/// Largest KKT violation of (alphas, bias) recomputed from dense data.
inline double kkt_violation(const DenseProblem& p, const std::vector<double>& alphas, double bias) {
    const auto n = p.x.size();
    std::vector<double> w(p.dimension(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < w.size(); ++d) w[d] += alphas[i] * p.y[i] * p.x[i][d];
    double worst = 0.0;
    const double eps = 1e-9 * p.c;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = p.y[i] * (dense_dot(w, p.x[i]) + bias);
        double v = 0.0;
        if (alphas[i] <= eps) v = std::max(0.0, 1.0 - m);
        else if (alphas[i] >= p.c - eps) v = std::max(0.0, m - 1.0);
        else v = std::abs(m - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

/// Random instance with both classes present.
inline DenseProblem random_problem(std::mt19937_64& rng, std::size_t max_points = 8, std::size_t max_dims = 4) {
    std::uniform_int_distribution<std::size_t> np(2, max_points), nd(1, max_dims);
    std::uniform_int_distribution<int> coord(-4, 4);
    const double cs[] = {0.1, 1.0, 10.0};
    DenseProblem p;
    const auto n = np(rng), d = nd(rng);
    p.c = cs[rng() % 3];
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = 0.5 * coord(rng);
        p.x.push_back(row);
        p.y.push_back(i == 0 ? 1 : i == 1 ? -1 : (rng() % 2 ? 1 : -1));
    }
    return p;
}

}  // namespace stance::fixtures
