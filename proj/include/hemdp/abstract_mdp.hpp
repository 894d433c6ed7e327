#pragma once

// Generalized Bellman validity checks on small abstract MDP models.
//
// A model is a substochastic transition matrix P (row i: probabilities of the
// successors of state i, summing to <= 1; the missing mass is absorption) and
// a per-state cost vector C. The model is valid when V = C + P V has a unique
// fixed point, which holds whenever P^i -> 0. Composing a model with itself n
// times gives the n-step model (C_n = sum_{i<n} P^i C, P_n = P^n), and every
// such composition must keep the same fixed point; the backup iteration
// V <- C + P V must converge to it. These identities justify stitching
// block-level solutions in place of single-step value iteration, and the
// checks here exercise them on randomized models rather than the building
// MDP so the algebra is tested free of ODE noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hemdp/errors.hpp"

namespace hemdp {

class AbstractMdpModel {
public:
    AbstractMdpModel(int n, std::vector<double> transition, std::vector<double> cost)
        : n_(n), p_(std::move(transition)), c_(std::move(cost)) {
        if (n_ < 1 || p_.size() != static_cast<std::size_t>(n_) * n_ ||
            c_.size() != static_cast<std::size_t>(n_))
            throw std::invalid_argument("AbstractMdpModel: inconsistent dimensions");
        for (int i = 0; i < n_; ++i) {
            double row = 0.0;
            for (int j = 0; j < n_; ++j) {
                if (p_[idx(i, j)] < 0.0)
                    throw ModelValidityError("transition probabilities must be non-negative");
                row += p_[idx(i, j)];
            }
            if (row > 1.0 + 1e-12)
                throw ModelValidityError("transition rows must sum to at most 1");
        }
    }

    int n_states() const { return n_; }
    const std::vector<double>& transition() const { return p_; }
    const std::vector<double>& cost() const { return c_; }
    double& cost_at(int i) { return c_[i]; }

    // Substochastic model with row sums bounded away from 1, so the spectral
    // condition holds by construction.
    static AbstractMdpModel random(std::mt19937_64& rng, int max_states = 8) {
        std::uniform_int_distribution<int> n_dist(2, max_states);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int n = n_dist(rng);
        std::vector<double> p(static_cast<std::size_t>(n) * n);
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                p[static_cast<std::size_t>(i) * n + j] = u(rng);
                row += p[static_cast<std::size_t>(i) * n + j];
            }
            const double target = 0.2 + 0.7 * u(rng); // row sum in [0.2, 0.9]
            for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(i) * n + j] *= target / row;
            c[i] = -5.0 + 10.0 * u(rng);
        }
        return AbstractMdpModel(n, std::move(p), std::move(c));
    }

    // Model of executing `this` for one step and then `next`:
    // C' = C + P C_next, P' = P P_next.
    AbstractMdpModel compose(const AbstractMdpModel& next) const {
        if (next.n_ != n_) throw std::invalid_argument("compose: dimension mismatch");
        std::vector<double> p2(static_cast<std::size_t>(n_) * n_, 0.0);
        std::vector<double> c2(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            for (int k = 0; k < n_; ++k) {
                const double pik = p_[idx(i, k)];
                if (pik == 0.0) continue;
                c2[i] += pik * next.c_[k];
                for (int j = 0; j < n_; ++j) p2[idx(i, j)] += pik * next.p_[idx(k, j)];
            }
            c2[i] += c_[i];
        }
        return AbstractMdpModel(n_, std::move(p2), std::move(c2));
    }

    // Unique fixed point of V = C + P V via direct linear solve of (I - P) V = C.
    // Throws ModelValidityError when I - P is (numerically) singular, i.e. the
    // spectral condition is violated.
    std::vector<double> solve_value() const {
        const int n = n_;
        std::vector<double> a(static_cast<std::size_t>(n) * n);
        std::vector<double> b = c_;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[idx(i, j)] = (i == j ? 1.0 : 0.0) - p_[idx(i, j)];
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::fabs(a[idx(r, col)]) > std::fabs(a[idx(piv, col)])) piv = r;
            if (std::fabs(a[idx(piv, col)]) < 1e-12)
                throw ModelValidityError("I - P is singular; spectral condition violated");
            if (piv != col) {
                for (int c = 0; c < n; ++c) std::swap(a[idx(piv, c)], a[idx(col, c)]);
                std::swap(b[piv], b[col]);
            }
            for (int r = col + 1; r < n; ++r) {
                const double f = a[idx(r, col)] / a[idx(col, col)];
                if (f == 0.0) continue;
                for (int c = col; c < n; ++c) a[idx(r, c)] -= f * a[idx(col, c)];
                b[r] -= f * b[col];
            }
        }
        std::vector<double> v(n);
        for (int r = n - 1; r >= 0; --r) {
            double acc = b[r];
            for (int c = r + 1; c < n; ++c) acc -= a[idx(r, c)] * v[c];
            v[r] = acc / a[idx(r, r)];
        }
        return v;
    }

    // Residual of the generalized Bellman equation: ||V - C - P V||_inf.
    double bellman_residual(const std::vector<double>& v) const {
        if (v.size() != static_cast<std::size_t>(n_))
            throw std::invalid_argument("bellman_residual: dimension mismatch");
        double worst = 0.0;
        for (int i = 0; i < n_; ++i) {
            double pv = 0.0;
            for (int j = 0; j < n_; ++j) pv += p_[idx(i, j)] * v[j];
            worst = std::max(worst, std::fabs(v[i] - c_[i] - pv));
        }
        return worst;
    }

    // Backup iteration V <- C + P V from zero. Returns the iterate and the
    // number of sweeps used to reach max-norm change <= tol.
    std::pair<std::vector<double>, int> iterate_backup(double tol, int max_iters) const {
        std::vector<double> v(n_, 0.0), next(n_);
        for (int it = 1; it <= max_iters; ++it) {
            double delta = 0.0;
            for (int i = 0; i < n_; ++i) {
                double pv = 0.0;
                for (int j = 0; j < n_; ++j) pv += p_[idx(i, j)] * v[j];
                next[i] = c_[i] + pv;
                delta = std::max(delta, std::fabs(next[i] - v[i]));
            }
            v.swap(next);
            if (delta <= tol) return {v, it};
        }
        return {v, max_iters};
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_;
    std::vector<double> p_;
    std::vector<double> c_;
};

// Sequential composition m_0 then m_1 then ... then m_last.
inline AbstractMdpModel compose_models(const std::vector<AbstractMdpModel>& models) {
    if (models.empty()) throw std::invalid_argument("compose_models: empty sequence");
    AbstractMdpModel acc = models.front();
    for (std::size_t i = 1; i < models.size(); ++i) acc = acc.compose(models[i]);
    return acc;
}

inline double check_generalized_bellman(const AbstractMdpModel& model,
                                        const std::vector<double>& v) {
    return model.bellman_residual(v);
}

// One randomized validity sweep; returns the name of the first failed check,
// or an empty string when everything holds.
struct BellmanSuiteConfig {
    int model_count = 1000;
    int max_states = 8;
    std::uint64_t seed = 20240101;
    double residual_tol = 1e-9;
    double backup_tol = 1e-6;
    int backup_max_iters = 10000;
    bool inject_fault = false; // perturb one composed cost vector (negative control)
};

struct BellmanSuiteResult {
    bool passed = true;
    std::string failed_check;
    double worst_residual = 0.0;
    int worst_backup_iters = 0;
};

inline BellmanSuiteResult run_bellman_suite(const BellmanSuiteConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    BellmanSuiteResult res;
    for (int m = 0; m < cfg.model_count; ++m) {
        const AbstractMdpModel model = AbstractMdpModel::random(rng, cfg.max_states);
        const std::vector<double> v = model.solve_value();
        const double r0 = model.bellman_residual(v);
        res.worst_residual = std::max(res.worst_residual, r0);
        if (r0 > cfg.residual_tol) {
            res.passed = false;
            res.failed_check = "single-model residual (model " + std::to_string(m) + ")";
            return res;
        }
        AbstractMdpModel composed = model;
        for (int fold = 2; fold <= 5; ++fold) {
            composed = composed.compose(model);
            if (cfg.inject_fault && m == 0 && fold == 3) composed.cost_at(0) += 1e-3;
            const double r = composed.bellman_residual(v);
            res.worst_residual = std::max(res.worst_residual, r);
            if (r > cfg.residual_tol) {
                res.passed = false;
                res.failed_check = std::to_string(fold) + "-fold composition residual (model " +
                                   std::to_string(m) + ")";
                return res;
            }
        }
        const auto [v_iter, iters] = model.iterate_backup(cfg.backup_tol * 0.01, cfg.backup_max_iters);
        res.worst_backup_iters = std::max(res.worst_backup_iters, iters);
        double diff = 0.0;
        for (int i = 0; i < model.n_states(); ++i) diff = std::max(diff, std::fabs(v_iter[i] - v[i]));
        if (diff > cfg.backup_tol || iters >= cfg.backup_max_iters) {
            res.passed = false;
            res.failed_check = "backup-iteration convergence (model " + std::to_string(m) + ")";
            return res;
        }
    }
    return res;
}

} // namespace hemdp
