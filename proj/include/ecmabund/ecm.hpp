#pragma once

// Moments of count vectors for N iid individuals moving through
// time-evolving exclusive categories. All space-time count models in this
// library reduce to these identities.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace ecmabund {

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// probs[k][l] = P(individual in category l at check time k). Entries for a
// fixed k need not sum to one (the complement category is implicit).
// pair_prob(k, kp, l, lp) = P(category l at time k and category lp at time kp),
// called only for k != kp.
//
// Mean: N p_l^(k).
// Covariance: N (p_{l,lp}^(k,kp) - p_l^(k) p_lp^(kp)) across times,
//             N (delta_{l,lp} p_l^(k) - p_l^(k) p_lp^(k)) within a time.
template <class PairFn>
Moments ecm_moments(double n_individuals, const std::vector<std::vector<double>>& probs, PairFn&& pair_prob) {
    const int K = static_cast<int>(probs.size());
    const int L = K > 0 ? static_cast<int>(probs[0].size()) : 0;
    const int d = K * L;
    Moments m;
    m.mean.resize(d);
    m.cov.resize(d, d);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l) m.mean[k * L + l] = n_individuals * probs[k][l];
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            const int i = k * L + l;
            for (int kp = k; kp < K; ++kp) {
                const int l0 = (kp == k) ? l : 0;
                for (int lp = l0; lp < L; ++lp) {
                    const int j = kp * L + lp;
                    double pj;
                    if (kp == k)
                        pj = (l == lp) ? probs[k][l] : 0.0;
                    else
                        pj = pair_prob(k, kp, l, lp);
                    const double c = n_individuals * (pj - probs[k][l] * probs[kp][lp]);
                    m.cov(i, j) = c;
                    m.cov(j, i) = c;
                }
            }
        }
    }
    return m;
}

// Dense table of full-path probabilities over a small category scheme:
// probs[(l_1, ..., l_n)] = P(category l_k at time k for all k). Only
// instantiated for small schemes; the model modules work with one- and
// two-time laws directly.
class PathProbabilityTable {
  public:
    PathProbabilityTable(std::vector<int> m, std::vector<double> probs) : m_(std::move(m)), probs_(std::move(probs)) {
        std::size_t sz = 1;
        for (int mk : m_) {
            if (mk < 1) throw std::invalid_argument("PathProbabilityTable: category counts must be >= 1");
            sz *= static_cast<std::size_t>(mk);
        }
        if (sz != probs_.size() || sz > 1000000) throw std::invalid_argument("PathProbabilityTable: bad table size");
        double total = 0.0;
        for (double p : probs_) {
            if (p < -1e-12) throw std::invalid_argument("PathProbabilityTable: negative probability");
            total += p;
        }
        if (std::fabs(total - 1.0) > 1e-10) throw std::invalid_argument("PathProbabilityTable: probabilities must sum to 1");
    }

    int n_times() const { return static_cast<int>(m_.size()); }
    int n_categories(int k) const { return m_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& probs() const { return probs_; }

    // stride of axis k in the flat layout (last axis fastest)
    std::size_t stride(int k) const {
        std::size_t s = 1;
        for (int j = n_times() - 1; j > k; --j) s *= static_cast<std::size_t>(m_[static_cast<std::size_t>(j)]);
        return s;
    }

    std::vector<double> one_time_marginal(int k) const {
        std::vector<double> p(static_cast<std::size_t>(m_[static_cast<std::size_t>(k)]), 0.0);
        const std::size_t st = stride(k);
        for (std::size_t i = 0; i < probs_.size(); ++i) p[(i / st) % p.size()] += probs_[i];
        return p;
    }

    // joint law of (category at k, category at kp), row = time k
    std::vector<std::vector<double>> pair_marginal(int k, int kp) const {
        if (k == kp) throw std::invalid_argument("pair_marginal: distinct times required");
        const std::size_t sk = stride(k), sp = stride(kp);
        const std::size_t mk = static_cast<std::size_t>(m_[static_cast<std::size_t>(k)]);
        const std::size_t mp = static_cast<std::size_t>(m_[static_cast<std::size_t>(kp)]);
        std::vector<std::vector<double>> out(mk, std::vector<double>(mp, 0.0));
        for (std::size_t i = 0; i < probs_.size(); ++i) out[(i / sk) % mk][(i / sp) % mp] += probs_[i];
        return out;
    }

    // Row-stochastic conditional P(category lp at kp | category l at k).
    // Rows with zero marginal mass are flagged instead of fabricated.
    std::vector<std::vector<double>> two_time_conditional(int k, int kp, std::vector<bool>* zero_rows = nullptr) const {
        auto joint = pair_marginal(k, kp);
        const auto marg = one_time_marginal(k);
        if (zero_rows) zero_rows->assign(marg.size(), false);
        for (std::size_t l = 0; l < marg.size(); ++l) {
            if (marg[l] <= 0.0) {
                if (zero_rows) (*zero_rows)[l] = true;
                continue;
            }
            for (double& v : joint[l]) v /= marg[l];
        }
        return joint;
    }

    // Characteristic function of the count arrangement for N individuals:
    // { sum over paths e^{i(xi_{1,l1} + ... + xi_{n,ln})} p_path }^N.
    // xi is laid out time-major: xi[k][l].
    std::complex<double> char_fn(double n_individuals, const std::vector<std::vector<double>>& xi) const {
        if (static_cast<int>(xi.size()) != n_times()) throw std::invalid_argument("char_fn: xi shape mismatch");
        for (int k = 0; k < n_times(); ++k)
            if (static_cast<int>(xi[static_cast<std::size_t>(k)].size()) != m_[static_cast<std::size_t>(k)])
                throw std::invalid_argument("char_fn: xi shape mismatch");
        std::complex<double> base = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            double phase = 0.0;
            for (int k = 0; k < n_times(); ++k)
                phase += xi[static_cast<std::size_t>(k)][(i / stride(k)) % static_cast<std::size_t>(m_[static_cast<std::size_t>(k)])];
            base += probs_[i] * std::exp(std::complex<double>(0.0, phase));
        }
        return std::pow(base, n_individuals);
    }

    // Mean and covariance over the concatenated (time, category) axes.
    Moments moments(double n_individuals) const {
        std::vector<std::vector<double>> probs_k(static_cast<std::size_t>(n_times()));
        for (int k = 0; k < n_times(); ++k) probs_k[static_cast<std::size_t>(k)] = one_time_marginal(k);
        // offsets differ per time (category counts vary), so assemble directly
        std::vector<int> off(static_cast<std::size_t>(n_times()) + 1, 0);
        for (int k = 0; k < n_times(); ++k) off[static_cast<std::size_t>(k) + 1] = off[static_cast<std::size_t>(k)] + m_[static_cast<std::size_t>(k)];
        const int d = off.back();
        Moments mo;
        mo.mean.resize(d);
        mo.cov.resize(d, d);
        for (int k = 0; k < n_times(); ++k)
            for (int l = 0; l < m_[static_cast<std::size_t>(k)]; ++l)
                mo.mean[off[static_cast<std::size_t>(k)] + l] = n_individuals * probs_k[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        for (int k = 0; k < n_times(); ++k) {
            for (int kp = k; kp < n_times(); ++kp) {
                std::vector<std::vector<double>> joint;
                if (kp != k) joint = pair_marginal(k, kp);
                for (int l = 0; l < m_[static_cast<std::size_t>(k)]; ++l)
                    for (int lp = 0; lp < m_[static_cast<std::size_t>(kp)]; ++lp) {
                        const double pk = probs_k[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
                        const double pkp = probs_k[static_cast<std::size_t>(kp)][static_cast<std::size_t>(lp)];
                        double pj;
                        if (kp == k)
                            pj = (l == lp) ? pk : 0.0;
                        else
                            pj = joint[static_cast<std::size_t>(l)][static_cast<std::size_t>(lp)];
                        const int i = off[static_cast<std::size_t>(k)] + l, j = off[static_cast<std::size_t>(kp)] + lp;
                        const double c = n_individuals * (pj - pk * pkp);
                        mo.cov(i, j) = c;
                        mo.cov(j, i) = c;
                    }
            }
        }
        return mo;
    }

    // Exact sampling: N iid full paths, aggregated to counts[k][l].
    std::vector<std::vector<std::uint64_t>> sample_arrangement(Rng& rng, std::uint64_t n_individuals) const {
        std::vector<double> cdf(probs_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            acc += probs_[i];
            cdf[i] = acc;
        }
        std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(n_times()));
        for (int k = 0; k < n_times(); ++k) counts[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(m_[static_cast<std::size_t>(k)]), 0);
        for (std::uint64_t j = 0; j < n_individuals; ++j) {
            const std::size_t i = rng.sample_cdf(cdf);
            for (int k = 0; k < n_times(); ++k)
                ++counts[static_cast<std::size_t>(k)][(i / stride(k)) % static_cast<std::size_t>(m_[static_cast<std::size_t>(k)])];
        }
        return counts;
    }

  private:
    std::vector<int> m_;
    std::vector<double> probs_;
};

} // namespace ecmabund
