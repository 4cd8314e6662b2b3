#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace zk {

// Composite 8-point Gauss-Legendre rule on [0, t_max] split into
// uniform panels. Panel width is chosen against the e^{-rate*t}
// envelope of the damped-wave integrands.
class CompositeGauss {
public:
    CompositeGauss(double t_max, int panels) {
        // 8-point Gauss-Legendre abscissae/weights on [-1, 1]
        static const double xg[4] = {0.1834346424956498, 0.5255324099163290,
                                     0.7966664774136267, 0.9602898564975363};
        static const double wg[4] = {0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
        const double h = t_max / panels;
        nodes_.reserve(8 * panels);
        weights_.reserve(8 * panels);
        panel_edges_.reserve(panels + 1);
        for (int p = 0; p <= panels; ++p) panel_edges_.push_back(p * h);
        for (int p = 0; p < panels; ++p) {
            const double c = (p + 0.5) * h;
            const double s = 0.5 * h;
            for (int i = 3; i >= 0; --i) {
                nodes_.push_back(c - s * xg[i]);
                weights_.push_back(s * wg[i]);
            }
            for (int i = 0; i < 4; ++i) {
                nodes_.push_back(c + s * xg[i]);
                weights_.push_back(s * wg[i]);
            }
        }
    }

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }
    double t_max() const { return panel_edges_.back(); }

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            acc += weights_[i] * f(nodes_[i]);
        return acc;
    }

    // Suffix integrals \int_{t_i}^{t_max} f ds evaluated at every node t_i,
    // reusing the node values plus per-node partial-panel corrections.
    template <class F>
    std::vector<double> suffix_integrals(F&& f) const {
        const std::size_t n = nodes_.size();
        const std::size_t panels = panel_edges_.size() - 1;
        // full-panel integrals
        std::vector<double> panel_int(panels, 0.0);
        for (std::size_t p = 0; p < panels; ++p)
            for (std::size_t i = 0; i < 8; ++i)
                panel_int[p] += weights_[8 * p + i] * f(nodes_[8 * p + i]);
        // suffix over whole panels
        std::vector<double> panel_suffix(panels + 1, 0.0);
        for (std::size_t p = panels; p-- > 0;)
            panel_suffix[p] = panel_suffix[p + 1] + panel_int[p];
        // per node: local GL on [t_i, panel_end] + suffix of later panels
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t p = i / 8;
            out[i] = gauss8(f, nodes_[i], panel_edges_[p + 1]) + panel_suffix[p + 1];
        }
        return out;
    }

    template <class F>
    static double gauss8(F&& f, double a, double b) {
        static const double xg[4] = {0.1834346424956498, 0.5255324099163290,
                                     0.7966664774136267, 0.9602898564975363};
        static const double wg[4] = {0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
        const double c = 0.5 * (a + b), s = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < 4; ++i)
            acc += wg[i] * (f(c - s * xg[i]) + f(c + s * xg[i]));
        return s * acc;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> panel_edges_;
};

} // namespace zk
