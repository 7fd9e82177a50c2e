#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

// Dense complex matrices for the handful of small (n <= 8) objects this
// library manipulates. Dimensions are tiny and fixed by physics, so there is
// no sparsity or expression machinery, just plain loops.

namespace nuosc {

using cxd = std::complex<double>;

class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, cxd(0.0, 0.0)) {
        if (n < 1) throw std::invalid_argument("CMatrix dimension must be >= 1");
    }

    static CMatrix identity(int n) {
        CMatrix m(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }

    cxd& at(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
    const cxd& at(int r, int c) const { return a_[static_cast<std::size_t>(r) * n_ + c]; }

    CMatrix operator*(const CMatrix& o) const {
        require_same_dim(o);
        CMatrix out(n_);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const cxd v = at(i, k);
                if (v == cxd(0.0, 0.0)) continue;
                for (int j = 0; j < n_; ++j) out.at(i, j) += v * o.at(k, j);
            }
        return out;
    }

    CMatrix operator+(const CMatrix& o) const {
        require_same_dim(o);
        CMatrix out(n_);
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + o.a_[i];
        return out;
    }

    CMatrix scaled(cxd factor) const {
        CMatrix out(n_);
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * factor;
        return out;
    }

    CMatrix dagger() const {
        CMatrix out(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) out.at(i, j) = std::conj(at(j, i));
        return out;
    }

    double max_abs_diff(const CMatrix& o) const {
        require_same_dim(o);
        double m = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
        return m;
    }

    // Largest |entry| of A^dagger A - I; zero for exactly unitary A.
    double unitarity_defect() const {
        const CMatrix p = dagger() * (*this);
        double m = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                m = std::max(m, std::abs(p.at(i, j) - (i == j ? cxd(1.0, 0.0) : cxd(0.0, 0.0))));
        return m;
    }

    double hermiticity_defect() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m = std::max(m, std::abs(at(i, j) - std::conj(at(j, i))));
        return m;
    }

private:
    void require_same_dim(const CMatrix& o) const {
        if (o.n_ != n_) throw std::invalid_argument("CMatrix dimension mismatch");
    }

    int n_ = 0;
    std::vector<cxd> a_;
};

}  // namespace nuosc
