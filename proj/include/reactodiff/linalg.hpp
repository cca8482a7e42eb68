#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <utility>
#include <vector>

#include "reactodiff/errors.hpp"

namespace reactodiff {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for desk-scale grids (a few hundred nodes);
/// everything here is O(n^3) at worst and deliberately simple.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec& data() { return data_; }
    const Vec& data() const { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

inline Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matvec: size mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

inline Vec matvec_transposed(const Matrix& a, const Vec& x) {
    if (a.rows() != x.size()) throw DimensionMismatch("matvec_transposed: size mismatch");
    Vec y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * x[i];
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: size mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix operator*(const Matrix& a, double s) {
    Matrix c = a;
    for (auto& v : c.data()) v *= s;
    return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

inline double inf_norm(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
        m = std::max(m, row);
    }
    return m;
}

inline double frobenius_norm(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    return std::sqrt(acc);
}

/// LU factorization with partial pivoting.
class DenseLU {
public:
    static DenseLU factor(Matrix m) {
        const std::size_t n = m.rows();
        if (n != m.cols()) throw DimensionMismatch("DenseLU: matrix not square");
        DenseLU f;
        f.piv_.resize(n);
        for (std::size_t i = 0; i < n; ++i) f.piv_[i] = static_cast<int>(i);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(m(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(m(i, k));
                if (v > best) { best = v; p = i; }
            }
            if (best == 0.0) throw SingularMatrix("DenseLU: zero pivot");
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
                std::swap(f.piv_[k], f.piv_[p]);
            }
            const double inv = 1.0 / m(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double l = m(i, k) * inv;
                m(i, k) = l;
                if (l == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
            }
        }
        f.lu_ = std::move(m);
        return f;
    }

    std::size_t size() const { return lu_.rows(); }

    void solve_in_place(Vec& b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("DenseLU::solve size mismatch");
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[static_cast<std::size_t>(piv_[i])];
        for (std::size_t i = 1; i < n; ++i) {
            double acc = x[i];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * x[j];
            x[ii] = acc / lu_(ii, ii);
        }
        b = std::move(x);
    }

    /// Solves A^T x = b using the same factorization (PA = LU, so A^T = U^T L^T P).
    void solve_transposed_in_place(Vec& b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("DenseLU::solve_transposed size mismatch");
        Vec x = b;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = x[i];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(j, i) * x[j];
            x[i] = acc / lu_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(j, ii) * x[j];
            x[ii] = acc;
        }
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) y[static_cast<std::size_t>(piv_[i])] = x[i];
        b = std::move(y);
    }

private:
    Matrix lu_;
    std::vector<int> piv_;
};

/// Thomas factorization of a tridiagonal matrix. No pivoting; the stepping
/// matrices here are strictly diagonally dominant by construction.
class TridiagLU {
public:
    /// sub has n-1 entries (row i, column i-1), diag n, sup n-1 (row i, column i+1).
    static TridiagLU factor(Vec sub, Vec diag, Vec sup) {
        const std::size_t n = diag.size();
        if (sub.size() + 1 != n || sup.size() + 1 != n)
            throw DimensionMismatch("TridiagLU: band sizes inconsistent");
        TridiagLU f;
        f.l_.assign(n > 0 ? n - 1 : 0, 0.0);
        f.d_ = std::move(diag);
        f.u_ = std::move(sup);
        for (std::size_t i = 1; i < n; ++i) {
            if (f.d_[i - 1] == 0.0) throw SingularMatrix("TridiagLU: zero pivot");
            const double w = sub[i - 1] / f.d_[i - 1];
            f.l_[i - 1] = w;
            f.d_[i] -= w * f.u_[i - 1];
        }
        if (n > 0 && f.d_[n - 1] == 0.0) throw SingularMatrix("TridiagLU: zero pivot");
        return f;
    }

    std::size_t size() const { return d_.size(); }

    void solve_in_place(Vec& b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("TridiagLU::solve size mismatch");
        for (std::size_t i = 1; i < n; ++i) b[i] -= l_[i - 1] * b[i - 1];
        b[n - 1] /= d_[n - 1];
        for (std::size_t ii = n - 1; ii-- > 0;) b[ii] = (b[ii] - u_[ii] * b[ii + 1]) / d_[ii];
    }

    /// Solves A^T x = b: A = LU so A^T = U^T L^T.
    void solve_transposed_in_place(Vec& b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("TridiagLU::solve_transposed size mismatch");
        b[0] /= d_[0];
        for (std::size_t i = 1; i < n; ++i) b[i] = (b[i] - u_[i - 1] * b[i - 1]) / d_[i];
        for (std::size_t ii = n - 1; ii-- > 0;) b[ii] -= l_[ii] * b[ii + 1];
    }

private:
    Vec l_, d_, u_;
};

struct SymmetricEigen {
    Vec values;     // ascending
    Matrix vectors; // columns are eigenvectors
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
inline SymmetricEigen sym_eigen(Matrix a, bool want_vectors = true, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw DimensionMismatch("sym_eigen: matrix not square");
    Matrix v = want_vectors ? Matrix::identity(n) : Matrix();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-30 * (1.0 + frobenius_norm(a))) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                if (want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    SymmetricEigen out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
    // sort ascending, permuting vectors along
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (out.values[idx[j]] < out.values[idx[i]]) std::swap(idx[i], idx[j]);
    Vec vals(n);
    Matrix vecs = want_vectors ? Matrix(n, n) : Matrix();
    for (std::size_t i = 0; i < n; ++i) {
        vals[i] = out.values[idx[i]];
        if (want_vectors)
            for (std::size_t k = 0; k < n; ++k) vecs(k, i) = v(k, idx[i]);
    }
    out.values = std::move(vals);
    out.vectors = std::move(vecs);
    return out;
}

/// Matrix exponential by scaling-and-squaring with a [6/6] Padé approximant.
inline Matrix expm(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw DimensionMismatch("expm: matrix not square");
    const double norm = inf_norm(a);
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const double scale = std::ldexp(1.0, -s);
    Matrix b = a * scale;

    // p(x) = sum c_k x^k, exp(x) ~ p(x)/p(-x)
    static const double c[7] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0,
                                1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    Matrix b2 = matmul(b, b);
    Matrix b4 = matmul(b2, b2);
    Matrix b6 = matmul(b4, b2);
    Matrix even = Matrix::identity(n) * c[0] + b2 * c[2] + b4 * c[4] + b6 * c[6];
    Matrix odd_core = Matrix::identity(n) * c[1] + b2 * c[3] + b4 * c[5];
    Matrix odd = matmul(b, odd_core);
    Matrix num = even + odd;  // p(B)
    Matrix den = even - odd;  // p(-B)

    DenseLU lu = DenseLU::factor(std::move(den));
    Matrix r(n, n);
    Vec col(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = num(i, j);
        lu.solve_in_place(col);
        for (std::size_t i = 0; i < n; ++i) r(i, j) = col[i];
    }
    for (int k = 0; k < s; ++k) r = matmul(r, r);
    return r;
}

/// Order-independent reduction: pairwise summation over [first, last).
inline double pairwise_sum(const double* first, std::size_t count) {
    if (count <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) acc += first[i];
        return acc;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(first, half) + pairwise_sum(first + half, count - half);
}

inline double pairwise_sum(const Vec& v) { return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()); }

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const Vec& xs, const Vec& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw DimensionMismatch("fit_line: need >= 2 matching points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

/// Log-log slope of ys against xs (both strictly positive).
inline double fit_loglog_slope(const Vec& xs, const Vec& ys) {
    Vec lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return fit_line(lx, ly).slope;
}

} // namespace reactodiff
