#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace cnslab {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Zero test: exact for rationals, |x| <= tol for doubles.
inline bool is_zero(double x, double tol) { return std::abs(x) <= tol; }
inline bool is_zero(const Rational& x, double) { return x == 0; }

template <class T>
int sign_of(const T& x, double tol = 0.0) {
    if (is_zero(x, tol)) return 0;
    return x > 0 ? 1 : -1;
}

inline double abs_value(double x) { return std::abs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

/**
 * @brief Parse "n/d", an integer, or a plain decimal such as "-0.125" or "1e-3" exactly.
 */
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw InvalidInput("empty rational literal");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw InvalidInput("zero denominator in '" + text + "'");
        return num / den;
    }

    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');
    using boost::multiprecision::cpp_int;
    cpp_int mant = 0;
    int frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '.') {
            if (seen_dot) throw InvalidInput("bad number '" + text + "'");
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            mant = mant * 10 + (ch - '0');
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw InvalidInput("bad number '" + text + "'");
    long exp10 = -frac_digits;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw InvalidInput("bad number '" + text + "'");
        try {
            std::size_t used = 0;
            exp10 += std::stol(s.substr(i + 1), &used);
            if (used != s.size() - i - 1) throw InvalidInput("bad exponent in '" + text + "'");
        } catch (const std::logic_error&) {
            throw InvalidInput("bad exponent in '" + text + "'");
        }
    }
    if (exp10 > 4000 || exp10 < -4000) throw InvalidInput("exponent out of range in '" + text + "'");
    cpp_int scale = 1;
    for (long k = 0; k < std::labs(exp10); ++k) scale *= 10;
    Rational out = exp10 >= 0 ? Rational(mant * scale) : Rational(mant, scale);
    return neg ? Rational(-out) : out;
}

inline std::string rational_to_string(const Rational& q) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

template <class T>
using Vec3 = std::array<T, 3>;

/// Dense 3x3 matrix over a field T (double or Rational), row-major.
template <class T>
struct Mat3 {
    std::array<T, 9> a{};

    T& operator()(int i, int j) { return a[3 * i + j]; }
    const T& operator()(int i, int j) const { return a[3 * i + j]; }

    static Mat3 zero() {
        Mat3 m;
        for (auto& x : m.a) x = T(0);
        return m;
    }
    static Mat3 identity() {
        Mat3 m = zero();
        m(0, 0) = m(1, 1) = m(2, 2) = T(1);
        return m;
    }
    static Mat3 from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        Mat3 m = zero();
        int i = 0;
        for (auto& row : rows) {
            int j = 0;
            for (auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }
    static Mat3 outer(const Vec3<T>& u, const Vec3<T>& v) {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = u[i] * v[j];
        return m;
    }

    Vec3<T> col(int j) const { return {(*this)(0, j), (*this)(1, j), (*this)(2, j)}; }
    Vec3<T> row(int i) const { return {(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}; }

    T trace() const { return (*this)(0, 0) + (*this)(1, 1) + (*this)(2, 2); }

    T det() const {
        const Mat3& m = *this;
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }

    Mat3 transpose() const {
        Mat3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
        return t;
    }

    friend Mat3 operator*(const Mat3& x, const Mat3& y) {
        Mat3 z = zero();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                for (int j = 0; j < 3; ++j) z(i, j) += x(i, k) * y(k, j);
        return z;
    }
    friend Vec3<T> operator*(const Mat3& x, const Vec3<T>& v) {
        Vec3<T> out{};
        for (int i = 0; i < 3; ++i) out[i] = x(i, 0) * v[0] + x(i, 1) * v[1] + x(i, 2) * v[2];
        return out;
    }
    friend Mat3 operator*(const T& s, const Mat3& x) {
        Mat3 z;
        for (int i = 0; i < 9; ++i) z.a[i] = s * x.a[i];
        return z;
    }
    friend Mat3 operator+(const Mat3& x, const Mat3& y) {
        Mat3 z;
        for (int i = 0; i < 9; ++i) z.a[i] = x.a[i] + y.a[i];
        return z;
    }
    friend Mat3 operator-(const Mat3& x, const Mat3& y) {
        Mat3 z;
        for (int i = 0; i < 9; ++i) z.a[i] = x.a[i] - y.a[i];
        return z;
    }
    friend bool operator==(const Mat3& x, const Mat3& y) { return x.a == y.a; }
};

template <class T>
Mat3<double> to_double(const Mat3<T>& m) {
    Mat3<double> out;
    for (int i = 0; i < 9; ++i) out.a[i] = to_double(m.a[i]);
    return out;
}

template <class T>
Vec3<double> to_double(const Vec3<T>& v) {
    return {to_double(v[0]), to_double(v[1]), to_double(v[2])};
}

template <class T>
double max_abs(const Mat3<T>& m) {
    double out = 0;
    for (auto& x : m.a) out = std::max(out, std::abs(to_double(x)));
    return out;
}

template <class T>
double max_abs_diff(const Mat3<T>& x, const Mat3<T>& y) {
    return max_abs(Mat3<T>(x - y));
}

inline double max_abs_diff(const Vec3<double>& x, const Vec3<double>& y) {
    return std::max({std::abs(x[0] - y[0]), std::abs(x[1] - y[1]), std::abs(x[2] - y[2])});
}

inline double norm2(const Vec3<double>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/**
 * @brief Reduced row echelon form. Returns the pivot columns; zero test exact for rationals.
 */
template <class T>
std::array<int, 3> rref(Mat3<T>& m, int& rank, double tol) {
    std::array<int, 3> pivots{-1, -1, -1};
    rank = 0;
    for (int col = 0; col < 3 && rank < 3; ++col) {
        int best = -1;
        double best_abs = 0;
        for (int i = rank; i < 3; ++i) {
            double v = std::abs(to_double(m(i, col)));
            if (!is_zero(m(i, col), tol) && (best < 0 || v > best_abs)) {
                best = i;
                best_abs = v;
            }
        }
        if (best < 0) continue;
        for (int j = 0; j < 3; ++j) std::swap(m(rank, j), m(best, j));
        T piv = m(rank, col);
        for (int j = 0; j < 3; ++j) m(rank, j) = m(rank, j) / piv;
        for (int i = 0; i < 3; ++i) {
            if (i == rank) continue;
            T f = m(i, col);
            if (f == T(0)) continue;
            for (int j = 0; j < 3; ++j) m(i, j) = m(i, j) - f * m(rank, j);
        }
        pivots[rank++] = col;
    }
    return pivots;
}

} // namespace cnslab
