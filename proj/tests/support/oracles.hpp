// SPDX-License-Identifier: Apache-2.0
//! \file tests/support/oracles.hpp
//! Reference computations written independently of the library: explicit
//! Kronecker products, hand-placed amplitudes and textbook formulas.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace oracle
{
using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline double const kInvSqrt2 = 1.0 / std::sqrt(2.0);

//! Index of a three-spin basis ket, first particle most significant, 1 = down.
constexpr int idx3(int s1, int s2, int s3) { return 4 * s1 + 2 * s2 + s3; }
constexpr int idx2(int s1, int s2) { return 2 * s1 + s2; }

inline Mat sigma_x()
{
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Mat sigma_y()
{
    Mat m(2, 2);
    m << 0, cd(0, -1), cd(0, 1), 0;
    return m;
}
inline Mat sigma_z()
{
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
inline Mat id2() { return Mat::Identity(2, 2); }

inline Mat kron(Mat const& a, Mat const& b)
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vec kron(Vec const& a, Vec const& b)
{
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

//! S . n for one spin (hbar = 1).
inline Mat spin_dot(Eigen::Vector3d const& n)
{
    return 0.5 * (n.x() * sigma_x() + n.y() * sigma_y() + n.z() * sigma_z());
}

//! Two-spin Bell kets written out from their definitions.
//! Order: PsiMinus, PsiPlus, PhiMinus, PhiPlus.
inline std::array<Vec, 4> bell_kets()
{
    std::array<Vec, 4> k;
    for (auto& v : k)
        v = Vec::Zero(4);
    double const r = kInvSqrt2;
    k[0](idx2(0, 1)) = r;
    k[0](idx2(1, 0)) = -r;
    k[1](idx2(0, 1)) = r;
    k[1](idx2(1, 0)) = r;
    k[2](idx2(0, 0)) = r;
    k[2](idx2(1, 1)) = -r;
    k[3](idx2(0, 0)) = r;
    k[3](idx2(1, 1)) = r;
    return k;
}

/*!
 * Four-term form of |phi_1>|Psi-_23>:
 *   1/2 [ |Psi-_13>(a up + b dn)_2 + |Psi+_13>(a up - b dn)_2
 *       + |Phi-_13>(-a dn - b up)_2 + |Phi+_13>(-a dn + b up)_2 ]
 * with amplitudes placed by hand into (particle1, particle2, particle3).
 */
inline Vec four_term_expansion(cd a, cd b)
{
    auto const bell = bell_kets();
    std::array<std::array<cd, 2>, 4> const traveler{{
        {a, b},
        {a, -b},
        {-b, -a},
        {b, -a},
    }};
    Vec out = Vec::Zero(8);
    for (int k = 0; k < 4; ++k)
        for (int s1 = 0; s1 < 2; ++s1)
            for (int s3 = 0; s3 < 2; ++s3)
                for (int s2 = 0; s2 < 2; ++s2)
                    out(idx3(s1, s2, s3))
                        += 0.5 * bell[k](idx2(s1, s3)) * traveler[k][s2];
    return out;
}

//! Direct product a|up>+b|dn> (x) (|up dn> - |dn up>)/sqrt2, by hand.
inline Vec product_with_singlet(cd a, cd b)
{
    Vec out = Vec::Zero(8);
    double const r = kInvSqrt2;
    out(idx3(0, 0, 1)) = a * r;
    out(idx3(0, 1, 0)) = -a * r;
    out(idx3(1, 0, 1)) = b * r;
    out(idx3(1, 1, 0)) = -b * r;
    return out;
}

//! exp(-i angle sigma.n / 2) by matrix exponential.
inline Mat su2_rotation(Eigen::Vector3d const& n, double angle)
{
    Mat gen = cd(0, -angle) * spin_dot(n);
    return gen.exp();
}

//! Rodrigues: R v = v cos a + (n x v) sin a + n (n.v)(1 - cos a).
inline Eigen::Vector3d rodrigues(Eigen::Vector3d const& n, double angle,
                                 Eigen::Vector3d const& v)
{
    return v * std::cos(angle) + n.cross(v) * std::sin(angle)
           + n * n.dot(v) * (1 - std::cos(angle));
}

//! Relativistic speed from gamma = 1 + T/m.
inline double proton_speed(double kinetic_mev)
{
    constexpr double m = 938.272;
    constexpr double c = 299792458.0;
    double const gamma = 1.0 + kinetic_mev / m;
    return c * std::sqrt(1.0 - 1.0 / (gamma * gamma));
}

//! Uniform random unit vector.
inline Eigen::Vector3d random_axis(std::mt19937_64& g)
{
    std::normal_distribution<double> n;
    Eigen::Vector3d v;
    do
    {
        v = {n(g), n(g), n(g)};
    } while (v.norm() < 1e-6);
    return v.normalized();
}

//! Random normalized qubit amplitudes.
inline std::pair<cd, cd> random_qubit(std::mt19937_64& g)
{
    std::normal_distribution<double> n;
    cd a{n(g), n(g)}, b{n(g), n(g)};
    double const norm = std::sqrt(std::norm(a) + std::norm(b));
    return {a / norm, b / norm};
}

inline cd random_complex(std::mt19937_64& g, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(g), u(g)};
}

//! Largest entry modulus.
inline double max_abs(Mat const& m) { return m.cwiseAbs().maxCoeff(); }
inline double max_abs(Vec const& v) { return v.cwiseAbs().maxCoeff(); }

//! Two-sided binomial 4-sigma test of an observed count.
inline bool within_sigmas(double count, double n, double p, double k = 4.0)
{
    double const sigma = std::sqrt(std::max(0.0, n * p * (1 - p)));
    return std::abs(count - n * p) < k * std::max(sigma, 1.0);
}
}  // namespace oracle
