// SPDX-License-Identifier: Apache-2.0
//! \file spinport/spin_core.hpp
//! Finite-dimensional spin-1/2 states and operators for up to three particles.
//!
//! Basis convention: amplitudes are indexed by a bit pattern in which
//! particle 0 is the most significant bit, bit value 0 is spin up and bit
//! value 1 is spin down. For three particles index 0b011 is |up down down>.
//! Spin operators use hbar = 1, so single-particle projections are +-1/2.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace spinport
{
using Amplitude = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxParticles = 3;
//! Exact-algebra tolerance.
inline constexpr double kExactTol = 1e-12;
//! Accepted deviation of a user-supplied axis from unit length.
inline constexpr double kAxisTol = 1e-9;
//! Norms at or below this are treated as an annihilated state.
inline constexpr double kZeroNorm = 1e-12;

//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Raised when an operation would have to normalize a zero vector.
class ZeroNormError : public Error
{
  public:
    using Error::Error;
};

inline bool is_finite(Amplitude z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline std::size_t dimension(int n_particles)
{
    return std::size_t{1} << n_particles;
}

//! Bit of `particle` in basis index `index` (0 = up, 1 = down).
inline int spin_bit(std::size_t index, int particle, int n_particles)
{
    return static_cast<int>((index >> (n_particles - 1 - particle)) & 1u);
}

namespace detail
{
inline void check_particle_count(int n)
{
    if (n < 1 || n > kMaxParticles)
    {
        throw Error("particle count must be in [1, 3], got "
                    + std::to_string(n));
    }
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Direction in space, stored normalized.
 *
 * The checked constructor rejects inputs whose length deviates from 1 by
 * more than 1e-9 and renormalizes the rest.
 */
class UnitVector3
{
  public:
    UnitVector3(double x, double y, double z)
    {
        double const len = std::sqrt(x * x + y * y + z * z);
        if (!std::isfinite(len) || std::abs(len - 1.0) > kAxisTol)
        {
            throw Error("axis is not a unit vector (length "
                        + std::to_string(len) + ")");
        }
        v_ = Eigen::Vector3d{x, y, z} / len;
    }

    //! Normalizes any finite nonzero direction.
    static UnitVector3 normalized(double x, double y, double z)
    {
        double const len = std::sqrt(x * x + y * y + z * z);
        if (!(len > 0) || !std::isfinite(len))
        {
            throw Error("cannot normalize a zero or non-finite direction");
        }
        return {x / len, y / len, z / len};
    }

    static UnitVector3 normalized(Eigen::Vector3d const& v)
    {
        return normalized(v.x(), v.y(), v.z());
    }

    static UnitVector3 x_axis() { return {1, 0, 0}; }
    static UnitVector3 y_axis() { return {0, 1, 0}; }
    static UnitVector3 z_axis() { return {0, 0, 1}; }

    //! Unit vector tilted by `theta` from z toward x.
    static UnitVector3 tilted_from_z(double theta)
    {
        return normalized(std::sin(theta), 0.0, std::cos(theta));
    }

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    Eigen::Vector3d const& vec() const { return v_; }
    double dot(UnitVector3 const& o) const { return v_.dot(o.v_); }

  private:
    Eigen::Vector3d v_;
};

//---------------------------------------------------------------------------//
/*!
 * Normalized pure state of 1 to 3 spin-1/2 particles.
 */
class SpinState
{
  public:
    //! Normalizes the given amplitudes.
    SpinState(int n_particles, Vector amplitudes)
        : n_{n_particles}, amps_{std::move(amplitudes)}
    {
        detail::check_particle_count(n_);
        if (static_cast<std::size_t>(amps_.size()) != dimension(n_))
        {
            throw Error("state needs " + std::to_string(dimension(n_))
                        + " amplitudes, got " + std::to_string(amps_.size()));
        }
        for (Eigen::Index i = 0; i < amps_.size(); ++i)
        {
            if (!is_finite(amps_[i]))
            {
                throw Error("state amplitude is not finite");
            }
        }
        double const norm = amps_.norm();
        if (norm <= kZeroNorm)
        {
            throw ZeroNormError("cannot normalize a zero state");
        }
        amps_ /= norm;
    }

    static SpinState basis(int n_particles, std::size_t index)
    {
        detail::check_particle_count(n_particles);
        if (index >= dimension(n_particles))
        {
            throw Error("basis index out of range");
        }
        Vector v = Vector::Zero(dimension(n_particles));
        v[static_cast<Eigen::Index>(index)] = 1.0;
        return {n_particles, std::move(v)};
    }

    static SpinState up() { return basis(1, 0); }
    static SpinState down() { return basis(1, 1); }

    //! a|up> + b|down>, normalized.
    static SpinState qubit(Amplitude a, Amplitude b)
    {
        Vector v(2);
        v << a, b;
        return {1, std::move(v)};
    }

    int n_particles() const { return n_; }
    std::size_t dim() const { return dimension(n_); }
    Vector const& amplitudes() const { return amps_; }
    Amplitude operator[](std::size_t i) const
    {
        return amps_[static_cast<Eigen::Index>(i)];
    }

  private:
    int n_;
    Vector amps_;
};

//---------------------------------------------------------------------------//
/*!
 * Dense operator on the 2^n dimensional spin space.
 */
class SpinOperator
{
  public:
    SpinOperator(int n_particles, Matrix m) : n_{n_particles}, m_{std::move(m)}
    {
        detail::check_particle_count(n_);
        auto const d = static_cast<Eigen::Index>(dimension(n_));
        if (m_.rows() != d || m_.cols() != d)
        {
            throw Error("operator must be " + std::to_string(d) + "x"
                        + std::to_string(d));
        }
    }

    static SpinOperator identity(int n_particles)
    {
        detail::check_particle_count(n_particles);
        auto const d = static_cast<Eigen::Index>(dimension(n_particles));
        return {n_particles, Matrix::Identity(d, d)};
    }

    static SpinOperator zero(int n_particles)
    {
        detail::check_particle_count(n_particles);
        auto const d = static_cast<Eigen::Index>(dimension(n_particles));
        return {n_particles, Matrix::Zero(d, d)};
    }

    //! |ket><bra|
    static SpinOperator outer(SpinState const& ket, SpinState const& bra)
    {
        if (ket.n_particles() != bra.n_particles())
        {
            throw Error("outer product of states with different sizes");
        }
        return {ket.n_particles(),
                ket.amplitudes() * bra.amplitudes().adjoint()};
    }

    int n_particles() const { return n_; }
    std::size_t dim() const { return dimension(n_); }
    Matrix const& matrix() const { return m_; }
    Amplitude operator()(std::size_t r, std::size_t c) const
    {
        return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    SpinOperator adjoint() const { return {n_, m_.adjoint()}; }

    bool is_hermitian(double tol = kExactTol) const
    {
        return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_unitary(double tol = kExactTol) const
    {
        auto const d = m_.rows();
        return (m_.adjoint() * m_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff()
               <= tol;
    }

    //! Largest entrywise modulus of the difference.
    double max_abs_diff(SpinOperator const& o) const
    {
        check_same(o);
        return (m_ - o.m_).cwiseAbs().maxCoeff();
    }

    SpinOperator& operator+=(SpinOperator const& o)
    {
        check_same(o);
        m_ += o.m_;
        return *this;
    }
    SpinOperator& operator-=(SpinOperator const& o)
    {
        check_same(o);
        m_ -= o.m_;
        return *this;
    }
    SpinOperator& operator*=(Amplitude s)
    {
        m_ *= s;
        return *this;
    }

    friend SpinOperator operator+(SpinOperator a, SpinOperator const& b)
    {
        return a += b;
    }
    friend SpinOperator operator-(SpinOperator a, SpinOperator const& b)
    {
        return a -= b;
    }
    friend SpinOperator operator*(Amplitude s, SpinOperator a)
    {
        return a *= s;
    }
    friend SpinOperator operator*(SpinOperator const& a, SpinOperator const& b)
    {
        a.check_same(b);
        return {a.n_, a.m_ * b.m_};
    }

  private:
    void check_same(SpinOperator const& o) const
    {
        if (o.n_ != n_)
        {
            throw Error("operator dimension mismatch");
        }
    }

    int n_;
    Matrix m_;
};

//---------------------------------------------------------------------------//
// Single-particle building blocks
//---------------------------------------------------------------------------//

namespace pauli
{
inline Matrix x()
{
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Matrix y()
{
    Matrix m(2, 2);
    m << 0, Amplitude{0, -1}, Amplitude{0, 1}, 0;
    return m;
}
inline Matrix z()
{
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
//! sigma . n
inline Matrix along(UnitVector3 const& n)
{
    Matrix m(2, 2);
    m << n.z(), Amplitude{n.x(), -n.y()}, Amplitude{n.x(), n.y()}, -n.z();
    return m;
}
}  // namespace pauli

//! Projector of one spin onto projection sign*1/2 along n: (1 + sign sigma.n)/2.
inline Matrix projection_projector(UnitVector3 const& n, int sign)
{
    return 0.5 * (Matrix::Identity(2, 2) + double(sign) * pauli::along(n));
}

//---------------------------------------------------------------------------//
// Embedding and products
//---------------------------------------------------------------------------//

/*!
 * Embed an operator acting on `particles` (in the given order) into the
 * n-particle space, acting as identity on the others.
 */
inline SpinOperator
embed(Matrix const& local, std::vector<int> const& particles, int n_particles)
{
    detail::check_particle_count(n_particles);
    auto const k = static_cast<int>(particles.size());
    if (k < 1 || k > n_particles
        || local.rows() != static_cast<Eigen::Index>(dimension(k))
        || local.cols() != local.rows())
    {
        throw Error("embedded operator size does not match particle list");
    }
    for (int i = 0; i < k; ++i)
    {
        if (particles[i] < 0 || particles[i] >= n_particles)
        {
            throw Error("particle index " + std::to_string(particles[i])
                        + " out of range for "
                        + std::to_string(n_particles) + " particles");
        }
        for (int j = 0; j < i; ++j)
        {
            if (particles[i] == particles[j])
            {
                throw Error("repeated particle index in embedding");
            }
        }
    }

    auto const dim = dimension(n_particles);
    auto local_index = [&](std::size_t full) {
        std::size_t li = 0;
        for (int i = 0; i < k; ++i)
        {
            li = (li << 1)
                 | static_cast<std::size_t>(
                     spin_bit(full, particles[i], n_particles));
        }
        return li;
    };
    std::size_t mask = 0;
    for (int p : particles)
    {
        mask |= std::size_t{1} << (n_particles - 1 - p);
    }

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim),
                              static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r)
    {
        for (std::size_t c = 0; c < dim; ++c)
        {
            if ((r & ~mask) != (c & ~mask))
            {
                continue;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))
                = local(static_cast<Eigen::Index>(local_index(r)),
                        static_cast<Eigen::Index>(local_index(c)));
        }
    }
    return {n_particles, std::move(out)};
}

//! S_particle . axis in the n-particle space.
inline SpinOperator
spin_component(UnitVector3 const& axis, int particle, int n_particles)
{
    detail::check_particle_count(n_particles);
    if (particle < 0 || particle >= n_particles)
    {
        throw Error("particle index " + std::to_string(particle)
                    + " out of range for " + std::to_string(n_particles)
                    + " particles");
    }
    return embed(0.5 * pauli::along(axis), {particle}, n_particles);
}

//! (S_1 + S_2 + ...) . axis
inline SpinOperator total_spin_component(UnitVector3 const& axis, int n_particles)
{
    auto out = SpinOperator::zero(n_particles);
    for (int p = 0; p < n_particles; ++p)
    {
        out += spin_component(axis, p, n_particles);
    }
    return out;
}

//! (S_1 - S_2) . axis for two particles.
inline SpinOperator relative_spin_component(UnitVector3 const& axis)
{
    return spin_component(axis, 0, 2) - spin_component(axis, 1, 2);
}

//! Total spin squared S^2 = Sx^2 + Sy^2 + Sz^2.
inline SpinOperator total_spin_squared(int n_particles)
{
    auto out = SpinOperator::zero(n_particles);
    for (auto const& axis :
         {UnitVector3::x_axis(), UnitVector3::y_axis(), UnitVector3::z_axis()})
    {
        auto const s = total_spin_component(axis, n_particles);
        out += s * s;
    }
    return out;
}

inline SpinState tensor(SpinState const& left, SpinState const& right)
{
    int const n = left.n_particles() + right.n_particles();
    if (n > kMaxParticles)
    {
        throw Error("tensor product exceeds 3 particles");
    }
    auto const& l = left.amplitudes();
    auto const& r = right.amplitudes();
    Vector v(l.size() * r.size());
    for (Eigen::Index i = 0; i < l.size(); ++i)
    {
        v.segment(i * r.size(), r.size()) = l[i] * r;
    }
    return {n, std::move(v)};
}

inline SpinOperator tensor(SpinOperator const& left, SpinOperator const& right)
{
    int const n = left.n_particles() + right.n_particles();
    if (n > kMaxParticles)
    {
        throw Error("tensor product exceeds 3 particles");
    }
    auto const& l = left.matrix();
    auto const& r = right.matrix();
    Matrix m(l.rows() * r.rows(), l.cols() * r.cols());
    for (Eigen::Index i = 0; i < l.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < l.cols(); ++j)
        {
            m.block(i * r.rows(), j * r.cols(), r.rows(), r.cols())
                = l(i, j) * r;
        }
    }
    return {n, std::move(m)};
}

//! exp(-i angle sigma.axis / 2), the spin-1/2 rotation.
inline SpinOperator rotation(UnitVector3 const& axis, double angle)
{
    Matrix m = std::cos(angle / 2) * Matrix::Identity(2, 2)
               - Amplitude{0, std::sin(angle / 2)} * pauli::along(axis);
    return {1, std::move(m)};
}

//---------------------------------------------------------------------------//
// Application, overlaps, expectation
//---------------------------------------------------------------------------//

//! Unnormalized result of applying an operator.
struct ApplyResult
{
    int n_particles;
    Vector vector;
    double norm;

    bool annihilated() const { return norm <= kZeroNorm; }

    //! Throws ZeroNormError when annihilated.
    SpinState normalized() const
    {
        if (annihilated())
        {
            throw ZeroNormError("operator annihilated the state");
        }
        return {n_particles, vector};
    }
};

inline ApplyResult apply(SpinOperator const& op, SpinState const& state)
{
    if (op.n_particles() != state.n_particles())
    {
        throw Error("operator acts on " + std::to_string(op.n_particles())
                    + " particles but state has "
                    + std::to_string(state.n_particles()));
    }
    Vector v = op.matrix() * state.amplitudes();
    double const norm = v.norm();
    return {state.n_particles(), std::move(v), norm};
}

inline SpinState apply_normalized(SpinOperator const& op, SpinState const& state)
{
    return apply(op, state).normalized();
}

//! <a|b>
inline Amplitude inner(SpinState const& a, SpinState const& b)
{
    if (a.n_particles() != b.n_particles())
    {
        throw Error("inner product of states with different sizes");
    }
    return a.amplitudes().dot(b.amplitudes());
}

//! |<a|b>|, insensitive to global phase.
inline double overlap(SpinState const& a, SpinState const& b)
{
    return std::abs(inner(a, b));
}

//! |<a|b>|^2
inline double fidelity(SpinState const& a, SpinState const& b)
{
    double const o = overlap(a, b);
    return o * o;
}

//! <psi|M|psi> for Hermitian M.
inline double expectation(SpinState const& state, SpinOperator const& op)
{
    if (op.n_particles() != state.n_particles())
    {
        throw Error("expectation: dimension mismatch");
    }
    if (!op.is_hermitian())
    {
        throw Error("expectation requires a Hermitian operator");
    }
    Amplitude const e
        = state.amplitudes().dot(op.matrix() * state.amplitudes());
    if (std::abs(e.imag()) > kExactTol)
    {
        throw Error("expectation has a non-negligible imaginary part");
    }
    return e.real();
}

/*!
 * Apply a 2x2 matrix to one particle of an amplitude vector in place.
 * Equivalent to embed(local, {particle}, n) * v without building the matrix.
 */
inline void
apply_local(Matrix const& local, int particle, int n_particles, Vector& v)
{
    std::size_t const stride = std::size_t{1} << (n_particles - 1 - particle);
    auto const dim = dimension(n_particles);
    Amplitude const m00 = local(0, 0), m01 = local(0, 1), m10 = local(1, 0),
                    m11 = local(1, 1);
    for (std::size_t i = 0; i < dim; ++i)
    {
        if (i & stride)
        {
            continue;
        }
        auto const i0 = static_cast<Eigen::Index>(i);
        auto const i1 = static_cast<Eigen::Index>(i | stride);
        Amplitude const a0 = v[i0];
        Amplitude const a1 = v[i1];
        v[i0] = m00 * a0 + m01 * a1;
        v[i1] = m10 * a0 + m11 * a1;
    }
}

/*!
 * Contract `part` against the listed particles of `whole`, leaving the
 * unnormalized amplitudes of the remaining particles (in ascending order).
 *
 * The result r satisfies |whole> = sum_k |k>_part (x) r_k + ..., i.e.
 * r = (<part| (x) 1) |whole>.
 */
inline Vector partial_inner(SpinState const& part,
                            std::vector<int> const& particles,
                            SpinState const& whole)
{
    int const n = whole.n_particles();
    int const k = part.n_particles();
    if (static_cast<int>(particles.size()) != k || k >= n)
    {
        throw Error("partial_inner: particle list does not match");
    }
    std::vector<int> rest;
    for (int p = 0; p < n; ++p)
    {
        bool used = false;
        for (int q : particles)
        {
            if (q < 0 || q >= n)
            {
                throw Error("partial_inner: particle index out of range");
            }
            used = used || q == p;
        }
        if (!used)
        {
            rest.push_back(p);
        }
    }
    if (static_cast<int>(rest.size()) != n - k)
    {
        throw Error("partial_inner: repeated particle index");
    }

    Vector out = Vector::Zero(static_cast<Eigen::Index>(dimension(n - k)));
    for (std::size_t full = 0; full < whole.dim(); ++full)
    {
        std::size_t pi = 0;
        for (int q : particles)
        {
            pi = (pi << 1) | static_cast<std::size_t>(spin_bit(full, q, n));
        }
        std::size_t ri = 0;
        for (int q : rest)
        {
            ri = (ri << 1) | static_cast<std::size_t>(spin_bit(full, q, n));
        }
        out[static_cast<Eigen::Index>(ri)]
            += std::conj(part[pi]) * whole[full];
    }
    return out;
}

//---------------------------------------------------------------------------//
// Measurement
//---------------------------------------------------------------------------//

struct Measurement
{
    double value;  //!< +0.5 or -0.5
    SpinState collapsed;
    double probability;  //!< Born weight of the sampled branch
};

//! Born probability that `particle` is found with projection +1/2 along axis.
inline double
probability_up(SpinState const& state, int particle, UnitVector3 const& axis)
{
    Vector v = state.amplitudes();
    apply_local(projection_projector(axis, +1), particle, state.n_particles(), v);
    return v.squaredNorm();
}

/*!
 * Projective measurement of one particle's spin along `axis`.
 *
 * Samples +1/2 when u < P(+1/2) with u uniform in [0, 1).
 */
inline Measurement measure_projection(SpinState const& state,
                                      int particle,
                                      UnitVector3 const& axis,
                                      RandomStream& rng)
{
    int const n = state.n_particles();
    if (particle < 0 || particle >= n)
    {
        throw Error("measure_projection: particle index out of range");
    }
    Vector up = state.amplitudes();
    apply_local(projection_projector(axis, +1), particle, n, up);
    double const p_up = std::min(1.0, up.squaredNorm());

    double const u = rng.uniform();
    Vector down = state.amplitudes();
    apply_local(projection_projector(axis, -1), particle, n, down);
    // Rounding can leave p_up a hair below 1 with an empty down branch.
    if (u < p_up || down.norm() <= kZeroNorm)
    {
        return {+0.5, SpinState{n, std::move(up)}, p_up};
    }
    return {-0.5, SpinState{n, std::move(down)}, 1.0 - p_up};
}

}  // namespace spinport
