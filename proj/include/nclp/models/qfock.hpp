#pragma once
//
// Truncated q-Fock space over C^d: q-Gram operators, creation/annihilation,
// q-Gaussians, vacuum trace and second quantization.
//

#include "nclp/core_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <numeric>

namespace nclp::models
{

namespace detail
{

inline int inversions ( const std::vector< int > & s )
{
    int c = 0;
    for ( std::size_t i = 0; i < s.size(); ++i )
        for ( std::size_t j = i + 1; j < s.size(); ++j ) c += s[i] > s[j];
    return c;
}

// digits of a level-n basis index, most significant first
inline std::vector< int > digits ( Index w, int n, int d )
{
    std::vector< int > out( std::size_t( n ), 0 );
    for ( int k = n - 1; k >= 0; --k )
    {
        out[std::size_t( k )] = int( w % d );
        w /= d;
    }
    return out;
}

inline Index from_digits ( const std::vector< int > & dg, int d )
{
    Index w = 0;
    for ( int x : dg ) w = w * d + x;
    return w;
}

inline Index ipow ( Index b, int e )
{
    Index r = 1;
    while ( e-- > 0 ) r *= b;
    return r;
}

}// namespace detail

///
/// Q_q on (C^d)^{⊗n}: Σ_σ q^{inv(σ)} (permutation of tensor factors)
///
inline CMatrix q_gram ( int n, int d, double q )
{
    if ( n < 0 || n > 6 ) throw domain_error( "q_gram: level must lie in [0, 6]" );
    if ( d < 1 ) throw domain_error( "q_gram: dimension must be >= 1" );
    if ( !( std::abs( q ) <= 1.0 ) ) throw domain_error( "q_gram: need |q| <= 1" );

    const Index dim = detail::ipow( d, n );
    CMatrix     Q   = CMatrix::Zero( dim, dim );

    std::vector< int > sigma( static_cast< std::size_t >( n ) );
    std::iota( sigma.begin(), sigma.end(), 0 );
    do
    {
        const double c = std::pow( q, detail::inversions( sigma ) );   // 0^0 = 1
        if ( c == 0.0 ) continue;
        for ( Index w = 0; w < dim; ++w )
        {
            const auto         dg = detail::digits( w, n, d );
            std::vector< int > pd( dg.size() );
            for ( int k = 0; k < n; ++k ) pd[std::size_t( k )] = dg[std::size_t( sigma[std::size_t( k )] )];
            Q( detail::from_digits( pd, d ), w ) += c;
        }
    } while ( std::next_permutation( sigma.begin(), sigma.end() ) );
    return Q;
}

///
/// basis of ⊕_{n ≤ N} (C^d)^{⊗n} with the block-diagonal q-Gram matrix
///
class FockBasis
{
public:
    FockBasis ( int d, int N, double q )
        : _d( d )
        , _N( N )
        , _q( q )
    {
        if ( d < 1 ) throw domain_error( "FockBasis: d must be >= 1" );
        if ( N < 0 || N > 6 ) throw domain_error( "FockBasis: truncation level must lie in [0, 6]" );
        if ( !( std::abs( q ) < 1.0 ) ) throw domain_error( "FockBasis: q must lie in (-1, 1)" );

        Index off = 0;
        for ( int n = 0; n <= N; ++n )
        {
            _offset.push_back( off );
            off += detail::ipow( d, n );
        }
        _size = off;
        _gram = CMatrix::Zero( _size, _size );
        for ( int n = 0; n <= N; ++n )
        {
            const CMatrix Q = q_gram( n, d, q );
            _gram.block( _offset[std::size_t( n )], _offset[std::size_t( n )], Q.rows(), Q.cols() ) = Q;
        }
        _gram_inv = _gram.inverse();
    }

    int     d        () const { return _d; }
    int     levels   () const { return _N; }
    double  q        () const { return _q; }
    Index   size     () const { return _size; }
    Index   offset   ( int n ) const { return _offset.at( std::size_t( n ) ); }
    Index   level_dim ( int n ) const { return detail::ipow( _d, n ); }
    const CMatrix & gram     () const { return _gram; }
    const CMatrix & gram_inv () const { return _gram_inv; }

    // ⟨u, v⟩_q = v* G u
    cplx inner ( const CVector & u, const CVector & v ) const { return v.dot( _gram * u ); }

    // adjoint with respect to the q-inner product
    CMatrix q_adjoint ( const CMatrix & x ) const { return _gram_inv * x.adjoint() * _gram; }

    CVector vacuum () const
    {
        CVector v = CVector::Zero( _size );
        v( 0 )    = 1.0;
        return v;
    }

private:
    int                  _d, _N;
    double               _q;
    Index                _size = 0;
    std::vector< Index > _offset;
    CMatrix              _gram, _gram_inv;
};

///
/// c(h): e_w ↦ h ⊗ e_w; the top level is mapped to 0 (truncation)
///
inline CMatrix fock_creation ( const FockBasis & b, const CVector & h )
{
    if ( h.size() != b.d() ) throw shape_error( "fock_creation: vector has wrong dimension" );
    if ( !( h.norm() > 0.0 ) ) throw domain_error( "fock_creation: h must be nonzero" );

    CMatrix c = CMatrix::Zero( b.size(), b.size() );
    for ( int n = 0; n < b.levels(); ++n )
    {
        const Index dn = b.level_dim( n );
        for ( Index w = 0; w < dn; ++w )
            for ( int i = 0; i < b.d(); ++i ) c( b.offset( n + 1 ) + i * dn + w, b.offset( n ) + w ) += h( i );
    }
    return c;
}

// a(h) = c(h)* in the q-inner product
inline CMatrix fock_annihilation ( const FockBasis & b, const CVector & h ) { return b.q_adjoint( fock_creation( b, h ) ); }

///
/// a(h) e_{w₁…w_n} = Σ_k q^{k-1} ⟨e_{w_k}, h⟩ e_{w₁…ŵ_k…w_n}, used as a cross-check
///
inline CMatrix fock_annihilation_formula ( const FockBasis & b, const CVector & h )
{
    if ( h.size() != b.d() ) throw shape_error( "fock_annihilation_formula: vector has wrong dimension" );
    CMatrix a = CMatrix::Zero( b.size(), b.size() );
    for ( int n = 1; n <= b.levels(); ++n )
        for ( Index w = 0; w < b.level_dim( n ); ++w )
        {
            const auto dg = detail::digits( w, n, b.d() );
            for ( int k = 0; k < n; ++k )
            {
                std::vector< int > rest = dg;
                rest.erase( rest.begin() + k );
                a( b.offset( n - 1 ) + detail::from_digits( rest, b.d() ), b.offset( n ) + w ) +=
                    std::pow( b.q(), k ) * std::conj( h( dg[std::size_t( k )] ) );
            }
        }
    return a;
}

inline CMatrix fock_gaussian ( const FockBasis & b, const CVector & h )
{
    return fock_creation( b, h ) + fock_annihilation( b, h );
}

// τ(x) = ⟨xΩ, Ω⟩_q
inline cplx fock_trace ( const FockBasis & b, const CMatrix & x ) { return b.inner( x * b.vacuum(), b.vacuum() ); }

///
/// τ(w(h₁)⋯w(h_m)), exact when the truncation level is at least m
///
inline cplx gaussian_moment ( const std::vector< CVector > & hs, double q, int N )
{
    if ( hs.empty() ) return 1.0;
    if ( N < int( hs.size() ) )
        throw domain_error( "gaussian_moment: truncation level " + std::to_string( N ) + " below moment order " +
                            std::to_string( hs.size() ) );
    const FockBasis b( int( hs.front().size() ), N, q );
    CVector         v = b.vacuum();
    for ( auto it = hs.rbegin(); it != hs.rend(); ++it ) v = fock_gaussian( b, *it ) * v;
    return b.inner( v, b.vacuum() );
}

///
/// F_q(a) = ⊕_n a^{⊗n} for a contraction a on C^d
///
inline CMatrix second_quantization ( const FockBasis & b, const CMatrix & a, double tol = 1e-10 )
{
    if ( a.rows() != b.d() || a.cols() != b.d() ) throw shape_error( "second_quantization: operator has wrong size" );
    if ( spectral_norm( a ) > 1.0 + tol ) throw domain_error( "second_quantization: operator is not a contraction" );

    CMatrix out = CMatrix::Zero( b.size(), b.size() );
    CMatrix pw  = CMatrix::Identity( 1, 1 );
    for ( int n = 0; n <= b.levels(); ++n )
    {
        out.block( b.offset( n ), b.offset( n ), pw.rows(), pw.cols() ) = pw;
        pw = Eigen::kroneckerProduct( a, pw ).eval();
    }
    return out;
}

// q-Ornstein-Uhlenbeck semigroup: second quantization of e^{-t} I
inline CMatrix ou_semigroup ( const FockBasis & b, double t )
{
    if ( !( t >= 0.0 ) ) throw domain_error( "ou_semigroup: t must be >= 0" );
    return second_quantization( b, std::exp( -t ) * CMatrix::Identity( b.d(), b.d() ) );
}

inline double min_gram_eigenvalue ( int n, int d, double q )
{
    const CMatrix Q = q_gram( n, d, q );
    Eigen::SelfAdjointEigenSolver< CMatrix > es( 0.5 * ( Q + Q.adjoint() ), Eigen::EigenvaluesOnly );
    return es.eigenvalues().minCoeff();
}

}// namespace nclp::models
