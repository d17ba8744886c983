#pragma once
//
// Spin systems: anticommuting hermitian unitaries W_1..W_n on C^{2^n}
// (Jordan-Wigner strings W_i = Z⊗…⊗Z⊗X⊗I⊗…⊗I), the products V_F, and
// multipliers V_F ↦ f(|F|) V_F.
//

#include "nclp/lp_operator.hpp"

#include <bit>

namespace nclp::models
{

///
/// phase · X^{x} Z^{z} with bit k of the masks acting on tensor factor k
/// (factor 0 is the most significant bit of the basis index)
///
struct PauliString
{
    std::uint32_t x = 0, z = 0;
    int           phase = 0;   // power of i

    // (X^{x1} Z^{z1})(X^{x2} Z^{z2}) = (-1)^{|z1 ∧ x2|} X^{x1⊕x2} Z^{z1⊕z2}
    friend PauliString operator * ( const PauliString & a, const PauliString & b )
    {
        const int sign = std::popcount( a.z & b.x ) & 1;
        return { a.x ^ b.x, a.z ^ b.z, ( a.phase + b.phase + 2 * sign ) & 3 };
    }

    cplx phase_value () const
    {
        static const cplx ph[4] = { { 1, 0 }, { 0, 1 }, { -1, 0 }, { 0, -1 } };
        return ph[phase & 3];
    }

    // (row, value) of the single nonzero entry in column c
    std::pair< Index, cplx > column_entry ( Index c ) const
    {
        const double s = ( std::popcount( std::uint32_t( c ) & z ) & 1 ) ? -1.0 : 1.0;
        return { Index( std::uint32_t( c ) ^ x ), s * phase_value() };
    }
};

class SpinRep
{
public:
    explicit SpinRep ( int n )
        : _n( n )
    {
        if ( n < 1 || n > 10 ) throw domain_error( "SpinRep: spin count must lie in [1, 10]" );
        for ( int i = 0; i < n; ++i )
        {
            PauliString w;
            w.x = bit( i );
            for ( int j = 0; j < i; ++j ) w.z |= bit( j );
            _w.push_back( w );
        }
    }

    int   spins () const { return _n; }
    Index dim   () const { return Index( 1 ) << _n; }

    const PauliString & generator ( int i ) const { return _w.at( std::size_t( i ) ); }

    // V_F = W_{i_1} ⋯ W_{i_k} for F = {i_1 < … < i_k} given as a bit mask
    PauliString word ( std::uint32_t F ) const
    {
        PauliString v;
        for ( int i = 0; i < _n; ++i )
            if ( F >> i & 1u ) v = v * _w[std::size_t( i )];
        return v;
    }

    CMatrix matrix ( const PauliString & p ) const
    {
        CMatrix m = CMatrix::Zero( dim(), dim() );
        for ( Index c = 0; c < dim(); ++c )
        {
            const auto [r, v] = p.column_entry( c );
            m( r, c )         = v;
        }
        return m;
    }

    CMatrix W ( int i ) const { return matrix( generator( i ) ); }
    CMatrix V ( std::uint32_t F ) const { return matrix( word( F ) ); }

    // τ(V_F* x) with the normalized trace
    cplx coefficient ( std::uint32_t F, const CMatrix & x ) const
    {
        const PauliString v   = word( F );
        cplx              acc = 0.0;
        for ( Index c = 0; c < dim(); ++c )
        {
            const auto [r, val] = v.column_entry( c );
            acc += std::conj( val ) * x( r, c );
        }
        return acc / double( dim() );
    }

    // Σ_F λ_F V_F
    CMatrix synthesize ( const std::vector< cplx > & lambda ) const
    {
        CMatrix m = CMatrix::Zero( dim(), dim() );
        for ( std::uint32_t F = 0; F < std::uint32_t( lambda.size() ); ++F )
        {
            if ( lambda[F] == cplx( 0.0 ) ) continue;
            const PauliString v = word( F );
            for ( Index c = 0; c < dim(); ++c )
            {
                const auto [r, val] = v.column_entry( c );
                m( r, c ) += lambda[F] * val;
            }
        }
        return m;
    }

private:
    std::uint32_t bit ( int i ) const { return std::uint32_t( 1 ) << ( _n - 1 - i ); }

    int                        _n;
    std::vector< PauliString > _w;
};

inline double normalized_trace ( const CMatrix & x ) { return x.trace().real() / double( x.rows() ); }

///
/// x ↦ Σ_F f(|F|) τ(V_F* x) V_F: the multiplier composed with the
/// trace-preserving conditional expectation onto span{V_F}
///
inline LpOperator clifford_multiplier ( const SpinRep & rep, std::function< cplx ( int ) > f, const std::string & name = "clifford" )
{
    const std::uint32_t count = std::uint32_t( 1 ) << rep.spins();
    std::vector< cplx > mult( count );
    for ( std::uint32_t F = 0; F < count; ++F ) mult[F] = f( std::popcount( F ) );

    auto act = [rep, mult] ( const CMatrix & x, bool adj ) {
        std::vector< cplx > lam( mult.size() );
        for ( std::uint32_t F = 0; F < lam.size(); ++F )
            lam[F] = ( adj ? std::conj( mult[F] ) : mult[F] ) * rep.coefficient( F, x );
        return rep.synthesize( lam );
    };
    return LpOperator( ops::Custom{ name, rep.dim(), [act] ( const CMatrix & x ) { return act( x, false ); },
                                    [act] ( const CMatrix & y ) { return act( y, true ); } } );
}

// T_t(V_F) = e^{-t|F|} V_F
inline LpOperator clifford_semigroup ( const SpinRep & rep, double t )
{
    if ( !( t >= 0.0 ) ) throw domain_error( "clifford_semigroup: t must be >= 0" );
    return clifford_multiplier( rep, [t] ( int k ) { return cplx( std::exp( -t * k ) ); }, "clifford-semigroup" );
}

}// namespace nclp::models
