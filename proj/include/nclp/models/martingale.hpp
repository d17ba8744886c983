#pragma once
//
// Matrix martingales on M_2^{⊗N}: towers of conditional expectations, Stein
// column bounds and Cesàro square functions.
//

#include "nclp/hvnorms.hpp"
#include "nclp/lp_operator.hpp"
#include "nclp/rbound.hpp"

namespace nclp::models
{

enum class TowerDirection
{
    increasing,   // E_k keeps the first k factors
    decreasing    // E_k keeps the first N - k factors
};

struct MartingaleTower
{
    int            N;
    TowerDirection direction = TowerDirection::increasing;

    MartingaleTower ( int n, TowerDirection dir = TowerDirection::increasing )
        : N( n )
        , direction( dir )
    {
        if ( n < 1 || n > 8 ) throw domain_error( "MartingaleTower: factor count must lie in [1, 8]" );
    }

    Index dim () const { return Index( 1 ) << N; }

    int retained ( int k ) const
    {
        if ( k < 0 || k > N ) throw domain_error( "MartingaleTower: index " + std::to_string( k ) + " out of range" );
        return direction == TowerDirection::increasing ? k : N - k;
    }

    LpOperator expectation ( int k, Index ancilla = 1 ) const { return LpOperator::cond_exp( N, retained( k ), ancilla ); }
};

inline CMatrix cond_exp ( const MartingaleTower & tower, int k, const CMatrix & x )
{
    return tower.expectation( k ).apply( x );
}

// d_k = E_k x - E_{k-1} x (increasing) or E_{k-1} x - E_k x (decreasing), k = 1..N
inline MatrixFamily martingale_differences ( const MartingaleTower & tower, const CMatrix & x )
{
    MatrixFamily d;
    for ( int k = 1; k <= tower.N; ++k )
    {
        const CMatrix a = cond_exp( tower, k, x ), b = cond_exp( tower, k - 1, x );
        d.push_back( tower.direction == TowerDirection::increasing ? CMatrix( a - b ) : CMatrix( b - a ) );
    }
    return d;
}

///
/// Col-bound lower estimate of {E_0, …, E_N} amplified by M_m
///
inline BoundEstimate stein_colbound ( const MartingaleTower & tower, PExponent p, const SearchCfg & cfg = {},
                                      Index amplification = 2 )
{
    OperatorFamily F;
    for ( int k = 0; k <= tower.N; ++k ) F.push_back( tower.expectation( k, amplification ) );
    return col_bound_estimate( F, p, cfg );
}

struct CesaroResult
{
    double       value;   // ‖(√m D_m x)_{1≤m≤M}‖_{Rad}
    double       ratio;   // value / ‖x‖_p
    MatrixFamily family;
};

///
/// S_m = (1/(m+1)) Σ_{k≤m} T^k x, D_m = S_m − S_{m−1}; Rad norm of (√m D_m)_{m ≤ M}
///
inline CesaroResult cesaro_square_function ( const LpOperator & T, const CMatrix & x, int M, PExponent p,
                                             const ConvexCfg & cfg = {} )
{
    if ( M < 1 ) throw domain_error( "cesaro_square_function: M must be >= 1" );
    if ( x.rows() != T.dim() || x.cols() != T.dim() ) throw shape_error( "cesaro_square_function: x has wrong shape" );

    CMatrix      power = x;     // T^k x
    CMatrix      sum   = x;     // Σ_{k≤m} T^k x
    CMatrix      prev  = x;     // S_0
    MatrixFamily fam;
    for ( int m = 1; m <= M; ++m )
    {
        power              = T.apply( power );
        sum += power;
        const CMatrix s    = sum / double( m + 1 );
        fam.push_back( std::sqrt( double( m ) ) * ( s - prev ) );
        prev = s;
    }

    const double v  = rad_norm( fam, p, cfg );
    const double nx = schatten_norm( x, p );
    return { v, nx > 0.0 ? v / nx : 0.0, std::move( fam ) };
}

// (Σ_{m≤M} 1/(m(m+1)²))^{1/2}: the Cesàro value for T = E is ‖Ex − x‖_p times this
inline double cesaro_expectation_factor ( int M )
{
    double acc = 0.0;
    for ( int m = M; m >= 1; --m ) acc += 1.0 / ( double( m ) * ( m + 1.0 ) * ( m + 1.0 ) );
    return std::sqrt( acc );
}

}// namespace nclp::models
