#pragma once
//
// Schur multiplier semigroups with symbol a_ij = ‖α_i − β_j‖.
//

#include "nclp/funcalc.hpp"

namespace nclp::models
{

struct SchurSymbol
{
    std::vector< RVector > alpha, beta;

    CMatrix matrix () const
    {
        if ( alpha.empty() || beta.empty() ) throw domain_error( "SchurSymbol: empty point set" );
        const Index dim = alpha.front().size();
        CMatrix     a( Index( alpha.size() ), Index( beta.size() ) );
        for ( std::size_t i = 0; i < alpha.size(); ++i )
            for ( std::size_t j = 0; j < beta.size(); ++j )
            {
                if ( alpha[i].size() != dim || beta[j].size() != dim )
                    throw shape_error( "SchurSymbol: points of different dimension" );
                a( Index( i ), Index( j ) ) = ( alpha[i] - beta[j] ).norm();
            }
        return a;
    }
};

// α = β = {1·e₁, …, n·e₁}
inline SchurSymbol collinear_symbol ( int n )
{
    SchurSymbol s;
    for ( int i = 1; i <= n; ++i ) s.alpha.push_back( RVector::Constant( 1, double( i ) ) );
    s.beta = s.alpha;
    return s;
}

inline SchurSymbol random_symbol ( int n, int dim, std::mt19937_64 & rng )
{
    std::normal_distribution< double > g;
    SchurSymbol                        s;
    for ( int i = 0; i < n; ++i )
    {
        RVector a( dim ), b( dim );
        for ( int k = 0; k < dim; ++k ) a( k ) = g( rng ), b( k ) = g( rng );
        s.alpha.push_back( a );
        s.beta.push_back( b );
    }
    return s;
}

inline LpOperator schur_generator ( const SchurSymbol & sym ) { return LpOperator::schur( sym.matrix() ); }

///
/// T_t = Schur multiplier with symbol [e^{-t a_ij}]
///
inline LpOperator schur_semigroup ( const SchurSymbol & sym, double t )
{
    if ( !( t >= 0.0 ) ) throw domain_error( "schur_semigroup: t must be >= 0" );
    const CMatrix a = sym.matrix();
    return LpOperator::schur( ( -t * a.real() ).array().exp().cast< cplx >().matrix() );
}

///
/// x ↦ [f̊(a_ij) x_ij]
///
inline CMatrix schur_hinf_apply ( const SchurSymbol & sym, const HolFn & f, const CMatrix & x )
{
    const CMatrix a = sym.matrix();
    if ( x.rows() != a.rows() || x.cols() != a.cols() ) throw shape_error( "schur_hinf_apply: shape mismatch" );
    CMatrix y( x.rows(), x.cols() );
    for ( Index i = 0; i < x.rows(); ++i )
        for ( Index j = 0; j < x.cols(); ++j ) y( i, j ) = f.at_spectrum( a( i, j ) ) * x( i, j );
    return y;
}

}// namespace nclp::models
