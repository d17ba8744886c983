#pragma once
//
// Linear maps on M_d (superoperators) in structured form.
//
// Vectorisation is column-major: vec(a x b) = (bᵀ ⊗ a) vec(x).
//

#include "nclp/core_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <functional>
#include <memory>
#include <string>
#include <variant>

namespace nclp
{

class LpOperator;

namespace ops
{

// x ↦ a x
struct LeftMult
{
    CMatrix a;
};

// x ↦ x b
struct RightMult
{
    CMatrix b;
};

// x ↦ [m_ij x_ij]
struct SchurMult
{
    CMatrix symbol;
};

// x ↦ a x - x b
struct AdPair
{
    CMatrix a, b;
};

//
// Conditional expectation on M_m ⊗ M_2^{⊗N}: keeps the ancilla and the first
// `retained` qubit factors, replaces the remaining ones by their normalized
// trace (tensored with the identity).
//
struct CondExp
{
    int   factors;
    int   retained;
    Index ancilla = 1;
};

// x ↦ P (S ⊙ (P⁻¹ x Q)) Q⁻¹, the diagonal form of every structured kind
struct SchurInBasis
{
    CMatrix P, Pinv, symbol, Q, Qinv;
};

// d² × d² matrix acting on vec(x)
struct Dense
{
    CMatrix matrix;
};

// I_m ⊗ T acting on the d×d blocks of an (md)×(md) matrix
struct Blockwise
{
    std::shared_ptr< const LpOperator > inner;
    Index                               copies;
};

// arbitrary map given by forward and Hilbert-Schmidt adjoint actions
struct Custom
{
    std::string                                   name;
    Index                                         dim;
    std::function< CMatrix ( const CMatrix & ) > forward;
    std::function< CMatrix ( const CMatrix & ) > adjoint;
};

}// namespace ops

namespace detail
{

inline CMatrix partial_trace_expectation ( const CMatrix & x, int factors, int retained, Index ancilla )
{
    const Index keep = ancilla * ( Index( 1 ) << retained );
    const Index rest = Index( 1 ) << ( factors - retained );
    CMatrix     y    = CMatrix::Zero( x.rows(), x.cols() );

    // index = (kept, rest) with rest fastest: i = kept * rest + t
    for ( Index a = 0; a < keep; ++a )
        for ( Index b = 0; b < keep; ++b )
        {
            cplx tr = 0.0;
            for ( Index t = 0; t < rest; ++t ) tr += x( a * rest + t, b * rest + t );
            tr /= double( rest );
            for ( Index t = 0; t < rest; ++t ) y( a * rest + t, b * rest + t ) = tr;
        }
    return y;
}

}// namespace detail

class LpOperator
{
public:
    using Kind = std::variant< ops::LeftMult, ops::RightMult, ops::SchurMult, ops::AdPair, ops::CondExp,
                               ops::SchurInBasis, ops::Dense, ops::Blockwise, ops::Custom >;

    LpOperator ( Kind k )
        : _kind( std::move( k ) )
    {
        _dim = compute_dim();
        validate();
    }

    static LpOperator left      ( CMatrix a )            { return LpOperator( ops::LeftMult{ std::move( a ) } ); }
    static LpOperator right     ( CMatrix b )            { return LpOperator( ops::RightMult{ std::move( b ) } ); }
    static LpOperator schur     ( CMatrix m )            { return LpOperator( ops::SchurMult{ std::move( m ) } ); }
    static LpOperator ad        ( CMatrix a, CMatrix b ) { return LpOperator( ops::AdPair{ std::move( a ), std::move( b ) } ); }
    static LpOperator dense     ( CMatrix d )            { return LpOperator( ops::Dense{ std::move( d ) } ); }
    static LpOperator identity  ( Index d )              { return left( CMatrix::Identity( d, d ) ); }
    static LpOperator cond_exp  ( int factors, int retained, Index ancilla = 1 )
    {
        return LpOperator( ops::CondExp{ factors, retained, ancilla } );
    }

    const Kind & kind () const { return _kind; }
    Index        dim  () const { return _dim; }

    template < typename T > bool     is  () const { return std::holds_alternative< T >( _kind ); }
    template < typename T > const T & as () const { return std::get< T >( _kind ); }

    std::string kind_name () const
    {
        return std::visit(
            [] ( const auto & k ) -> std::string {
                using K = std::decay_t< decltype( k ) >;
                if constexpr ( std::is_same_v< K, ops::LeftMult > )          return "left";
                else if constexpr ( std::is_same_v< K, ops::RightMult > )    return "right";
                else if constexpr ( std::is_same_v< K, ops::SchurMult > )    return "schur";
                else if constexpr ( std::is_same_v< K, ops::AdPair > )       return "ad";
                else if constexpr ( std::is_same_v< K, ops::CondExp > )      return "condexp";
                else if constexpr ( std::is_same_v< K, ops::SchurInBasis > ) return "schur-in-basis";
                else if constexpr ( std::is_same_v< K, ops::Dense > )        return "dense";
                else if constexpr ( std::is_same_v< K, ops::Blockwise > )    return "blockwise";
                else                                                          return "custom:" + k.name;
            },
            _kind );
    }

    CMatrix apply ( const CMatrix & x ) const
    {
        check_arg( x );
        return std::visit(
            [&] ( const auto & k ) -> CMatrix {
                using K = std::decay_t< decltype( k ) >;
                if constexpr ( std::is_same_v< K, ops::LeftMult > )       return k.a * x;
                else if constexpr ( std::is_same_v< K, ops::RightMult > ) return x * k.b;
                else if constexpr ( std::is_same_v< K, ops::SchurMult > ) return k.symbol.cwiseProduct( x );
                else if constexpr ( std::is_same_v< K, ops::AdPair > )    return k.a * x - x * k.b;
                else if constexpr ( std::is_same_v< K, ops::CondExp > )
                    return detail::partial_trace_expectation( x, k.factors, k.retained, k.ancilla );
                else if constexpr ( std::is_same_v< K, ops::SchurInBasis > )
                    return k.P * k.symbol.cwiseProduct( k.Pinv * x * k.Q ) * k.Qinv;
                else if constexpr ( std::is_same_v< K, ops::Dense > )
                {
                    CMatrix y( _dim, _dim );
                    Eigen::Map< CVector >( y.data(), y.size() ) =
                        k.matrix * Eigen::Map< const CVector >( x.data(), x.size() );
                    return y;
                }
                else if constexpr ( std::is_same_v< K, ops::Blockwise > ) return blockwise( *k.inner, k.copies, x, false );
                else                                                       return k.forward( x );
            },
            _kind );
    }

    // adjoint for the Hilbert-Schmidt inner product tr(x y*)
    CMatrix apply_adjoint ( const CMatrix & y ) const
    {
        check_arg( y );
        return std::visit(
            [&] ( const auto & k ) -> CMatrix {
                using K = std::decay_t< decltype( k ) >;
                if constexpr ( std::is_same_v< K, ops::LeftMult > )       return k.a.adjoint() * y;
                else if constexpr ( std::is_same_v< K, ops::RightMult > ) return y * k.b.adjoint();
                else if constexpr ( std::is_same_v< K, ops::SchurMult > ) return k.symbol.conjugate().cwiseProduct( y );
                else if constexpr ( std::is_same_v< K, ops::AdPair > )    return k.a.adjoint() * y - y * k.b.adjoint();
                else if constexpr ( std::is_same_v< K, ops::CondExp > )
                    return detail::partial_trace_expectation( y, k.factors, k.retained, k.ancilla );
                else if constexpr ( std::is_same_v< K, ops::SchurInBasis > )
                    return k.Pinv.adjoint() * k.symbol.conjugate().cwiseProduct( k.P.adjoint() * y * k.Qinv.adjoint() ) *
                           k.Q.adjoint();
                else if constexpr ( std::is_same_v< K, ops::Dense > )
                {
                    CMatrix x( _dim, _dim );
                    Eigen::Map< CVector >( x.data(), x.size() ) =
                        k.matrix.adjoint() * Eigen::Map< const CVector >( y.data(), y.size() );
                    return x;
                }
                else if constexpr ( std::is_same_v< K, ops::Blockwise > ) return blockwise( *k.inner, k.copies, y, true );
                else                                                       return k.adjoint( y );
            },
            _kind );
    }

    ///
    /// d² × d² matrix of the map on vec(x)
    ///
    CMatrix materialize () const
    {
        const Index d  = _dim;
        const Index d2 = d * d;

        if ( is< ops::Dense >() ) return as< ops::Dense >().matrix;

        if ( is< ops::LeftMult >() )
            return Eigen::kroneckerProduct( CMatrix::Identity( d, d ), as< ops::LeftMult >().a );
        if ( is< ops::RightMult >() )
            return Eigen::kroneckerProduct( CMatrix( as< ops::RightMult >().b.transpose() ), CMatrix::Identity( d, d ) );
        if ( is< ops::SchurMult >() )
        {
            const auto & m = as< ops::SchurMult >().symbol;
            return Eigen::Map< const CVector >( m.data(), m.size() ).asDiagonal();
        }
        if ( is< ops::AdPair >() )
        {
            const auto & k = as< ops::AdPair >();
            return Eigen::kroneckerProduct( CMatrix::Identity( d, d ), k.a ) -
                   Eigen::kroneckerProduct( CMatrix( k.b.transpose() ), CMatrix::Identity( d, d ) );
        }

        CMatrix m( d2, d2 );
        CMatrix e = CMatrix::Zero( d, d );
        for ( Index j = 0; j < d2; ++j )
        {
            e.data()[j] = 1.0;
            const CMatrix y = apply( e );
            m.col( j )      = Eigen::Map< const CVector >( y.data(), y.size() );
            e.data()[j]     = 0.0;
        }
        return m;
    }

private:
    static CMatrix blockwise ( const LpOperator & inner, Index copies, const CMatrix & x, bool adj )
    {
        const Index d = inner.dim();
        CMatrix     y( x.rows(), x.cols() );
        for ( Index r = 0; r < copies; ++r )
            for ( Index s = 0; s < copies; ++s )
            {
                const CMatrix blk = x.block( r * d, s * d, d, d );
                y.block( r * d, s * d, d, d ) = adj ? inner.apply_adjoint( blk ) : inner.apply( blk );
            }
        return y;
    }

    void check_arg ( const CMatrix & x ) const
    {
        if ( x.rows() != _dim || x.cols() != _dim )
            throw shape_error( "LpOperator(" + kind_name() + "): argument is " + std::to_string( x.rows() ) + "x" +
                               std::to_string( x.cols() ) + ", expected " + std::to_string( _dim ) + "x" +
                               std::to_string( _dim ) );
    }

    Index compute_dim () const
    {
        return std::visit(
            [] ( const auto & k ) -> Index {
                using K = std::decay_t< decltype( k ) >;
                if constexpr ( std::is_same_v< K, ops::LeftMult > )          return k.a.rows();
                else if constexpr ( std::is_same_v< K, ops::RightMult > )    return k.b.rows();
                else if constexpr ( std::is_same_v< K, ops::SchurMult > )    return k.symbol.rows();
                else if constexpr ( std::is_same_v< K, ops::AdPair > )       return k.a.rows();
                else if constexpr ( std::is_same_v< K, ops::CondExp > )      return k.ancilla * ( Index( 1 ) << k.factors );
                else if constexpr ( std::is_same_v< K, ops::SchurInBasis > ) return k.symbol.rows();
                else if constexpr ( std::is_same_v< K, ops::Dense > )
                    return Index( std::llround( std::sqrt( double( k.matrix.rows() ) ) ) );
                else if constexpr ( std::is_same_v< K, ops::Blockwise > )    return k.inner->dim() * k.copies;
                else                                                          return k.dim;
            },
            _kind );
    }

    void validate () const
    {
        auto square = [] ( const CMatrix & m, const char * what ) {
            if ( m.rows() < 1 || m.rows() != m.cols() )
                throw shape_error( std::string( "LpOperator: " ) + what + " must be square and nonempty" );
            if ( !m.allFinite() ) throw domain_error( std::string( "LpOperator: " ) + what + " has non-finite entries" );
        };

        std::visit(
            [&] ( const auto & k ) {
                using K = std::decay_t< decltype( k ) >;
                if constexpr ( std::is_same_v< K, ops::LeftMult > )       square( k.a, "left factor" );
                else if constexpr ( std::is_same_v< K, ops::RightMult > ) square( k.b, "right factor" );
                else if constexpr ( std::is_same_v< K, ops::SchurMult > ) square( k.symbol, "Schur symbol" );
                else if constexpr ( std::is_same_v< K, ops::AdPair > )
                {
                    square( k.a, "Ad left factor" );
                    square( k.b, "Ad right factor" );
                    if ( k.a.rows() != k.b.rows() ) throw shape_error( "LpOperator: Ad factors differ in size" );
                }
                else if constexpr ( std::is_same_v< K, ops::CondExp > )
                {
                    if ( k.factors < 0 || k.factors > 12 || k.retained < 0 || k.retained > k.factors || k.ancilla < 1 )
                        throw domain_error( "LpOperator: conditional expectation index out of range" );
                }
                else if constexpr ( std::is_same_v< K, ops::SchurInBasis > )
                {
                    square( k.P, "basis P" );
                    square( k.Q, "basis Q" );
                    square( k.symbol, "symbol" );
                }
                else if constexpr ( std::is_same_v< K, ops::Dense > )
                {
                    square( k.matrix, "dense superoperator" );
                    if ( _dim * _dim != k.matrix.rows() )
                        throw shape_error( "LpOperator: dense superoperator size is not a square number" );
                }
                else if constexpr ( std::is_same_v< K, ops::Blockwise > )
                {
                    if ( !k.inner || k.copies < 1 ) throw domain_error( "LpOperator: bad blockwise amplification" );
                }
                else
                {
                    if ( k.dim < 1 || !k.forward || !k.adjoint ) throw domain_error( "LpOperator: incomplete custom map" );
                }
            },
            _kind );
    }

    Kind  _kind;
    Index _dim = 0;
};

//
// basic algebra on operators
//

inline LpOperator scaled ( const LpOperator & op, cplx z )
{
    return std::visit(
        [&] ( const auto & k ) -> LpOperator {
            using K = std::decay_t< decltype( k ) >;
            if constexpr ( std::is_same_v< K, ops::LeftMult > )          return LpOperator::left( z * k.a );
            else if constexpr ( std::is_same_v< K, ops::RightMult > )    return LpOperator::right( z * k.b );
            else if constexpr ( std::is_same_v< K, ops::SchurMult > )    return LpOperator::schur( z * k.symbol );
            else if constexpr ( std::is_same_v< K, ops::AdPair > )       return LpOperator::ad( z * k.a, z * k.b );
            else if constexpr ( std::is_same_v< K, ops::SchurInBasis > )
                return LpOperator( ops::SchurInBasis{ k.P, k.Pinv, z * k.symbol, k.Q, k.Qinv } );
            else if constexpr ( std::is_same_v< K, ops::Blockwise > )
                return LpOperator( ops::Blockwise{ std::make_shared< const LpOperator >( scaled( *k.inner, z ) ), k.copies } );
            else return LpOperator::dense( z * op.materialize() );
        },
        op.kind() );
}

// a ∘ b
inline LpOperator compose ( const LpOperator & a, const LpOperator & b )
{
    if ( a.dim() != b.dim() ) throw shape_error( "compose: dimension mismatch" );
    if ( a.is< ops::LeftMult >() && b.is< ops::LeftMult >() )
        return LpOperator::left( a.as< ops::LeftMult >().a * b.as< ops::LeftMult >().a );
    if ( a.is< ops::RightMult >() && b.is< ops::RightMult >() )
        return LpOperator::right( b.as< ops::RightMult >().b * a.as< ops::RightMult >().b );
    if ( a.is< ops::SchurMult >() && b.is< ops::SchurMult >() )
        return LpOperator::schur( a.as< ops::SchurMult >().symbol.cwiseProduct( b.as< ops::SchurMult >().symbol ) );
    return LpOperator::dense( a.materialize() * b.materialize() );
}

// αa + βb
inline LpOperator combine ( cplx alpha, const LpOperator & a, cplx beta, const LpOperator & b )
{
    if ( a.dim() != b.dim() ) throw shape_error( "combine: dimension mismatch" );
    if ( a.is< ops::LeftMult >() && b.is< ops::LeftMult >() )
        return LpOperator::left( alpha * a.as< ops::LeftMult >().a + beta * b.as< ops::LeftMult >().a );
    if ( a.is< ops::SchurMult >() && b.is< ops::SchurMult >() )
        return LpOperator::schur( alpha * a.as< ops::SchurMult >().symbol + beta * b.as< ops::SchurMult >().symbol );
    return LpOperator::dense( alpha * a.materialize() + beta * b.materialize() );
}

inline LpOperator adjoint ( const LpOperator & op )
{
    return std::visit(
        [&] ( const auto & k ) -> LpOperator {
            using K = std::decay_t< decltype( k ) >;
            if constexpr ( std::is_same_v< K, ops::LeftMult > )       return LpOperator::left( k.a.adjoint() );
            else if constexpr ( std::is_same_v< K, ops::RightMult > ) return LpOperator::right( k.b.adjoint() );
            else if constexpr ( std::is_same_v< K, ops::SchurMult > ) return LpOperator::schur( k.symbol.conjugate() );
            else if constexpr ( std::is_same_v< K, ops::AdPair > )    return LpOperator::ad( k.a.adjoint(), k.b.adjoint() );
            else if constexpr ( std::is_same_v< K, ops::CondExp > )   return op;
            else if constexpr ( std::is_same_v< K, ops::Blockwise > )
                return LpOperator( ops::Blockwise{ std::make_shared< const LpOperator >( adjoint( *k.inner ) ), k.copies } );
            else return LpOperator::dense( op.materialize().adjoint() );
        },
        op.kind() );
}

///
/// I_m ⊗ T on M_m ⊗ M_d
///
inline LpOperator amplify ( const LpOperator & op, Index m )
{
    if ( m < 1 ) throw domain_error( "amplify: level must be >= 1" );
    if ( m == 1 ) return op;

    const CMatrix im = CMatrix::Identity( m, m );
    const CMatrix jm = CMatrix::Ones( m, m );

    return std::visit(
        [&] ( const auto & k ) -> LpOperator {
            using K = std::decay_t< decltype( k ) >;
            if constexpr ( std::is_same_v< K, ops::LeftMult > )    return LpOperator::left( Eigen::kroneckerProduct( im, k.a ) );
            else if constexpr ( std::is_same_v< K, ops::RightMult > ) return LpOperator::right( Eigen::kroneckerProduct( im, k.b ) );
            else if constexpr ( std::is_same_v< K, ops::SchurMult > ) return LpOperator::schur( Eigen::kroneckerProduct( jm, k.symbol ) );
            else if constexpr ( std::is_same_v< K, ops::AdPair > )
                return LpOperator::ad( Eigen::kroneckerProduct( im, k.a ), Eigen::kroneckerProduct( im, k.b ) );
            else if constexpr ( std::is_same_v< K, ops::CondExp > )
                return LpOperator::cond_exp( k.factors, k.retained, k.ancilla * m );
            else if constexpr ( std::is_same_v< K, ops::SchurInBasis > )
                return LpOperator( ops::SchurInBasis{ Eigen::kroneckerProduct( im, k.P ), Eigen::kroneckerProduct( im, k.Pinv ),
                                                      Eigen::kroneckerProduct( jm, k.symbol ), Eigen::kroneckerProduct( im, k.Q ),
                                                      Eigen::kroneckerProduct( im, k.Qinv ) } );
            else if constexpr ( std::is_same_v< K, ops::Blockwise > )
                return LpOperator( ops::Blockwise{ k.inner, k.copies * m } );
            else
                return LpOperator( ops::Blockwise{ std::make_shared< const LpOperator >( op ), m } );
        },
        op.kind() );
}

///
/// Choi matrix Σ_ij E_ij ⊗ T(E_ij); PSD iff T is completely positive
///
inline CMatrix choi_matrix ( const LpOperator & op )
{
    const Index d = op.dim();
    CMatrix     c = CMatrix::Zero( d * d, d * d );
    for ( Index i = 0; i < d; ++i )
        for ( Index j = 0; j < d; ++j )
            c.block( i * d, j * d, d, d ) = op.apply( matrix_unit( d, d, i, j ) );
    return c;
}

inline double min_hermitian_eigenvalue ( const CMatrix & h )
{
    Eigen::SelfAdjointEigenSolver< CMatrix > eig( 0.5 * ( h + h.adjoint() ), Eigen::EigenvaluesOnly );
    return eig.eigenvalues().minCoeff();
}

// max ‖T x - D x‖ over random probes, relative to ‖x‖ (Frobenius)
inline double spot_check ( const LpOperator & a, const LpOperator & b, int probes, std::mt19937_64 & rng )
{
    double worst = 0.0;
    for ( int i = 0; i < probes; ++i )
    {
        const CMatrix x = random_matrix( a.dim(), a.dim(), rng );
        worst           = std::max( worst, ( a.apply( x ) - b.apply( x ) ).norm() / x.norm() );
    }
    return worst;
}

///
/// dense form of a structured operator, checked on random probes
///
inline LpOperator to_dense ( const LpOperator & op, double tol = 1e-10 )
{
    LpOperator      d = LpOperator::dense( op.materialize() );
    std::mt19937_64 rng( 0xD5 );
    const double    scale = std::max( 1.0, d.as< ops::Dense >().matrix.cwiseAbs().maxCoeff() );
    if ( spot_check( op, d, 3, rng ) > tol * scale * double( op.dim() ) )
        throw numeric_error( "to_dense: materialised operator disagrees with structured form" );
    return d;
}

}// namespace nclp
