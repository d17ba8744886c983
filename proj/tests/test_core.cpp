#include "test_util.hpp"

#include <sstream>

using namespace nclp;
using namespace nclp::test;

//
// core matrix helpers
//

TEST( Schatten, IdentityHilbertSchmidt )
{
    EXPECT_NEAR( schatten_norm( CMatrix::Identity( 3, 3 ), 2.0 ), std::sqrt( 3.0 ), 1e-14 );
}

TEST( Schatten, RankOneAllOnesHasNormSqrtN )
{
    for ( int n : { 2, 5, 9 } )
    {
        const CMatrix x = CMatrix::Constant( n, n, 1.0 / std::sqrt( double( n ) ) );
        for ( double p : { 1.0, 1.5, 2.0, 4.0 } ) EXPECT_NEAR( schatten_norm( x, p ), std::sqrt( double( n ) ), 1e-12 );
        EXPECT_NEAR( schatten_norm( x, PExponent::infinity() ), std::sqrt( double( n ) ), 1e-12 );
    }
}

TEST( Schatten, TraceNormOfDiagonal )
{
    EXPECT_NEAR( schatten_norm( diag( { 3.0, 4.0 } ), 1.0 ), 7.0, 1e-14 );
    EXPECT_NEAR( schatten_norm( diag( { 3.0, -4.0 } ), PExponent::infinity() ), 4.0, 1e-14 );
}

TEST( Schatten, RejectsExponentBelowOne )
{
    EXPECT_THROW( PExponent( 0.5 ), domain_error );
    EXPECT_THROW( PExponent( std::nan( "" ) ), domain_error );
    EXPECT_TRUE( PExponent( 1.0 ).conjugate().is_infinite() );
    EXPECT_NEAR( PExponent( 4.0 ).conjugate().value(), 4.0 / 3.0, 1e-15 );
}

TEST( Schatten, HolderAdjointAndModulusInvariance )
{
    std::mt19937_64 rng( 11 );
    for ( int trial = 0; trial < 20; ++trial )
    {
        const CMatrix x = random_matrix( 4, 4, rng ), y = random_matrix( 4, 4, rng );
        for ( auto [p, q] : { std::pair{ 2.0, 2.0 }, std::pair{ 3.0, 1.5 }, std::pair{ 4.0, 4.0 } } )
        {
            const double r = 1.0 / ( 1.0 / p + 1.0 / q );
            EXPECT_LE( schatten_norm( x * y, r ), schatten_norm( x, p ) * schatten_norm( y, q ) + 1e-9 );
        }
        for ( double p : { 1.0, 1.7, 3.0 } )
        {
            EXPECT_NEAR( schatten_norm( x.adjoint(), p ), schatten_norm( x, p ), 1e-10 );
            EXPECT_NEAR( schatten_norm( modulus( x ), p ), schatten_norm( x, p ), 1e-10 );
            const double inf = schatten_norm( x, PExponent::infinity() );
            EXPECT_LE( inf, schatten_norm( x, p ) + 1e-12 );
            EXPECT_LE( schatten_norm( x, p ), std::pow( 4.0, 1.0 / p ) * inf + 1e-12 );
        }
    }
}

TEST( Schatten, DualElementAttainsNorm )
{
    std::mt19937_64 rng( 12 );
    for ( double p : { 1.0, 1.5, 2.0, 3.0, 8.0 } )
    {
        const CMatrix x = random_matrix( 3, 3, rng );
        const CMatrix w = dual_element( x, p );
        EXPECT_NEAR( schatten_norm( w, PExponent( p ).conjugate() ), 1.0, 1e-10 );
        EXPECT_NEAR( ( w.adjoint() * x ).trace().real(), schatten_norm( x, p ), 1e-8 );
    }
}

TEST( Modulus, Examples )
{
    EXPECT_LT( ( modulus( diag( { -2.0, cplx( 0, 1 ) } ) ) - diag( { 2.0, 1.0 } ) ).norm(), 1e-14 );
    EXPECT_LT( ( modulus( matrix_unit( 2, 2, 1, 0 ) ) - matrix_unit( 2, 2, 0, 0 ) ).norm(), 1e-14 );
    std::mt19937_64 rng( 3 );
    const CMatrix   p = random_psd( 4, rng );
    EXPECT_LT( rel_diff( modulus( p ), p ), 1e-10 );
}

TEST( TracePair, Examples )
{
    EXPECT_EQ( trace_pair( matrix_unit( 2, 2, 0, 0 ), matrix_unit( 2, 2, 0, 0 ) ), cplx( 1.0 ) );
    EXPECT_EQ( trace_pair( matrix_unit( 2, 2, 0, 1 ), matrix_unit( 2, 2, 0, 1 ) ), cplx( 0.0 ) );

    std::mt19937_64 rng( 4 );
    const CMatrix   x = random_matrix( 3, 3, rng ), y = random_matrix( 3, 3, rng );
    cplx            acc = 0.0;
    for ( Index i = 0; i < 3; ++i )
        for ( Index k = 0; k < 3; ++k ) acc += x( i, k ) * y( k, i );
    EXPECT_LT( std::abs( trace_pair( x, y ) - acc ), 1e-13 );
    EXPECT_LT( std::abs( trace_pair( x, y ) - trace_pair( y, x ) ), 1e-13 );
    EXPECT_THROW( trace_pair( CMatrix::Zero( 2, 3 ), CMatrix::Zero( 2, 3 ) ), shape_error );
}

TEST( PsdSqrt, Examples )
{
    EXPECT_LT( ( psd_sqrt( diag( { 4.0, 9.0 } ) ) - diag( { 2.0, 3.0 } ) ).norm(), 1e-14 );
    EXPECT_EQ( psd_sqrt( CMatrix::Zero( 3, 3 ) ).norm(), 0.0 );
    std::mt19937_64 rng( 5 );
    for ( int t = 0; t < 5; ++t )
    {
        const CMatrix a = random_psd( 5, rng );
        const CMatrix y = psd_sqrt( a );
        EXPECT_LE( spectral_norm( y * y - a ), 1e-10 * std::max( 1.0, spectral_norm( a ) ) );
    }
    EXPECT_THROW( psd_sqrt( diag( { 1.0, -1.0 } ) ), domain_error );
    EXPECT_THROW( psd_sqrt( mat2( 0, 1, 0, 0 ) ), domain_error );
}

TEST( MatrixText, RoundTripIsExact )
{
    std::mt19937_64 rng( 6 );
    const CMatrix   x = random_matrix( 3, 2, rng );
    std::stringstream ss;
    write_matrix( ss, x );
    const CMatrix y = read_matrix( ss );
    EXPECT_EQ( ( x - y ).norm(), 0.0 );
}

//
// column / row / sum norms
//

TEST( FamilyNorms, ColumnRowExamples )
{
    const MatrixFamily xs{ matrix_unit( 2, 2, 0, 0 ), matrix_unit( 2, 2, 1, 0 ) };
    EXPECT_NEAR( col_norm( xs, 3.0 ), std::sqrt( 2.0 ), 1e-14 );
    EXPECT_NEAR( row_norm( xs, 3.0 ), std::cbrt( 2.0 ), 1e-14 );
    EXPECT_NEAR( intersection_norm( xs, 3.0 ), std::sqrt( 2.0 ), 1e-14 );

    std::mt19937_64 rng( 7 );
    const CMatrix   x = random_matrix( 3, 3, rng );
    for ( double p : { 1.0, 2.5 } )
    {
        EXPECT_NEAR( col_norm( { x }, p ), schatten_norm( x, p ), 1e-12 );
        EXPECT_NEAR( row_norm( { x }, p ), schatten_norm( x, p ), 1e-12 );
    }

    const auto fam = random_family( 4, 3, rng );
    double     hs  = 0.0;
    for ( const auto & m : fam ) hs += m.squaredNorm();
    EXPECT_NEAR( col_norm( fam, 2.0 ), std::sqrt( hs ), 1e-12 );
    EXPECT_NEAR( row_norm( fam, 1.5 ), col_norm( adjoints( fam ), 1.5 ), 1e-12 );
}

TEST( FamilyNorms, GramVariants )
{
    std::mt19937_64 rng( 8 );
    const auto      fam = random_family( 3, 3, rng );
    const double    p   = 1.5;
    EXPECT_NEAR( gram_col_norm( fam, CMatrix::Identity( 3, 3 ), p ), col_norm( fam, p ), 1e-10 );
    EXPECT_NEAR( gram_col_norm( fam, 2.0 * CMatrix::Identity( 3, 3 ), p ), std::sqrt( 2.0 ) * col_norm( fam, p ), 1e-10 );
    const CMatrix sum = fam[0] + fam[1] + fam[2];
    EXPECT_NEAR( gram_col_norm( fam, CMatrix::Ones( 3, 3 ), p ), schatten_norm( sum, p ), 1e-9 );
    EXPECT_THROW( gram_col_norm( fam, diag( { 1.0, -1.0, 1.0 } ), p ), domain_error );
}

TEST( FamilyNorms, TensorExtension )
{
    std::mt19937_64 rng( 9 );
    const auto      fam = random_family( 3, 2, rng );

    const auto id = tensor_extend( CMatrix::Identity( 3, 3 ), fam, 3.0 );
    EXPECT_NEAR( id.col_out, id.col_in, 1e-12 );
    EXPECT_NEAR( id.row_out, id.row_in, 1e-12 );

    const auto pr = tensor_extend( matrix_unit( 1, 3, 0, 0 ), fam, 3.0 );
    EXPECT_NEAR( pr.col_out, schatten_norm( fam[0], 3.0 ), 1e-12 );

    for ( int t = 0; t < 10; ++t )
    {
        CMatrix T = random_matrix( 4, 3, rng );
        T /= spectral_norm( T );
        for ( double p : { 1.0, 2.0, 5.0 } ) EXPECT_TRUE( tensor_extend( T, fam, p ).contraction_ok );
    }
    EXPECT_THROW( tensor_extend( 2.0 * CMatrix::Identity( 3, 3 ), fam, 2.0 ), domain_error );
}

TEST( FamilyNorms, PermutationPhaseAndMonotonicity )
{
    std::mt19937_64 rng( 10 );
    auto            fam = random_family( 4, 3, rng );
    for ( double p : { 1.0, 1.5, 3.0 } )
    {
        const double c = col_norm( fam, p ), r = row_norm( fam, p ), s = sum_norm( fam, p ).value;
        auto         g = fam;
        std::swap( g[0], g[3] );
        g[1] *= std::polar( 1.0, 0.7 );
        EXPECT_NEAR( col_norm( g, p ), c, 1e-10 );
        EXPECT_NEAR( row_norm( g, p ), r, 1e-10 );
        EXPECT_NEAR( sum_norm( g, p ).value, s, 1e-4 * s );

        auto dropped = fam;
        dropped.pop_back();
        EXPECT_LE( col_norm( dropped, p ), c + 1e-12 );
        EXPECT_LE( row_norm( dropped, p ), r + 1e-12 );
    }
}

TEST( FamilyNorms, TraceClassComparison )
{
    std::mt19937_64 rng( 13 );
    for ( int t = 0; t < 10; ++t )
    {
        const auto fam = random_family( 3, 3, rng );
        double     acc = 0.0;
        for ( const auto & m : fam ) acc += std::pow( schatten_norm( m, 1.0 ), 2 );
        EXPECT_LE( std::sqrt( acc ), col_norm( fam, 1.0 ) + 1e-9 );
    }
}

TEST( Rademacher, Examples )
{
    const MatrixFamily orth{ matrix_unit( 2, 2, 0, 0 ), matrix_unit( 2, 2, 1, 1 ) };
    EXPECT_NEAR( rad_average( orth, 2.0 ).value, std::sqrt( 2.0 ), 1e-14 );

    std::mt19937_64 rng( 14 );
    const CMatrix   x = random_matrix( 3, 3, rng );
    EXPECT_NEAR( rad_average( { x }, 3.0 ).value, schatten_norm( x, 3.0 ), 1e-13 );

    const auto fam   = random_family( 3, 3, rng );
    const auto exact = rad_average( fam, 3.0 );
    const auto mc    = rad_average( fam, 3.0, RadMode::montecarlo, 100000, 99 );
    EXPECT_EQ( exact.patterns, 4u );
    EXPECT_LE( std::abs( exact.value - mc.value ), 3.0 * mc.std_error );
    EXPECT_EQ( mc.value, rad_average( fam, 3.0, RadMode::montecarlo, 100000, 99 ).value );

    EXPECT_THROW( rad_average( random_family( 21, 1, rng ), 2.0 ), domain_error );
}

TEST( Rademacher, SecondMomentEqualsColumnNormAtTwo )
{
    std::mt19937_64 rng( 15 );
    const auto      fam = random_family( 5, 3, rng );
    const auto      l2  = rad_average( fam, 2.0, RadMode::exact, 0, 0, RadMoment::second );
    EXPECT_NEAR( l2.value, col_norm( fam, 2.0 ), 1e-12 );
    EXPECT_LE( rad_average( fam, 2.0 ).value, l2.value + 1e-12 );
}

// reference values from tests/oracles/sum_norm_p1.py (conic solver)
TEST( SumNorm, MatchesConicOracleAtTraceClass )
{
    const std::vector< std::pair< MatrixFamily, double > > cases{
        { { mat2( 1, 0, 0, 0 ), mat2( 0, 0, 0, 1 ) }, 2.0 },
        { { mat2( 0, 1, 0, 0 ), mat2( 0, 0, 1, 0 ) }, 2.0 },
        { { mat2( 1, 2, 0, -1 ), mat2( 0.5, 0, 1, 1 ), mat2( 0, -1, 2, 0 ) }, 4.9573285139 },
        { { mat2( 1, 0, 0, 0 ), mat2( 0, 0, 1, 0 ) }, 1.4142135624 },
    };
    for ( const auto & [fam, ref] : cases )
    {
        const auto r = sum_norm( fam, 1.0 );
        EXPECT_NEAR( r.value, ref, 1e-6 * ref );
        EXPECT_LE( r.lower_bound, r.value );
        EXPECT_TRUE( r.converged );
    }
}

TEST( SumNorm, TrivialCasesAndUpperBound )
{
    std::mt19937_64 rng( 16 );
    const CMatrix   x = random_matrix( 3, 3, rng );
    EXPECT_NEAR( sum_norm( { x }, 1.5 ).value, schatten_norm( x, 1.5 ), 1e-6 );
    EXPECT_EQ( sum_norm( { CMatrix::Zero( 2, 2 ), CMatrix::Zero( 2, 2 ) }, 1.0 ).value, 0.0 );

    for ( int t = 0; t < 5; ++t )
    {
        const auto fam = random_family( 3, 2, rng );
        for ( double p : { 1.0, 1.3, 2.0 } )
        {
            const auto r = sum_norm( fam, p );
            EXPECT_LE( r.value, std::min( col_norm( fam, p ), row_norm( fam, p ) ) + 1e-9 );
            EXPECT_LE( r.lower_bound, r.value + 1e-12 );
        }
    }
}

TEST( Khintchine, HilbertCaseRatiosAreOne )
{
    std::mt19937_64 rng( 17 );
    const auto      r = khintchine_report( random_family( 4, 3, rng ), 2.0 );
    EXPECT_NEAR( r.ratio_l2, 1.0, 1e-9 );
    EXPECT_TRUE( r.lower_ok );
}

TEST( Khintchine, LowerBoundAtFourAndUpperAtOne )
{
    std::mt19937_64 rng( 18 );
    for ( int t = 0; t < 5; ++t )
    {
        EXPECT_TRUE( khintchine_report( random_family( 4, 3, rng ), 4.0 ).lower_ok );
        EXPECT_TRUE( khintchine_report( random_family( 3, 2, rng ), 1.0 ).lower_ok );
    }
}

TEST( FamilyText, RoundTrip )
{
    std::mt19937_64   rng( 19 );
    const auto        fam = random_family( 3, 2, rng );
    std::stringstream ss;
    write_family( ss, fam );
    const auto back = read_family( ss );
    ASSERT_EQ( back.size(), fam.size() );
    for ( std::size_t k = 0; k < fam.size(); ++k ) EXPECT_EQ( ( back[k] - fam[k] ).norm(), 0.0 );
}

TEST( FamilyNorms, ShapeErrors )
{
    EXPECT_THROW( col_norm( {}, 2.0 ), error );
    EXPECT_THROW( col_norm( { CMatrix::Zero( 2, 2 ), CMatrix::Zero( 3, 3 ) }, 2.0 ), shape_error );
}

//
// holomorphic function objects
//

TEST( HolFn, LibraryValuesAndClasses )
{
    EXPECT_NEAR( std::abs( holfn::g()( 1.0 ) - 0.25 ), 0.0, 1e-15 );
    EXPECT_EQ( holfn::g().klass(), HolClass::hinf0 );
    EXPECT_EQ( holfn::zis( 1.0 ).klass(), HolClass::hinf );
    EXPECT_NEAR( std::abs( holfn::gn( 2.0 )( 1.0 ) - 4.0 / 9.0 ), 0.0, 1e-15 );
    EXPECT_NEAR( holfn::sqrtzexp().decay_s(), 0.5, 0.0 );
    EXPECT_NEAR( holfn::zis( 1.5 ).sup_norm( 0.5 ), std::exp( 0.75 ), 1e-3 );
}

TEST( HolFn, ProductAndLookup )
{
    const auto h = holfn::g() * holfn::zexp();
    EXPECT_NEAR( h.theta(), pi / 2, 1e-15 );
    EXPECT_NEAR( std::abs( h( 2.0 ) - holfn::g()( 2.0 ) * holfn::zexp()( 2.0 ) ), 0.0, 1e-15 );
    EXPECT_EQ( holfn::from_id( "gn:3" ).name(), holfn::gn( 3.0 ).name() );
    EXPECT_THROW( holfn::from_id( "nope" ), domain_error );
    EXPECT_THROW( holfn::from_id( "gn:x" ), domain_error );
    EXPECT_THROW( holfn::from_id( "gn" ), domain_error );
}
