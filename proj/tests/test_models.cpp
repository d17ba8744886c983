#include "test_util.hpp"

#include <sstream>

using namespace nclp;
using namespace nclp::models;
using namespace nclp::test;

//
// Schur multiplier semigroups
//

TEST( SchurModel, SemigroupLawAndIdentity )
{
    std::mt19937_64 rng( 61 );
    const auto      sym = random_symbol( 4, 2, rng );
    const CMatrix   x   = random_matrix( 4, 4, rng );
    EXPECT_LT( ( schur_semigroup( sym, 0.0 ).apply( x ) - x ).norm(), 1e-15 );
    const CMatrix st = schur_semigroup( sym, 0.3 ).apply( schur_semigroup( sym, 0.5 ).apply( x ) );
    EXPECT_LT( rel_diff( st, schur_semigroup( sym, 0.8 ).apply( x ) ), 1e-14 );
    EXPECT_THROW( schur_semigroup( sym, -1.0 ), domain_error );
}

TEST( SchurModel, CollinearSymbolIsPositiveAndCompletelyPositive )
{
    const auto    T = schur_semigroup( collinear_symbol( 8 ), 0.7 );
    const CMatrix m = T.as< ops::SchurMult >().symbol;
    EXPECT_GE( min_hermitian_eigenvalue( m ), -1e-10 );
    EXPECT_GE( min_hermitian_eigenvalue( choi_matrix( amplify( schur_semigroup( collinear_symbol( 3 ), 0.7 ), 4 ) ) ), -1e-10 );
    EXPECT_LE( operator_norm( amplify( T, 4 ), 2.0 ).value, 1.0 + 1e-9 );
}

TEST( SchurModel, BoundedCalculusEntrywise )
{
    SchurSymbol s;
    s.alpha = { RVector::Constant( 1, 0.0 ), RVector::Constant( 1, 1.0 ) };
    s.beta  = { RVector::Constant( 1, 1.0 ), RVector::Constant( 1, -2.0 ) };
    // symbol [[1, 2], [0, 3]]; zero entry takes f̊(0) = 0
    const CMatrix x = CMatrix::Ones( 2, 2 );
    EXPECT_LT( ( schur_hinf_apply( s, holfn::g(), x ) - mat2( 0.25, 2.0 / 9.0, 0.0, 3.0 / 16.0 ) ).norm(), 1e-15 );
    EXPECT_LT( ( schur_hinf_apply( s, holfn::constant_one(), x ) - mat2( 1, 1, 0, 1 ) ).norm(), 1e-15 );

    std::mt19937_64 rng( 62 );
    const auto      sym = random_symbol( 3, 2, rng );
    const CMatrix   y   = random_matrix( 3, 3, rng );
    const auto      ext = extended_calculus( schur_generator( sym ), holfn::zis( 0.8 ) );
    EXPECT_LT( rel_diff( ext.op.apply( y ), schur_hinf_apply( sym, holfn::zis( 0.8 ), y ) ), 1e-8 );
}

//
// free group
//

TEST( FreeGroup, WordsAndProducts )
{
    const auto a = GroupPoly::lambda( parse_word( "a" ) ), A = GroupPoly::lambda( parse_word( "A" ) );
    const auto b = GroupPoly::lambda( parse_word( "b" ) );
    const auto e = word_multiply( a, A );
    EXPECT_EQ( e.size(), 1u );
    EXPECT_EQ( e.trace(), cplx( 1.0 ) );
    EXPECT_EQ( word_length( word_multiply( a, b ).terms().begin()->first ), 2 );

    const auto sq = word_multiply( a + A, a + A );
    EXPECT_EQ( sq.coefficient( parse_word( "a a" ) ), cplx( 1.0 ) );
    EXPECT_EQ( sq.coefficient( parse_word( "A A" ) ), cplx( 1.0 ) );
    EXPECT_EQ( sq.trace(), cplx( 2.0 ) );
    EXPECT_EQ( sq.size(), 3u );

    EXPECT_EQ( word_to_string( reduce( parse_word( "a b B c" ) ) ), word_to_string( parse_word( "a c" ) ) );
    EXPECT_EQ( parse_word( "e" ).size(), 0u );
    EXPECT_THROW( word_multiply( a + b, a + b, 1 ), support_overflow );
}

TEST( FreeGroup, StarIsAntiMultiplicativeAndAssociative )
{
    std::mt19937_64 rng( 63 );
    const auto      x = random_poly( 2, 3, 5, rng ), y = random_poly( 2, 3, 5, rng ), z = random_poly( 2, 2, 4, rng );
    const auto      lhs = word_multiply( x, y ).star(), rhs = word_multiply( y.star(), x.star() );
    EXPECT_LT( ( lhs + rhs * cplx( -1.0 ) ).l2_norm(), 1e-12 );
    const auto l = word_multiply( word_multiply( x, y ), z ), r = word_multiply( x, word_multiply( y, z ) );
    EXPECT_LT( ( l + r * cplx( -1.0 ) ).l2_norm(), 1e-11 );
    EXPECT_NEAR( trace_product( x.star(), x ).real(), x.l2_norm() * x.l2_norm(), 1e-12 );
}

// rational moments from tests/oracles/free_group_moments.py
TEST( FreeGroup, EvenNormsMatchExactMoments )
{
    const auto w = [] ( const char * s, cplx c = 1.0 ) { return GroupPoly::lambda( parse_word( s ), c ); };
    for ( int p : { 2, 4, 6, 8 } ) EXPECT_NEAR( group_lp_norm_even( w( "a B a" ), p ), 1.0, 1e-14 );
    EXPECT_NEAR( group_lp_norm_even( w( "a" ) + w( "b" ), 2 ), std::sqrt( 2.0 ), 1e-15 );

    EXPECT_NEAR( group_lp_norm_even( w( "a" ) + w( "A" ), 4 ), std::pow( 6.0, 0.25 ), 1e-12 );
    EXPECT_NEAR( group_lp_norm_even( w( "a" ) + w( "A" ), 6 ), std::pow( 20.0, 1.0 / 6 ), 1e-12 );
    EXPECT_NEAR( group_lp_norm_even( w( "a" ) + w( "b" ), 4 ), std::pow( 6.0, 0.25 ), 1e-12 );
    const auto m = w( "a" ) + w( "b", 2.0 ) + w( "a B" );
    EXPECT_NEAR( group_lp_norm_even( m, 4 ), std::pow( 54.0, 0.25 ), 1e-12 );
    EXPECT_NEAR( group_lp_norm_even( m, 6 ), std::pow( 564.0, 1.0 / 6 ), 1e-12 );
    const auto s = w( "e" ) + w( "a" ) + w( "b" ) + w( "A" ) + w( "B" );
    EXPECT_NEAR( group_lp_norm_even( s, 4 ), std::pow( 53.0, 0.25 ), 1e-12 );
    EXPECT_NEAR( group_lp_norm_even( s, 6 ), std::pow( 713.0, 1.0 / 6 ), 1e-12 );

    EXPECT_THROW( group_lp_norm_even( s, 3 ), domain_error );
}

TEST( FreeGroup, HolderAndPoisson )
{
    std::mt19937_64 rng( 64 );
    for ( int t = 0; t < 10; ++t )
    {
        const auto x = random_poly( 2, 3, 6, rng );
        EXPECT_LE( group_lp_norm_even( x, 2 ), group_lp_norm_even( x, 4 ) + 1e-12 );
        EXPECT_LE( group_lp_norm_even( poisson_apply( x, 0.4 ), 4 ), group_lp_norm_even( x, 4 ) + 1e-10 );
        const auto st = poisson_apply( poisson_apply( x, 0.2 ), 0.5 );
        EXPECT_LT( ( st + poisson_apply( x, 0.7 ) * cplx( -1.0 ) ).l2_norm(), 1e-13 );
    }

    const auto g = GroupPoly::lambda( parse_word( "a b a" ), 3.0 );
    EXPECT_NEAR( std::abs( poisson_apply( g, std::log( 2.0 ) ).coefficient( parse_word( "a b a" ) ) - 3.0 / 8.0 ), 0.0, 1e-15 );
    const auto x = random_poly( 2, 3, 6, rng );
    EXPECT_LT( ( poisson_apply( x, 0.0 ) + x * cplx( -1.0 ) ).l2_norm(), 1e-15 );
    EXPECT_LT( ( length_multiplier( x, [] ( int ) { return cplx( 1.0 ); } ) + x * cplx( -1.0 ) ).l2_norm(), 1e-15 );
}

TEST( FreeGroup, DyadicSignFlips )
{
    std::mt19937_64 rng( 65 );
    auto            one = random_dyadic_instance( 2, 1, rng );
    EXPECT_NEAR( dyadic_unconditionality( one, 4 ), 1.0, 1e-14 );
    auto two = random_dyadic_instance( 2, 2, rng );
    EXPECT_NEAR( dyadic_unconditionality( two, 2 ), 1.0, 1e-12 );

    std::vector< double > c;
    for ( std::uint64_t seed = 0; seed < 10; ++seed )
    {
        std::mt19937_64 r( seed );
        c.push_back( dyadic_unconditionality( random_dyadic_instance( 2, 3, r ), 4 ) );
    }
    const auto [lo, hi] = std::minmax_element( c.begin(), c.end() );
    EXPECT_TRUE( std::isfinite( *hi ) );
    EXPECT_LE( *hi / *lo, 1.1 );

    two[1] = two[1] + GroupPoly::lambda( parse_word( "a" ) );
    EXPECT_THROW( dyadic_unconditionality( two, 4 ), domain_error );
}

TEST( FreeGroup, TextRoundTrip )
{
    std::mt19937_64   rng( 66 );
    const auto        x = random_poly( 3, 3, 6, rng ) + GroupPoly::lambda( {}, 2.0 );
    std::stringstream ss;
    write_poly( ss, x );
    const auto y = read_poly( ss );
    EXPECT_EQ( ( x + y * cplx( -1.0 ) ).l2_norm(), 0.0 );
}

//
// q-Fock space
//

TEST( QFock, GramExamplesAndPositivity )
{
    EXPECT_LT( ( q_gram( 3, 2, 0.0 ) - CMatrix::Identity( 8, 8 ) ).norm(), 1e-15 );
    EXPECT_NEAR( q_gram( 2, 1, 0.3 )( 0, 0 ).real(), 1.3, 1e-15 );

    const CMatrix                            Q = q_gram( 2, 2, 0.4 );
    Eigen::SelfAdjointEigenSolver< CMatrix > es( Q );
    EXPECT_NEAR( es.eigenvalues()( 0 ), 0.6, 1e-14 );
    EXPECT_NEAR( es.eigenvalues()( 3 ), 1.4, 1e-14 );

    for ( double q : { -0.9, -0.5, 0.0, 0.5, 0.9 } )
        for ( int n = 0; n <= 5; ++n )
            for ( int d = 1; d <= 3; ++d ) EXPECT_GE( min_gram_eigenvalue( n, d, q ), -1e-10 );
    EXPECT_THROW( q_gram( 7, 1, 0.0 ), domain_error );
    EXPECT_THROW( FockBasis( 2, 3, 1.0 ), domain_error );
}

TEST( QFock, CreationAnnihilation )
{
    CVector h( 2 ), k( 2 );
    h << 0.6, cplx( 0, 0.8 );
    k << cplx( 0.3, -0.1 ), 1.2;
    for ( double q : { -0.5, 0.0, 0.7 } )
    {
        const FockBasis b( 2, 3, q );
        const CMatrix   c = fock_creation( b, h ), a = fock_annihilation( b, h );
        EXPECT_LT( ( c * b.vacuum() ).segment( b.offset( 1 ), 2 ).isApprox( h ) ? 0.0 : 1.0, 0.5 );
        EXPECT_LT( ( a - fock_annihilation_formula( b, h ) ).norm(), 1e-12 );

        CVector lvl1 = CVector::Zero( b.size() );
        lvl1.segment( b.offset( 1 ), 2 ) = k;
        EXPECT_LT( ( a * lvl1 - h.dot( k ) * b.vacuum() ).norm(), 1e-13 );

        EXPECT_LT( std::abs( fock_trace( b, CMatrix::Identity( b.size(), b.size() ) ) - 1.0 ), 1e-15 );
        EXPECT_LT( std::abs( fock_trace( b, c ) ), 1e-15 );
    }
}

// pair-partition values from tests/oracles/qfock_moments.py
TEST( QFock, GaussianMoments )
{
    CVector h( 2 );
    h << 0.6, cplx( 0, 0.8 );
    const std::vector< std::pair< double, double > > sixth{ { -0.9, 1.301 }, { -0.5, 2.625 }, { 0.0, 5.0 }, { 0.5, 8.875 },
                                                            { 0.9, 13.559 } };
    for ( auto [q, m6] : sixth )
    {
        EXPECT_LT( std::abs( gaussian_moment( { h, h }, q, 2 ) - 1.0 ), 1e-10 );
        EXPECT_LT( std::abs( gaussian_moment( { h, h, h, h }, q, 4 ) - ( 2.0 + q ) ), 1e-10 );
        EXPECT_LT( std::abs( gaussian_moment( { h, h, h, h }, q, 5 ) - ( 2.0 + q ) ), 1e-10 );
        EXPECT_LT( std::abs( gaussian_moment( { h, h, h }, q, 3 ) ), 1e-12 );
        EXPECT_LT( std::abs( gaussian_moment( std::vector< CVector >( 6, h ), q, 6 ) - m6 ), 1e-10 );
    }
    EXPECT_THROW( gaussian_moment( { h, h, h }, 0.0, 2 ), domain_error );
}

TEST( QFock, SecondQuantization )
{
    const FockBasis b( 2, 3, 0.3 );
    EXPECT_LT( ( second_quantization( b, CMatrix::Identity( 2, 2 ) ) - CMatrix::Identity( b.size(), b.size() ) ).norm(), 1e-15 );
    const CMatrix z = second_quantization( b, CMatrix::Zero( 2, 2 ) );
    EXPECT_LT( ( z - b.vacuum() * b.vacuum().adjoint() ).norm(), 1e-15 );

    const CMatrix ou = ou_semigroup( b, 0.4 );
    for ( int n = 0; n <= 3; ++n )
        EXPECT_NEAR( ou( b.offset( n ), b.offset( n ) ).real(), std::exp( -0.4 * n ), 1e-14 );

    std::mt19937_64 rng( 67 );
    CMatrix         a = random_matrix( 2, 2, rng ), c = random_matrix( 2, 2, rng );
    a /= 1.01 * spectral_norm( a );
    c /= 1.01 * spectral_norm( c );
    EXPECT_LT( rel_diff( second_quantization( b, a * c ), second_quantization( b, a ) * second_quantization( b, c ) ), 1e-13 );
    EXPECT_LT( rel_diff( b.q_adjoint( second_quantization( b, a ) ), second_quantization( b, a.adjoint() ) ), 1e-10 );
    EXPECT_THROW( second_quantization( b, 2.0 * CMatrix::Identity( 2, 2 ) ), domain_error );
}

//
// spin systems
//

TEST( Clifford, AnticommutationAndTraces )
{
    const SpinRep rep( 4 );
    const CMatrix I = CMatrix::Identity( 16, 16 );
    for ( int i = 0; i < 4; ++i )
    {
        EXPECT_EQ( ( rep.W( i ) * rep.W( i ) - I ).norm(), 0.0 );
        EXPECT_EQ( ( rep.W( i ) - rep.W( i ).adjoint() ).norm(), 0.0 );
        for ( int j = i + 1; j < 4; ++j ) EXPECT_EQ( ( rep.W( i ) * rep.W( j ) + rep.W( j ) * rep.W( i ) ).norm(), 0.0 );
    }
    EXPECT_EQ( normalized_trace( rep.V( 0 ) ), 1.0 );
    for ( std::uint32_t F = 1; F < 16; ++F )
    {
        EXPECT_EQ( normalized_trace( rep.V( F ) ), 0.0 );
        for ( std::uint32_t G = 0; G < 16; ++G )
            EXPECT_LT( std::abs( rep.coefficient( G, rep.V( F ) ) - ( F == G ? 1.0 : 0.0 ) ), 1e-15 );
    }
    EXPECT_THROW( SpinRep( 11 ), domain_error );
}

TEST( Clifford, SemigroupEigenvaluesAndPositivity )
{
    const SpinRep rep( 3 );
    const auto    T = clifford_semigroup( rep, 0.25 );
    EXPECT_LT( ( T.apply( rep.V( 0b011 ) ) - std::exp( -0.5 ) * rep.V( 0b011 ) ).norm(), 1e-12 );
    for ( std::uint32_t F = 0; F < 8; ++F )
        EXPECT_LT( std::abs( rep.coefficient( F, T.apply( rep.V( F ) ) ) - std::exp( -0.25 * std::popcount( F ) ) ), 1e-12 );
    EXPECT_GE( min_hermitian_eigenvalue( choi_matrix( T ) ), -1e-12 );

    std::mt19937_64 rng( 68 );
    const CMatrix   x = random_matrix( 8, 8, rng );
    EXPECT_NEAR( T.apply( x ).trace().real(), x.trace().real(), 1e-12 );
    EXPECT_LT( ( T.apply( CMatrix::Identity( 8, 8 ) ) - CMatrix::Identity( 8, 8 ) ).norm(), 1e-13 );
    const CMatrix h = random_hermitian( 8, rng );
    EXPECT_TRUE( is_hermitian( T.apply( h ) ) );
}

//
// martingales
//

TEST( Martingale, ExpectationAlgebra )
{
    std::mt19937_64 rng( 69 );
    for ( auto dir : { TowerDirection::increasing, TowerDirection::decreasing } )
    {
        const MartingaleTower tw( 3, dir );
        const CMatrix         x = random_matrix( 8, 8, rng );
        EXPECT_LT( ( cond_exp( tw, dir == TowerDirection::increasing ? 3 : 0, x ) - x ).norm(), 1e-13 );
        for ( int j = 0; j <= 3; ++j )
            for ( int k = 0; k <= 3; ++k )
            {
                const int m = dir == TowerDirection::increasing ? std::min( j, k ) : std::max( j, k );
                EXPECT_LT( ( cond_exp( tw, j, cond_exp( tw, k, x ) ) - cond_exp( tw, m, x ) ).norm(), 1e-12 );
            }

        const auto d = martingale_differences( tw, x );
        for ( std::size_t i = 0; i < d.size(); ++i )
            for ( std::size_t k = i + 1; k < d.size(); ++k ) EXPECT_LT( std::abs( trace_pair( d[i].adjoint(), d[k] ) ), 1e-12 );
    }
    const MartingaleTower tw( 2 );
    const CMatrix         x = random_matrix( 4, 4, rng );
    EXPECT_LT( ( cond_exp( tw, 0, x ) - x.trace() / 4.0 * CMatrix::Identity( 4, 4 ) ).norm(), 1e-13 );
    EXPECT_THROW( cond_exp( tw, 3, x ), domain_error );
}

TEST( Martingale, SteinEstimates )
{
    SearchCfg cfg;
    cfg.restarts = 8;
    cfg.lengths  = { 1, 2, 4 };
    EXPECT_NEAR( stein_colbound( MartingaleTower( 2 ), 2.0, cfg ).value, 1.0, 1e-6 );

    const OperatorFamily E0{ MartingaleTower( 2 ).expectation( 0, 2 ) };
    EXPECT_NEAR( col_bound_estimate( E0, 4.0, cfg ).value, 1.0, 1e-8 );

    std::vector< double > v;
    for ( std::uint64_t seed : { 1u, 2u } )
    {
        cfg.seed = seed;
        v.push_back( stein_colbound( MartingaleTower( 3 ), 4.0, cfg ).value );
    }
    EXPECT_LT( std::abs( v[0] - v[1] ) / v[0], 0.1 );
}

// closed form checked against tests/oracles/cesaro.py
TEST( Martingale, CesaroSquareFunction )
{
    EXPECT_NEAR( cesaro_expectation_factor( 1 ), 0.5, 1e-16 );
    EXPECT_NEAR( cesaro_expectation_factor( 5 ), 0.58476015976162776, 1e-15 );
    EXPECT_NEAR( cesaro_expectation_factor( 20 ), 0.59493708471718587, 1e-15 );

    std::mt19937_64       rng( 70 );
    const MartingaleTower tw( 3 );
    const CMatrix         x = random_matrix( 8, 8, rng );
    const auto            E = tw.expectation( 1 );
    for ( double p : { 2.0, 4.0 } )
    {
        const auto r = cesaro_square_function( E, x, 20, p );
        EXPECT_LT( rel_diff( r.value, schatten_norm( E.apply( x ) - x, p ) * cesaro_expectation_factor( 20 ) ), 1e-8 );
    }
    EXPECT_NEAR( cesaro_square_function( LpOperator::identity( 8 ), x, 10, 4.0 ).value, 0.0, 1e-12 );

    const auto T = clifford_semigroup( SpinRep( 3 ), 0.3 );
    const auto c = cesaro_square_function( T, x, 16, 4.0 );
    EXPECT_TRUE( std::isfinite( c.ratio ) );
    EXPECT_GT( c.ratio, 0.0 );
}
