#pragma once
//
// Lower-bound estimation of Col/Row/Rad-boundedness constants of finite
// operator families, and Rad/Col/Row sectoriality profiles.
//

#include "nclp/funcalc.hpp"
#include "nclp/hvnorms.hpp"

namespace nclp
{

using OperatorFamily = std::vector< LpOperator >;

enum class Notion
{
    col,
    row,
    rad
};

inline const char * to_string ( Notion n )
{
    switch ( n )
    {
        case Notion::col: return "col";
        case Notion::row: return "row";
        default:          return "rad";
    }
}

struct SearchCfg
{
    int                restarts          = 64;
    std::vector< int > lengths           = { 1, 2, 4, 8 };
    int                ascent_iterations = 60;
    int                reselect_rounds   = 3;
    RadMoment          moment            = RadMoment::second;
    std::uint64_t      seed              = 0x5eed;
};

struct BoundWitness
{
    std::vector< int > selection;   // indices into the operator family
    MatrixFamily       family;      // test family x_k
};

enum class SearchStatus
{
    converged,          // best value reached by at least two restarts
    budget_exhausted
};

struct BoundEstimate
{
    double       value;
    BoundWitness witness;
    SearchStatus status;
    int          restarts;
};

inline void validate_operators ( const OperatorFamily & F )
{
    if ( F.empty() ) throw domain_error( "operator family is empty" );
    for ( const auto & T : F )
        if ( T.dim() != F.front().dim() ) throw shape_error( "operator family: members act on different dimensions" );
}

///
/// Banach-space adjoint T' for the bilinear pairing tr(xy): T'(y) = T*(y*)*
///
inline LpOperator banach_adjoint ( const LpOperator & T )
{
    if ( T.is< ops::LeftMult >() ) return LpOperator::right( T.as< ops::LeftMult >().a );
    if ( T.is< ops::RightMult >() ) return LpOperator::left( T.as< ops::RightMult >().b );
    if ( T.is< ops::SchurMult >() ) return LpOperator::schur( T.as< ops::SchurMult >().symbol.transpose() );
    auto op = std::make_shared< const LpOperator >( T );
    return LpOperator( ops::Custom{ "banach-adjoint", T.dim(),
                                    [op] ( const CMatrix & y ) { return CMatrix( op->apply_adjoint( y.adjoint() ).adjoint() ); },
                                    [op] ( const CMatrix & x ) { return CMatrix( op->apply( x.adjoint() ).adjoint() ); } } );
}

inline OperatorFamily banach_adjoints ( const OperatorFamily & F )
{
    OperatorFamily out;
    for ( const auto & T : F ) out.push_back( banach_adjoint( T ) );
    return out;
}

namespace detail
{

inline MatrixFamily apply_selection ( const OperatorFamily & F, const std::vector< int > & sel, const MatrixFamily & xs,
                                      bool adjoint = false )
{
    MatrixFamily ys( xs.size() );
    for ( std::size_t k = 0; k < xs.size(); ++k )
        ys[k] = adjoint ? F[sel[k]].apply_adjoint( xs[k] ) : F[sel[k]].apply( xs[k] );
    return ys;
}

// second- or first-moment sign average and its gradient
inline double rad_value ( const MatrixFamily & xs, PExponent p, RadMoment m, MatrixFamily * grad )
{
    const std::size_t   n     = xs.size();
    const std::uint64_t count = std::uint64_t( 1 ) << ( n - 1 );
    double              acc   = 0.0;
    if ( grad ) *grad = MatrixFamily( n, CMatrix::Zero( xs[0].rows(), xs[0].cols() ) );

    for ( std::uint64_t s = 0; s < count; ++s )
    {
        const CMatrix sum = signed_sum( xs, s << 1 );
        const double  v   = schatten_norm( sum, p );
        acc += m == RadMoment::second ? v * v : v;
        if ( grad && v > 0.0 )
        {
            const CMatrix j  = dual_element( sum, p );
            const double  wt = m == RadMoment::second ? v : 1.0;
            for ( std::size_t k = 0; k < n; ++k )
            {
                const bool neg = ( ( s << 1 ) >> k ) & 1u;
                ( *grad )[k] += ( neg ? -wt : wt ) * j;
            }
        }
    }
    acc /= double( count );
    const double val = m == RadMoment::second ? std::sqrt( acc ) : acc;
    if ( grad )
    {
        const double norm = m == RadMoment::second ? double( count ) * std::max( val, 1e-300 ) : double( count );
        for ( auto & g : *grad ) g /= norm;
    }
    return val;
}

inline double family_norm ( Notion notion, const MatrixFamily & xs, PExponent p, RadMoment m )
{
    switch ( notion )
    {
        case Notion::col: return col_norm( xs, p );
        case Notion::row: return row_norm( xs, p );
        default:          return rad_value( xs, p, m, nullptr );
    }
}

inline double ratio ( Notion notion, const OperatorFamily & F, const BoundWitness & w, PExponent p, RadMoment m )
{
    const double den = family_norm( notion, w.family, p, m );
    if ( den == 0.0 ) return 0.0;
    return family_norm( notion, apply_selection( F, w.selection, w.family ), p, m ) / den;
}

inline MatrixFamily normalized ( MatrixFamily xs, Notion notion, PExponent p, RadMoment m )
{
    const double n = family_norm( notion, xs, p, m );
    if ( n > 0.0 )
        for ( auto & x : xs ) x /= n;
    return xs;
}

//
// Local ascent over the test family for a fixed selection. Col/Row use the
// p → p power method on the stacked matrix; Rad uses normalised gradient
// ascent on the log of the ratio with backtracking.
//
inline double ascend ( Notion notion, const OperatorFamily & F, BoundWitness & w, PExponent p, RadMoment m, int iterations )
{
    const std::size_t n    = w.family.size();
    double            best = ratio( notion, F, w, p, m );

    if ( notion != Notion::rad )
    {
        const bool col = notion == Notion::col;
        auto stack   = [&] ( const MatrixFamily & xs ) { return col ? column_stack( xs ) : row_stack( xs ); };
        auto unstack = [&] ( const CMatrix & v ) { return col ? split_column_stack( v, n ) : split_row_stack( v, n ); };

        MatrixFamily x = normalized( w.family, notion, p, m );
        for ( int it = 0; it < iterations; ++it )
        {
            const MatrixFamily y = apply_selection( F, w.selection, x );
            const CMatrix      j = dual_element( stack( y ), p );
            if ( j.norm() == 0.0 ) break;
            const MatrixFamily g  = apply_selection( F, w.selection, unstack( j ), true );
            const CMatrix      xn = dual_element( stack( g ), p.conjugate() );
            if ( xn.norm() == 0.0 ) break;

            BoundWitness cand{ w.selection, unstack( xn ) };
            const double r = ratio( notion, F, cand, p, m );
            if ( r > best * ( 1.0 + 1e-14 ) )
            {
                const bool small = r - best <= 1e-12 * r;
                best             = r;
                w.family         = cand.family;
                if ( small ) break;
            }
            else if ( r <= best )
                break;
            x = cand.family;
        }
        return best;
    }

    double step = 0.3;
    for ( int it = 0; it < iterations && step > 1e-8; ++it )
    {
        MatrixFamily gn, gd;
        const MatrixFamily y   = apply_selection( F, w.selection, w.family );
        const double       num = rad_value( y, p, m, &gn );
        const double       den = rad_value( w.family, p, m, &gd );
        if ( num == 0.0 || den == 0.0 ) break;

        const MatrixFamily back = apply_selection( F, w.selection, gn, true );
        MatrixFamily       g( n );
        for ( std::size_t k = 0; k < n; ++k ) g[k] = back[k] / num - gd[k] / den;
        const double gnorm = std::sqrt( family_sqnorm( g ) );
        const double xnorm = std::sqrt( family_sqnorm( w.family ) );
        if ( gnorm <= 1e-14 / std::max( xnorm, 1e-300 ) ) break;

        bool moved = false;
        while ( step > 1e-8 )
        {
            BoundWitness cand = w;
            axpy( cand.family, step * xnorm / gnorm, g );
            const double r = ratio( notion, F, cand, p, m );
            if ( r > best )
            {
                const bool small = r - best <= 1e-12 * r;
                best             = r;
                w.family         = normalized( cand.family, notion, p, m );
                step *= 1.5;
                moved = !small;
                break;
            }
            step *= 0.5;
        }
        if ( !moved ) break;
    }
    return best;
}

// greedy replacement of single T_k by the best member of F
inline double reselect ( Notion notion, const OperatorFamily & F, BoundWitness & w, PExponent p, RadMoment m, double current )
{
    for ( std::size_t k = 0; k < w.selection.size(); ++k )
    {
        const int keep = w.selection[k];
        int       best = keep;
        for ( int c = 0; c < int( F.size() ); ++c )
        {
            if ( c == keep ) continue;
            w.selection[k] = c;
            const double r = ratio( notion, F, w, p, m );
            if ( r > current * ( 1.0 + 1e-12 ) ) current = r, best = c;
        }
        w.selection[k] = best;
    }
    return current;
}

inline BoundEstimate estimate ( Notion notion, const OperatorFamily & F, PExponent p, const SearchCfg & cfg,
                                const std::optional< BoundWitness > & warm )
{
    validate_operators( F );
    if ( cfg.lengths.empty() || cfg.restarts < 1 ) throw domain_error( "SearchCfg: need restarts and lengths" );
    for ( int L : cfg.lengths )
        if ( L < 1 || ( notion == Notion::rad && L > 12 ) )
            throw domain_error( "SearchCfg: family lengths must lie in [1, 12] for the Rad estimator" );

    const Index     d = F.front().dim();
    std::mt19937_64 rng( cfg.seed );

    std::vector< std::pair< double, BoundWitness > > results( std::size_t( cfg.restarts ) );
    std::vector< BoundWitness >                      starts;
    for ( int r = 0; r < cfg.restarts; ++r )
    {
        const int    L = cfg.lengths[std::size_t( r ) % cfg.lengths.size()];
        BoundWitness w;
        for ( int k = 0; k < L; ++k )
        {
            w.selection.push_back( int( rng() % F.size() ) );
            w.family.push_back( random_matrix( d, d, rng ) );
        }
        starts.push_back( std::move( w ) );
    }
    if ( warm ) starts.front() = *warm;

    parallel_for( starts.size(), [&] ( std::size_t r ) {
        BoundWitness w   = starts[r];
        double       val = ratio( notion, F, w, p, cfg.moment );
        for ( int round = 0; round <= cfg.reselect_rounds; ++round )
        {
            const double before = val;
            val = std::max( val, ascend( notion, F, w, p, cfg.moment, cfg.ascent_iterations ) );
            if ( round < cfg.reselect_rounds ) val = reselect( notion, F, w, p, cfg.moment, val );
            if ( round > 0 && val <= before * ( 1.0 + 1e-12 ) ) break;
        }
        results[r] = { ratio( notion, F, w, p, cfg.moment ), std::move( w ) };
    } );

    std::size_t arg = 0;
    for ( std::size_t r = 1; r < results.size(); ++r )
        if ( results[r].first > results[arg].first ) arg = r;

    const double top  = results[arg].first;
    int          hits = 0;
    for ( const auto & r : results )
        if ( r.first >= top * ( 1.0 - 1e-6 ) ) ++hits;

    BoundWitness w   = results[arg].second;
    const double val = ratio( notion, F, w, p, cfg.moment );
    return { val, std::move( w ), hits >= 2 ? SearchStatus::converged : SearchStatus::budget_exhausted, cfg.restarts };
}

}// namespace detail

///
/// ratio realised by a stored witness (re-evaluation of an estimate)
///
inline double evaluate_witness ( Notion notion, const OperatorFamily & F, const BoundWitness & w, PExponent p,
                                 RadMoment m = RadMoment::second )
{
    validate_operators( F );
    for ( int s : w.selection )
        if ( s < 0 || s >= int( F.size() ) ) throw domain_error( "witness selection out of range" );
    if ( w.selection.size() != w.family.size() || w.family.empty() ) throw shape_error( "malformed witness" );
    return detail::ratio( notion, F, w, p, m );
}

inline BoundEstimate col_bound_estimate ( const OperatorFamily & F, PExponent p, const SearchCfg & cfg = {},
                                          const std::optional< BoundWitness > & warm = {} )
{
    return detail::estimate( Notion::col, F, p, cfg, warm );
}

inline BoundEstimate row_bound_estimate ( const OperatorFamily & F, PExponent p, const SearchCfg & cfg = {},
                                          const std::optional< BoundWitness > & warm = {} )
{
    return detail::estimate( Notion::row, F, p, cfg, warm );
}

inline BoundEstimate rad_bound_estimate ( const OperatorFamily & F, PExponent p, const SearchCfg & cfg = {},
                                          const std::optional< BoundWitness > & warm = {} )
{
    return detail::estimate( Notion::rad, F, p, cfg, warm );
}

inline BoundEstimate bound_estimate ( Notion notion, const OperatorFamily & F, PExponent p, const SearchCfg & cfg = {},
                                      const std::optional< BoundWitness > & warm = {} )
{
    return detail::estimate( notion, F, p, cfg, warm );
}

//
// sectoriality profiles
//

///
/// {z R(z,A)} for z at log-spaced radii on both rays of ∂Σ_θ
///
inline OperatorFamily resolvent_family ( const LpOperator & A, double theta, int per_ray = 12, double lo = 1e-3,
                                         double hi = 1e3 )
{
    if ( per_ray < 1 ) throw domain_error( "resolvent_family: need at least one point per ray" );
    const CVector sp  = spectrum( A );
    double        rho = 0.0;
    for ( Index i = 0; i < sp.size(); ++i ) rho = std::max( rho, std::abs( sp( i ) ) );
    if ( rho == 0.0 ) rho = 1.0;

    OperatorFamily F;
    for ( int sgn : { 1, -1 } )
        for ( int k = 0; k < per_ray; ++k )
        {
            const double r = rho * lo * std::pow( hi / lo, per_ray == 1 ? 0.5 : k / double( per_ray - 1 ) );
            const cplx   z = std::polar( r, sgn * theta );
            F.push_back( scaled( resolvent( A, z ), z ) );
        }
    return F;
}

struct ProfileRow
{
    double        theta;
    BoundEstimate rad, col, row;
};

///
/// Rad/Col/Row estimates of {zR(z,A) : z ∉ Σ_θ} for each θ of the grid. The
/// family for θ contains the boundary points of every grid angle ≥ θ, and the
/// search is warm-started from the next larger angle, so the profile is
/// non-increasing in θ.
///
inline std::vector< ProfileRow > sector_rbound_profile ( const LpOperator & A, PExponent p, std::vector< double > thetas,
                                                         const SearchCfg & cfg = {}, int per_ray = 12 )
{
    if ( thetas.empty() ) throw domain_error( "sector_rbound_profile: empty angle grid" );
    const double omega = spectral_angle( spectrum( A ) );
    for ( double t : thetas )
        if ( !( t > omega && t < pi ) ) throw domain_error( "sector_rbound_profile: angles must lie in (omega_hat, pi)" );

    std::vector< std::size_t > order( thetas.size() );
    for ( std::size_t i = 0; i < order.size(); ++i ) order[i] = i;
    std::sort( order.begin(), order.end(), [&] ( auto a, auto b ) { return thetas[a] > thetas[b]; } );

    std::vector< ProfileRow >   rows( thetas.size() );
    OperatorFamily              F;
    std::optional< BoundWitness > wr, wc, ww;
    for ( std::size_t idx : order )
    {
        for ( auto & T : resolvent_family( A, thetas[idx], per_ray ) ) F.push_back( std::move( T ) );

        ProfileRow row{ thetas[idx], rad_bound_estimate( F, p, cfg, wr ), col_bound_estimate( F, p, cfg, wc ),
                        row_bound_estimate( F, p, cfg, ww ) };
        wr = row.rad.witness, wc = row.col.witness, ww = row.row.witness;
        rows[idx] = std::move( row );
    }
    return rows;
}

}// namespace nclp
