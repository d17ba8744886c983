#pragma once
//
// Hilbert-space-valued L^p norms of finite matrix families: column, row,
// intersection, sum and Rademacher norms, plus the Khintchine sandwich.
//

#include "nclp/core_matrix.hpp"
#include "nclp/detail/parallel.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <optional>

namespace nclp
{

using MatrixFamily = std::vector< CMatrix >;

inline void validate_family ( const MatrixFamily & xs, const char * what = "family" )
{
    if ( xs.empty() )
        throw shape_error( std::string( what ) + ": empty family" );
    for ( const auto & x : xs )
    {
        if ( x.rows() != xs.front().rows() || x.cols() != xs.front().cols() )
            throw shape_error( std::string( what ) + ": members have different shapes" );
        require_finite( x, what );
    }
}

inline MatrixFamily adjoints ( const MatrixFamily & xs )
{
    MatrixFamily ys;
    ys.reserve( xs.size() );
    for ( const auto & x : xs ) ys.push_back( x.adjoint() );
    return ys;
}

inline MatrixFamily operator - ( const MatrixFamily & a, const MatrixFamily & b )
{
    MatrixFamily r( a.size() );
    for ( std::size_t k = 0; k < a.size(); ++k ) r[k] = a[k] - b[k];
    return r;
}

// [x_1; x_2; ...]: (stack)* (stack) = Σ x_k* x_k
inline CMatrix column_stack ( const MatrixFamily & xs )
{
    const Index r = xs.front().rows(), c = xs.front().cols();
    CMatrix     v( r * Index( xs.size() ), c );
    for ( std::size_t k = 0; k < xs.size(); ++k ) v.middleRows( Index( k ) * r, r ) = xs[k];
    return v;
}

// [x_1, x_2, ...]: (stack)(stack)* = Σ x_k x_k*
inline CMatrix row_stack ( const MatrixFamily & xs )
{
    const Index r = xs.front().rows(), c = xs.front().cols();
    CMatrix     v( r, c * Index( xs.size() ) );
    for ( std::size_t k = 0; k < xs.size(); ++k ) v.middleCols( Index( k ) * c, c ) = xs[k];
    return v;
}

inline MatrixFamily split_column_stack ( const CMatrix & v, std::size_t n )
{
    const Index  r = v.rows() / Index( n );
    MatrixFamily xs( n );
    for ( std::size_t k = 0; k < n; ++k ) xs[k] = v.middleRows( Index( k ) * r, r );
    return xs;
}

inline MatrixFamily split_row_stack ( const CMatrix & v, std::size_t n )
{
    const Index  c = v.cols() / Index( n );
    MatrixFamily xs( n );
    for ( std::size_t k = 0; k < n; ++k ) xs[k] = v.middleCols( Index( k ) * c, c );
    return xs;
}

//
// ‖(Σ x_k* x_k)^{1/2}‖_p. The singular values of the column stack are the
// square roots of the eigenvalues of Σ x_k* x_k, which avoids squaring
// the condition number.
//
inline double col_norm ( const MatrixFamily & xs, PExponent p )
{
    validate_family( xs, "col_norm" );
    return schatten_norm( column_stack( xs ), p );
}

// ‖(Σ x_k x_k*)^{1/2}‖_p
inline double row_norm ( const MatrixFamily & xs, PExponent p )
{
    validate_family( xs, "row_norm" );
    return schatten_norm( row_stack( xs ), p );
}

inline double intersection_norm ( const MatrixFamily & xs, PExponent p )
{
    return std::max( col_norm( xs, p ), row_norm( xs, p ) );
}

///
/// ‖(Σ_ij G_ij x_i* x_j)^{1/2}‖_p for a PSD Gram matrix G_ij = <a_j, a_i>.
/// With G = R*R the inner sum equals Σ_k y_k* y_k for y_k = Σ_j R_kj x_j.
///
inline double gram_col_norm ( const MatrixFamily & xs, const CMatrix & gram, PExponent p, double rel_tol = 1e-10 )
{
    validate_family( xs, "gram_col_norm" );
    const Index n = Index( xs.size() );
    if ( gram.rows() != n || gram.cols() != n )
        throw shape_error( "gram_col_norm: Gram matrix must be n x n for a family of n" );

    const CMatrix root = psd_sqrt( gram, rel_tol );   // throws when G is not PSD

    MatrixFamily ys( xs.size(), CMatrix::Zero( xs.front().rows(), xs.front().cols() ) );
    for ( Index k = 0; k < n; ++k )
        for ( Index j = 0; j < n; ++j )
            if ( root( k, j ) != cplx( 0.0 ) ) ys[std::size_t( k )] += root( k, j ) * xs[std::size_t( j )];

    return col_norm( ys, p );
}

///
/// tensor extension T ⊗ I: y_j = Σ_k T_jk x_k
///
struct TensorReport
{
    double col_in, col_out, row_in, row_out;
    double op_norm;
    bool   contraction_ok;
};

inline MatrixFamily apply_scalar_matrix ( const CMatrix & t, const MatrixFamily & xs )
{
    MatrixFamily ys( std::size_t( t.rows() ), CMatrix::Zero( xs.front().rows(), xs.front().cols() ) );
    for ( Index j = 0; j < t.rows(); ++j )
        for ( Index k = 0; k < t.cols(); ++k )
            if ( t( j, k ) != cplx( 0.0 ) ) ys[std::size_t( j )] += t( j, k ) * xs[std::size_t( k )];
    return ys;
}

inline TensorReport tensor_extend ( const CMatrix & t, const MatrixFamily & xs, PExponent p, double tol = 1e-9 )
{
    validate_family( xs, "tensor_extend" );
    if ( t.cols() != Index( xs.size() ) )
        throw shape_error( "tensor_extend: T must have one column per family member" );

    const double opn = spectral_norm( t );
    if ( opn > 1.0 + tol )
        throw domain_error( "tensor_extend: T is not a contraction (‖T‖ = " + std::to_string( opn ) + ")" );

    const MatrixFamily ys = apply_scalar_matrix( t, xs );

    TensorReport r;
    r.col_in         = col_norm( xs, p );
    r.row_in         = row_norm( xs, p );
    r.col_out        = col_norm( ys, p );
    r.row_out        = row_norm( ys, p );
    r.op_norm        = opn;
    r.contraction_ok = r.col_out <= opn * r.col_in + tol * std::max( 1.0, r.col_in ) &&
                       r.row_out <= opn * r.row_in + tol * std::max( 1.0, r.row_in );
    return r;
}

//
// Rademacher averages
//

enum class RadMode
{
    exact,
    montecarlo
};

// first moment E‖Σ ε_k x_k‖ or second moment (E‖Σ ε_k x_k‖²)^{1/2}
enum class RadMoment
{
    first,
    second
};

struct RadAverage
{
    double      value;
    double      std_error;   // 0 in exact mode
    std::size_t patterns;
};

inline constexpr std::size_t rad_exact_limit = 20;

inline CMatrix signed_sum ( const MatrixFamily & xs, std::uint64_t signs )
{
    CMatrix s = xs.front();
    for ( std::size_t k = 1; k < xs.size(); ++k )
    {
        if ( ( signs >> k ) & 1u ) s -= xs[k];
        else                       s += xs[k];
    }
    return s;
}

inline RadAverage rad_average ( const MatrixFamily & xs,
                                PExponent            p,
                                RadMode              mode    = RadMode::exact,
                                std::size_t          samples = 100000,
                                std::uint64_t        seed    = 0,
                                RadMoment            moment  = RadMoment::first )
{
    validate_family( xs, "rad_average" );
    const std::size_t n = xs.size();

    auto finish = [&] ( std::vector< double > & vals ) {
        const double count = double( vals.size() );
        if ( moment == RadMoment::second )
            for ( auto & v : vals ) v *= v;
        const double mean = detail::compensated_sum( vals ) / count;
        double       var  = 0.0;
        if ( mode == RadMode::montecarlo && vals.size() > 1 )
        {
            std::vector< double > dev( vals.size() );
            for ( std::size_t i = 0; i < vals.size(); ++i ) dev[i] = ( vals[i] - mean ) * ( vals[i] - mean );
            var = detail::compensated_sum( dev ) / ( count - 1.0 );
        }
        double se = std::sqrt( var / count );
        double v  = mean;
        if ( moment == RadMoment::second )
        {
            v  = std::sqrt( mean );
            se = ( v > 0.0 ) ? se / ( 2.0 * v ) : 0.0;
        }
        return RadAverage{ v, se, vals.size() };
    };

    if ( mode == RadMode::exact )
    {
        if ( n > rad_exact_limit )
            throw domain_error( "rad_average: exact enumeration limited to " + std::to_string( rad_exact_limit ) +
                                " members; use montecarlo mode" );

        // ε and -ε give the same norm, so fix ε_1 = +1
        const std::size_t     count = std::size_t( 1 ) << ( n - 1 );
        std::vector< double > vals( count );
        detail::parallel_for( count, [&] ( std::size_t i ) {
            vals[i] = schatten_norm( signed_sum( xs, std::uint64_t( i ) << 1 ), p );
        } );
        return finish( vals );
    }

    if ( samples < 2 ) throw domain_error( "rad_average: montecarlo needs at least two samples" );

    std::mt19937_64              rng( seed );
    std::vector< std::uint64_t > pats( samples );
    for ( auto & s : pats ) s = rng();

    std::vector< double > vals( samples );
    detail::parallel_for( samples, [&] ( std::size_t i ) {
        if ( n <= 64 )
        {
            vals[i] = schatten_norm( signed_sum( xs, pats[i] ), p );
        }
        else
        {
            std::mt19937_64 local( seed ^ ( 0x9e3779b97f4a7c15ULL * ( i + 1 ) ) );
            CMatrix         s = CMatrix::Zero( xs.front().rows(), xs.front().cols() );
            for ( std::size_t k = 0; k < n; ++k ) s += ( local() & 1u ) ? -xs[k] : xs[k];
            vals[i] = schatten_norm( s, p );
        }
    } );
    return finish( vals );
}

//
// convex minimisation for the sum norm
//

struct ConvexCfg
{
    int           restarts   = 16;
    int           iterations = 500;
    double        tolerance  = 1e-4;   // relative duality gap accepted as converged
    std::uint64_t seed       = 0x5eed;
};

struct SumNormResult
{
    double       value;        // best primal objective ‖u‖_col + ‖x - u‖_row
    double       lower_bound;  // dual certificate
    MatrixFamily witness;      // column part u
    bool         converged;
};

namespace detail
{

// Smoothed Schatten norm of S^{1/2} for PSD S: N = (Σ (λ_i + μ²)^{p/2})^{1/p}
// and G = N^{1-p} (S + μ²)^{p/2-1}, so that the gradient of N(Σ u*u) in u_k
// is u_k G (and G r_k for the row form).
struct SmoothNorm
{
    double  value;
    CMatrix weight;
};

inline SmoothNorm smooth_gram_norm ( const CMatrix & s, double p, double mu, bool with_grad )
{
    Eigen::SelfAdjointEigenSolver< CMatrix > eig( 0.5 * ( s + s.adjoint() ),
                                                  with_grad ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly );
    const RVector & lam = eig.eigenvalues();
    const double    mu2 = mu * mu;

    RVector shifted( lam.size() );
    for ( Index i = 0; i < lam.size(); ++i ) shifted( i ) = std::max( lam( i ), 0.0 ) + mu2;

    const double top = shifted.maxCoeff();
    double       acc = 0.0;
    for ( Index i = 0; i < lam.size(); ++i ) acc += std::pow( shifted( i ) / top, 0.5 * p );
    const double norm = std::sqrt( top ) * std::pow( acc, 1.0 / p );

    SmoothNorm r{ norm, {} };
    if ( with_grad )
    {
        RVector w( lam.size() );
        for ( Index i = 0; i < lam.size(); ++i )
            w( i ) = std::pow( std::sqrt( shifted( i ) ) / norm, p - 2.0 ) / norm;
        r.weight = eig.eigenvectors() * w.cast< cplx >().asDiagonal() * eig.eigenvectors().adjoint();
    }
    return r;
}

inline CMatrix gram_col ( const MatrixFamily & us )
{
    CMatrix s = CMatrix::Zero( us.front().cols(), us.front().cols() );
    for ( const auto & u : us ) s.noalias() += u.adjoint() * u;
    return s;
}

inline CMatrix gram_row ( const MatrixFamily & us )
{
    CMatrix s = CMatrix::Zero( us.front().rows(), us.front().rows() );
    for ( const auto & u : us ) s.noalias() += u * u.adjoint();
    return s;
}

inline double family_dot ( const MatrixFamily & a, const MatrixFamily & b )
{
    double acc = 0.0;
    for ( std::size_t k = 0; k < a.size(); ++k ) acc += ( a[k].adjoint() * b[k] ).trace().real();
    return acc;
}

inline double family_sqnorm ( const MatrixFamily & a )
{
    double acc = 0.0;
    for ( const auto & x : a ) acc += x.squaredNorm();
    return acc;
}

inline void axpy ( MatrixFamily & y, double alpha, const MatrixFamily & x )
{
    for ( std::size_t k = 0; k < y.size(); ++k ) y[k] += alpha * x[k];
}

// surrogate exponent for the smooth solver when p = inf
inline double smooth_exponent ( PExponent p ) { return p.is_infinite() ? 64.0 : p.value(); }

//
// Accelerated gradient descent with backtracking and smoothing continuation
// for min_u Φ_col(u) + Φ_row(x - u). Returns the iterate with the best exact
// objective seen at stage ends.
//
struct SumSolveState
{
    MatrixFamily u;
    double       exact;
};

template < typename ExactFn >
SumSolveState fista_sum ( const MatrixFamily & x, MatrixFamily u, PExponent p, int iterations, ExactFn && exact )
{
    const double             pe       = smooth_exponent( p );
    const std::vector< double > schedule = { 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6 };
    const int                per      = std::max( 1, iterations / int( schedule.size() ) );

    auto eval = [&] ( const MatrixFamily & v, double mu, MatrixFamily * grad ) {
        const MatrixFamily r  = x - v;
        const auto         nc = smooth_gram_norm( gram_col( v ), pe, mu, grad != nullptr );
        const auto         nr = smooth_gram_norm( gram_row( r ), pe, mu, grad != nullptr );
        if ( grad )
        {
            grad->resize( v.size() );
            for ( std::size_t k = 0; k < v.size(); ++k ) ( *grad )[k] = v[k] * nc.weight - nr.weight * r[k];
        }
        return nc.value + nr.value;
    };

    SumSolveState best{ u, exact( u ) };

    double step = 1e-2;
    for ( double mu : schedule )
    {
        MatrixFamily y = u, g;
        double       t = 1.0, fprev = eval( u, mu, nullptr );

        for ( int it = 0; it < per; ++it )
        {
            const double fy  = eval( y, mu, &g );
            const double gg  = family_sqnorm( g );
            if ( gg < 1e-30 ) break;

            MatrixFamily un;
            double       fn = 0.0;
            for ( int bt = 0; bt < 60; ++bt )
            {
                un = y;
                axpy( un, -step, g );
                fn = eval( un, mu, nullptr );
                if ( fn <= fy - 0.5 * step * gg ) break;
                step *= 0.5;
            }

            const double tn = 0.5 * ( 1.0 + std::sqrt( 1.0 + 4.0 * t * t ) );
            if ( fn > fprev )
            {
                // adaptive restart of the momentum
                y = un;
                t = 1.0;
            }
            else
            {
                y = un;
                MatrixFamily diff = un - u;
                axpy( y, ( t - 1.0 ) / tn, diff );
                t = tn;
            }
            u     = std::move( un );
            fprev = fn;
            step *= 1.5;
        }

        const double e = exact( u );
        if ( e < best.exact ) best = { u, e };
    }
    return best;
}

}// namespace detail

///
/// ‖x‖_{col + row} = inf { ‖u‖_col + ‖x - u‖_row }
///
/// The dual norm is max(col_{p'}, row_{p'}); a dual point built from the
/// smoothed gradient at the best iterate gives a certified lower bound.
///
inline SumNormResult sum_norm ( const MatrixFamily & xs, PExponent p, const ConvexCfg & cfg = {} )
{
    validate_family( xs, "sum_norm" );

    const double scale = std::max( col_norm( xs, p ), row_norm( xs, p ) );
    if ( scale == 0.0 )
        return { 0.0, 0.0, MatrixFamily( xs.size(), CMatrix::Zero( xs.front().rows(), xs.front().cols() ) ), true };

    // work on x / scale
    MatrixFamily x = xs;
    for ( auto & m : x ) m /= scale;

    auto exact = [&] ( const MatrixFamily & u ) { return col_norm( u, p ) + row_norm( x - u, p ); };

    auto dual_bound = [&] ( const MatrixFamily & u ) {
        const double pe  = detail::smooth_exponent( p );
        const double mu  = 1e-8;
        const auto   r   = x - u;
        const auto   nc  = detail::smooth_gram_norm( detail::gram_col( u ), pe, mu, true );
        const auto   nr  = detail::smooth_gram_norm( detail::gram_row( r ), pe, mu, true );
        const auto   pc  = p.conjugate();
        double       best = 0.0;
        for ( int which = 0; which < 3; ++which )
        {
            MatrixFamily y( u.size() );
            for ( std::size_t k = 0; k < u.size(); ++k )
            {
                const CMatrix yc = u[k] * nc.weight, yr = nr.weight * r[k];
                y[k] = which == 0 ? yc : which == 1 ? yr : CMatrix( 0.5 * ( yc + yr ) );
            }
            const double dn = std::max( col_norm( y, pc ), row_norm( y, pc ) );
            if ( dn > 0.0 ) best = std::max( best, detail::family_dot( y, x ) / dn );
        }
        return best;
    };

    std::mt19937_64 rng( cfg.seed );
    std::uniform_real_distribution< double > uni( 0.0, 1.0 );

    MatrixFamily best_u;
    double       best_val = std::numeric_limits< double >::infinity();
    double       best_low = 0.0;

    for ( int r = 0; r < std::max( 1, cfg.restarts ); ++r )
    {
        MatrixFamily u0( x.size() );
        for ( std::size_t k = 0; k < x.size(); ++k )
        {
            switch ( r )
            {
                case 0:  u0[k] = x[k]; break;
                case 1:  u0[k] = CMatrix::Zero( x[k].rows(), x[k].cols() ); break;
                case 2:  u0[k] = 0.5 * x[k]; break;
                default: u0[k] = uni( rng ) * x[k] + 0.1 * random_matrix( x[k].rows(), x[k].cols(), rng ) /
                                                        std::sqrt( double( x[k].size() ) );
            }
        }

        auto st = detail::fista_sum( x, std::move( u0 ), p, cfg.iterations, exact );
        if ( st.exact < best_val )
        {
            best_val = st.exact;
            best_u   = std::move( st.u );
        }
        best_low = std::max( best_low, dual_bound( best_u ) );

        if ( r >= 1 && best_val - best_low <= 0.1 * cfg.tolerance * best_val ) break;
    }

    for ( auto & m : best_u ) m *= scale;

    const bool conv = ( best_val - best_low ) <= cfg.tolerance * best_val;
    return { best_val * scale, std::min( best_low, best_val ) * scale, std::move( best_u ), conv };
}

///
/// Rad(L^p; H) norm: sum norm for p <= 2, intersection for p >= 2
///
inline double rad_norm ( const MatrixFamily & xs, PExponent p, const ConvexCfg & cfg = {} )
{
    if ( p.value() >= 2.0 ) return intersection_norm( xs, p );
    return sum_norm( xs, p, cfg ).value;
}

struct KhintchineReport
{
    double radavg;      // first-moment average, exact enumeration
    double radavg_l2;   // second-moment average
    double radnorm;     // intersection (p >= 2) or sum (p < 2)
    bool   lower_ok;    // (1/√2) radnorm <= radavg (p >= 2) or radavg <= radnorm (p < 2)
    double upper_ratio; // radavg / radnorm
    double ratio_l2;    // radavg_l2 / radnorm
};

inline KhintchineReport khintchine_report ( const MatrixFamily & xs, PExponent p, const ConvexCfg & cfg = {} )
{
    KhintchineReport r{};
    r.radavg    = rad_average( xs, p, RadMode::exact ).value;
    r.radavg_l2 = rad_average( xs, p, RadMode::exact, 0, 0, RadMoment::second ).value;

    if ( p.value() >= 2.0 )
    {
        r.radnorm  = intersection_norm( xs, p );
        r.lower_ok = r.radnorm / std::sqrt( 2.0 ) <= r.radavg * ( 1.0 + 1e-12 );
    }
    else
    {
        r.radnorm  = sum_norm( xs, p, cfg ).value;
        r.lower_ok = r.radavg <= r.radnorm + 1e-6;
    }
    r.upper_ratio = r.radnorm > 0.0 ? r.radavg / r.radnorm : 1.0;
    r.ratio_l2    = r.radnorm > 0.0 ? r.radavg_l2 / r.radnorm : 1.0;
    return r;
}

//
// family text format: matrix blocks separated by blank lines
//
inline void write_family ( std::ostream & os, const MatrixFamily & xs )
{
    for ( std::size_t k = 0; k < xs.size(); ++k )
    {
        if ( k ) os << '\n';
        write_matrix( os, xs[k] );
    }
}

inline MatrixFamily read_family ( std::istream & is )
{
    MatrixFamily xs;
    CMatrix      x;
    while ( read_matrix( is, x ) ) xs.push_back( x );
    validate_family( xs, "family text" );
    return xs;
}

inline MatrixFamily random_family ( std::size_t n, Index dim, std::mt19937_64 & rng )
{
    MatrixFamily xs;
    for ( std::size_t k = 0; k < n; ++k ) xs.push_back( random_matrix( dim, dim, rng ) );
    return xs;
}

}// namespace nclp
