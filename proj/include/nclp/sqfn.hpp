#pragma once
//
// Square functions ‖x‖_{F,c}, ‖x‖_{F,r}, ‖x‖_F and the bracket norm [x]_F,
// discretised on a log-uniform grid for the measure dt/t.
//

#include "nclp/funcalc.hpp"
#include "nclp/hvnorms.hpp"

namespace nclp
{

struct LogGrid
{
    double                t_min = 0.0, t_max = 0.0;
    int                   n     = 0;
    std::vector< double > nodes, weights;   // trapezoid in log t

    static LogGrid make ( double t_min, double t_max, int n )
    {
        if ( !( t_min > 0.0 && t_min < t_max ) ) throw domain_error( "LogGrid: need 0 < t_min < t_max" );
        if ( n < 2 ) throw domain_error( "LogGrid: need at least two nodes" );

        LogGrid      g{ t_min, t_max, n, {}, {} };
        const double h = std::log( t_max / t_min ) / double( n - 1 );
        for ( int j = 0; j < n; ++j )
        {
            g.nodes.push_back( t_min * std::exp( h * j ) );
            g.weights.push_back( ( j == 0 || j == n - 1 ) ? 0.5 * h : h );
        }
        return g;
    }

    double weight_sum () const { return detail::compensated_sum( weights ); }

    LogGrid refined () const { return make( t_min, t_max, 2 * n - 1 ); }
    LogGrid widened ( double factor ) const { return make( t_min / factor, t_max * factor, n ); }
};

///
/// Grid covering the decay of F at both ends for spectrum magnitudes in
/// [lambda_min, lambda_max]: |F(tλ)|² drops below 1e-12 of its envelope.
///
inline LogGrid default_grid ( double lambda_min, double lambda_max, const HolFn & F, int n = 512 )
{
    if ( !( lambda_min > 0.0 && lambda_min <= lambda_max ) ) throw domain_error( "default_grid: bad spectral bounds" );
    const double s   = F.klass() == HolClass::hinf0 ? F.decay_s() : 1.0;
    const double eps = 1e-12;
    return LogGrid::make( std::pow( eps, 1.0 / ( 2.0 * s ) ) / lambda_max, std::pow( eps, -1.0 / ( 2.0 * s ) ) / lambda_min, n );
}

inline LogGrid default_grid ( const LpOperator & A, const HolFn & F, int n = 512 )
{
    const CVector sp   = spectrum( A );
    const double  ztol = detail::zero_tolerance( sp );
    double        lo = std::numeric_limits< double >::infinity(), hi = 0.0;
    for ( Index i = 0; i < sp.size(); ++i )
    {
        const double a = std::abs( sp( i ) );
        if ( a > ztol ) lo = std::min( lo, a ), hi = std::max( hi, a );
    }
    if ( hi == 0.0 ) lo = hi = 1.0;
    return default_grid( lo, hi, F, n );
}

///
/// c_F on the grid at spectral point λ: (Σ_j w_j |F(t_j λ)|²)^{1/2}
///
inline double c_F ( const HolFn & F, const LogGrid & grid, cplx lambda = 1.0 )
{
    std::vector< double > terms( grid.nodes.size() );
    for ( std::size_t j = 0; j < terms.size(); ++j ) terms[j] = grid.weights[j] * std::norm( F( grid.nodes[j] * lambda ) );
    return std::sqrt( detail::compensated_sum( terms ) );
}

namespace detail
{

// u_j = √w_j F(t_j A) x
inline MatrixFamily node_family ( const SpectralForm & sf, const CMatrix & x, const HolFn & F, const LogGrid & grid )
{
    MatrixFamily u( grid.nodes.size() );
    parallel_for( u.size(), [&] ( std::size_t j ) {
        const double t = grid.nodes[j];
        u[j]           = std::sqrt( grid.weights[j] ) * sf.apply( [&] ( cplx z ) { return F( t * z ); }, x );
    } );
    return u;
}

// Σ_j √w_j F(t_j A)* y_j
inline CMatrix node_adjoint ( const SpectralForm & sf, const MatrixFamily & y, const HolFn & F, const LogGrid & grid )
{
    CMatrix acc = CMatrix::Zero( sf.dim(), sf.dim() );
    for ( std::size_t j = 0; j < y.size(); ++j )
    {
        const double t = grid.nodes[j];
        acc += std::sqrt( grid.weights[j] ) * sf.apply_adjoint( [&] ( cplx z ) { return F( t * z ); }, y[j] );
    }
    return acc;
}

inline void check_square_args ( const LpOperator & A, const CMatrix & x, const HolFn & F )
{
    if ( x.rows() != A.dim() || x.cols() != A.dim() ) throw shape_error( "square function: x has wrong shape" );
    if ( F.klass() != HolClass::hinf0 ) throw domain_error( "square function: F must be decaying (H∞₀)" );
    const double w = spectral_angle( spectrum( A ) );
    if ( !( w < F.theta() ) )
        throw domain_error( "square function: sector angle of A exceeds the angle of " + F.name() );
}

}// namespace detail

inline MatrixFamily square_family ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid )
{
    detail::check_square_args( A, x, F );
    return detail::node_family( SpectralForm( A ), x, F, grid );
}

inline double sq_col ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid, PExponent p )
{
    return col_norm( square_family( A, x, F, grid ), p );
}

inline double sq_row ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid, PExponent p )
{
    return row_norm( square_family( A, x, F, grid ), p );
}

struct SqRad
{
    double value;
    double lower_bound;   // certified for p < 2, equal to value otherwise
    bool   converged;
};

inline SqRad sq_rad ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid, PExponent p,
                      const ConvexCfg & cfg = {} )
{
    const auto u = square_family( A, x, F, grid );
    if ( p.value() >= 2.0 )
    {
        const double v = intersection_norm( u, p );
        return { v, v, true };
    }
    const auto r = sum_norm( u, p, cfg );
    return { r.value, r.lower_bound, r.converged };
}

struct BracketResult
{
    double  value;
    CMatrix witness;   // x₁ of the decomposition x = x₁ + x₂
    bool    converged;
};

///
/// [x]_F = inf { ‖x₁‖_{F,c} + ‖x - x₁‖_{F,r} } by accelerated smoothed descent in x₁
///
inline BracketResult bracket_norm ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid,
                                    PExponent p, const ConvexCfg & cfg = {} )
{
    detail::check_square_args( A, x, F );
    const SpectralForm sf( A );

    auto family = [&] ( const CMatrix & y ) { return detail::node_family( sf, y, F, grid ); };
    auto exact  = [&] ( const CMatrix & x1 ) { return col_norm( family( x1 ), p ) + row_norm( family( x - x1 ), p ); };

    const double scale = std::max( 1e-300, exact( x ) + exact( CMatrix::Zero( x.rows(), x.cols() ) ) );
    if ( x.norm() == 0.0 ) return { 0.0, CMatrix::Zero( x.rows(), x.cols() ), true };

    const double              pe       = detail::smooth_exponent( p );
    const std::vector< double > schedule = { 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6 };
    const int                 per      = std::max( 1, cfg.iterations / int( schedule.size() ) );

    // smoothed objective, gradient in x₁ through the node adjoints
    auto eval = [&] ( const CMatrix & x1, double mu, CMatrix * grad ) {
        const auto u  = family( x1 );
        const auto r  = family( x - x1 );
        const auto nc = detail::smooth_gram_norm( detail::gram_col( u ), pe, mu * scale, grad != nullptr );
        const auto nr = detail::smooth_gram_norm( detail::gram_row( r ), pe, mu * scale, grad != nullptr );
        if ( grad )
        {
            MatrixFamily gc( u.size() ), gr( u.size() );
            for ( std::size_t j = 0; j < u.size(); ++j )
            {
                gc[j] = u[j] * nc.weight;
                gr[j] = nr.weight * r[j];
            }
            *grad = detail::node_adjoint( sf, gc, F, grid ) - detail::node_adjoint( sf, gr, F, grid );
        }
        return nc.value + nr.value;
    };

    std::mt19937_64 rng( cfg.seed );
    std::uniform_real_distribution< double > uni( 0.0, 1.0 );

    CMatrix best_x1  = x;
    double  best_val = exact( x );
    {
        const double v0 = exact( CMatrix::Zero( x.rows(), x.cols() ) );
        if ( v0 < best_val ) best_val = v0, best_x1 = CMatrix::Zero( x.rows(), x.cols() );
    }

    const int restarts = std::max( 1, std::min( cfg.restarts, 4 ) );
    for ( int rs = 0; rs < restarts; ++rs )
    {
        CMatrix x1 = rs == 0 ? CMatrix( 0.5 * x ) : CMatrix( uni( rng ) * x );
        double  step = 1.0 / scale;
        for ( double mu : schedule )
        {
            CMatrix y = x1, g;
            double  t = 1.0, fprev = eval( x1, mu, nullptr );
            for ( int it = 0; it < per; ++it )
            {
                const double fy = eval( y, mu, &g );
                const double gg = g.squaredNorm();
                if ( gg < 1e-30 ) break;
                CMatrix xn;
                double  fn = 0.0;
                for ( int bt = 0; bt < 60; ++bt )
                {
                    xn = y - step * g;
                    fn = eval( xn, mu, nullptr );
                    if ( fn <= fy - 0.5 * step * gg ) break;
                    step *= 0.5;
                }
                const double tn = 0.5 * ( 1.0 + std::sqrt( 1.0 + 4.0 * t * t ) );
                if ( fn > fprev ) y = xn, t = 1.0;
                else
                {
                    y = xn + ( ( t - 1.0 ) / tn ) * ( xn - x1 );
                    t = tn;
                }
                x1    = xn;
                fprev = fn;
                step *= 1.5;
            }
            const double e = exact( x1 );
            if ( e < best_val ) best_val = e, best_x1 = x1;
        }
    }

    return { best_val, best_x1, true };
}

struct SquareReport
{
    double  col, row, rad, bracket;
    LogGrid grid;
    bool    truncation_flag;   // integrand not negligible at a window end
};

inline SquareReport square_report ( const LpOperator & A, const CMatrix & x, const HolFn & F, const LogGrid & grid,
                                    PExponent p, const ConvexCfg & cfg = {} )
{
    const auto u = square_family( A, x, F, grid );

    double peak = 0.0;
    for ( const auto & m : u ) peak = std::max( peak, m.norm() );
    const bool trunc = peak > 0.0 && std::max( u.front().norm(), u.back().norm() ) > 1e-6 * peak;

    SquareReport r{ col_norm( u, p ), row_norm( u, p ), 0.0, 0.0, grid, trunc };
    if ( p.value() >= 2.0 )
    {
        r.rad     = std::max( r.col, r.row );
        r.bracket = r.rad;
    }
    else
    {
        r.rad     = sum_norm( u, p, cfg ).value;
        r.bracket = bracket_norm( A, x, F, grid, p, cfg ).value;
    }
    return r;
}

enum class SquareVariant
{
    col,
    row,
    rad
};

struct Equivalence
{
    double K1_hat;   // min (‖x‖_F + ‖Px‖) / ‖x‖
    double K2_hat;   // max ‖x‖_F / ‖x‖
};

///
/// sampled comparison of ‖x‖_F + ‖P x‖ against ‖x‖ over random x,
/// P the spectral projection onto the kernel of A
///
inline Equivalence equivalence_experiment ( const LpOperator & A, const HolFn & F, PExponent p, int samples,
                                            std::uint64_t seed, const LogGrid & grid,
                                            SquareVariant variant = SquareVariant::rad, const ConvexCfg & cfg = {} )
{
    if ( samples < 1 ) throw domain_error( "equivalence_experiment: need at least one sample" );
    const SpectralForm sf( A );
    std::mt19937_64    rng( seed );

    Equivalence e{ std::numeric_limits< double >::infinity(), 0.0 };
    for ( int s = 0; s < samples; ++s )
    {
        const CMatrix x  = random_matrix( A.dim(), A.dim(), rng );
        const double  nx = schatten_norm( x, p );
        const auto    u  = detail::node_family( sf, x, F, grid );

        double sq = 0.0;
        switch ( variant )
        {
            case SquareVariant::col: sq = col_norm( u, p ); break;
            case SquareVariant::row: sq = row_norm( u, p ); break;
            case SquareVariant::rad: sq = p.value() >= 2.0 ? intersection_norm( u, p ) : sum_norm( u, p, cfg ).value; break;
        }
        const double np = schatten_norm( sf.kernel_projection( x ), p );
        e.K1_hat        = std::min( e.K1_hat, ( sq + np ) / nx );
        e.K2_hat        = std::max( e.K2_hat, sq / nx );
    }
    return e;
}

struct RowColGap
{
    int    n;
    double Fc, Fr, Fr_closed_form, ratio;
};

// d_k = 2^{k/2} / (1 + 2^k)
inline double gap_coefficient ( int k ) { return std::pow( 2.0, 0.5 * k ) / ( 1.0 + std::pow( 2.0, k ) ); }

///
/// A = left multiplication by diag(2, 4, …, 2ⁿ), x = (e⊗e)/√n, F = √z e^{-z}:
/// the column square function is √(n/2) while the row one is ‖[d_{|i-j|}]‖_{p/2}^{1/2}
///
inline RowColGap row_col_gap ( int n, PExponent p, std::optional< LogGrid > grid = {} )
{
    if ( n < 1 ) throw domain_error( "row_col_gap: n must be positive" );
    if ( !( p.value() > 2.0 ) ) throw domain_error( "row_col_gap: needs p > 2" );

    std::vector< cplx > d;
    for ( int i = 1; i <= n; ++i ) d.push_back( std::pow( 2.0, i ) );
    const LpOperator A = LpOperator::left( diag( d ) );
    const HolFn      F = holfn::sqrtzexp();
    const LogGrid    g = grid ? *grid : default_grid( 2.0, std::pow( 2.0, n ), F );
    const CMatrix    x = CMatrix::Constant( n, n, 1.0 / std::sqrt( double( n ) ) );

    const auto u = square_family( A, x, F, g );

    CMatrix delta( n, n );
    for ( int i = 0; i < n; ++i )
        for ( int j = 0; j < n; ++j ) delta( i, j ) = gap_coefficient( std::abs( i - j ) );

    RowColGap r{ n, col_norm( u, p ), row_norm( u, p ), std::sqrt( schatten_norm( delta, PExponent( p.value() / 2.0 ) ) ), 0.0 };
    r.ratio = r.Fc / r.Fr;
    return r;
}

}// namespace nclp
