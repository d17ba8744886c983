#pragma once
//
// Functional calculus for sectorial operators on matrix space.
//

#include "nclp/core_matrix.hpp"
#include "nclp/holfn.hpp"
#include "nclp/lp_operator.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <optional>
#include <vector>

namespace nclp
{

struct ContourSpec
{
    double gamma;
    double r_min;
    double r_max;
    int    n_points;   // nodes per ray

    void validate () const
    {
        if ( !( gamma > 0.0 && gamma < pi ) ) throw domain_error( "ContourSpec: gamma must lie in (0, pi)" );
        if ( !( r_min > 0.0 && r_min < r_max ) ) throw domain_error( "ContourSpec: need 0 < r_min < r_max" );
        if ( n_points < 8 ) throw domain_error( "ContourSpec: n_points must be >= 8" );
    }
};

struct ContourResult
{
    LpOperator  op;
    double      error_estimate;   // relative, Frobenius norm of the kernel
    bool        ok;
    ContourSpec contour;
};

enum class KernelPolicy
{
    vanish,     // f̊(0) = 0 on the kernel
    evaluate    // use f(0)
};

namespace detail
{

//
// Every operator is handled through a "kernel" matrix K and one of four
// composition rules:
//   left      x ↦ K x
//   right     x ↦ x K
//   entrywise x ↦ P (K ⊙ (P⁻¹ x Q)) Q⁻¹   (plain Schur multiplier when no basis)
//   dense     vec(x) ↦ K vec(x)
//
struct Rep
{
    enum Mode
    {
        left,
        right,
        entrywise,
        dense
    };

    Mode    mode;
    CMatrix base;                  // generator kernel
    bool    basis = false;         // entrywise in a non-standard basis
    CMatrix P, Pinv, Q, Qinv;

    Index kernel_size () const { return base.rows(); }

    CMatrix identity () const
    {
        if ( mode == entrywise ) return CMatrix::Ones( base.rows(), base.cols() );
        return CMatrix::Identity( base.rows(), base.cols() );
    }

    // kernel of op1 ∘ op2
    CMatrix compose ( const CMatrix & k1, const CMatrix & k2 ) const
    {
        switch ( mode )
        {
            case right:     return k2 * k1;
            case entrywise: return k1.cwiseProduct( k2 );
            default:        return k1 * k2;
        }
    }

    CMatrix inverse ( const CMatrix & k ) const
    {
        if ( mode == entrywise )
        {
            if ( ( k.array().abs() == 0.0 ).any() ) throw numeric_error( "singular entrywise kernel" );
            return k.cwiseInverse();
        }
        Eigen::PartialPivLU< CMatrix > lu( k );
        const double rc = lu.rcond();
        if ( !( rc > 1e-14 ) ) throw numeric_error( "kernel inversion: matrix numerically singular" );
        return lu.inverse();
    }

    LpOperator wrap ( CMatrix k ) const
    {
        switch ( mode )
        {
            case left:  return LpOperator::left( std::move( k ) );
            case right: return LpOperator::right( std::move( k ) );
            case entrywise:
                if ( !basis ) return LpOperator::schur( std::move( k ) );
                return LpOperator( ops::SchurInBasis{ P, Pinv, std::move( k ), Q, Qinv } );
            default: return LpOperator::dense( std::move( k ) );
        }
    }

    CVector spec;   // eigenvalues of the generator kernel

    // eigenvalues of the generator (as a set, without multiplicity for left/right)
    CVector compute_spectrum () const
    {
        if ( mode == entrywise ) return Eigen::Map< const CVector >( base.data(), base.size() );
        Eigen::ComplexEigenSolver< CMatrix > es( base, false );
        if ( es.info() != Eigen::Success ) throw numeric_error( "eigenvalue computation failed" );
        return es.eigenvalues();
    }

    // (z - A)^{-1}; z must stay a relative distance away from the spectrum
    CMatrix resolvent ( cplx z ) const
    {
        for ( Index i = 0; i < spec.size(); ++i )
            if ( std::abs( z - spec( i ) ) <= 1e-10 * std::abs( z ) )
                throw spectral_collision( "resolvent: z = " + format_double( z.real() ) + "+" + format_double( z.imag() ) +
                                          "i lies on the spectrum" );

        if ( mode == entrywise ) return ( z - base.array() ).inverse().matrix();

        const Index                    n = base.rows();
        Eigen::PartialPivLU< CMatrix > lu( z * CMatrix::Identity( n, n ) - base );
        return lu.inverse();
    }
};

struct Eig
{
    CMatrix V, Vinv;
    CVector values;
};

inline double condition_number ( const CMatrix & v )
{
    const RVector s = singular_values( v );
    return s( s.size() - 1 ) > 0.0 ? s( 0 ) / s( s.size() - 1 ) : std::numeric_limits< double >::infinity();
}

inline Eig diagonalize ( const CMatrix & a, double max_cond = 1e8 )
{
    Eig e;
    if ( is_hermitian( a, 1e-13 ) )
    {
        Eigen::SelfAdjointEigenSolver< CMatrix > es( 0.5 * ( a + a.adjoint() ) );
        e.V      = es.eigenvectors();
        e.Vinv   = e.V.adjoint();
        e.values = es.eigenvalues().cast< cplx >();
        return e;
    }
    Eigen::ComplexEigenSolver< CMatrix > es( a );
    if ( es.info() != Eigen::Success ) throw numeric_error( "eigendecomposition failed" );
    e.V = es.eigenvectors();
    for ( Index j = 0; j < e.V.cols(); ++j ) e.V.col( j ).normalize();
    const double c = condition_number( e.V );
    if ( !( c <= max_cond ) )
        throw numeric_error( "eigenvector matrix ill-conditioned (cond = " + format_double( c ) +
                             "); operator is defective or nearly so" );
    e.Vinv   = e.V.inverse();
    e.values = es.eigenvalues();
    return e;
}

inline Rep make_rep ( const LpOperator & A )
{
    Rep r;
    if ( A.is< ops::LeftMult >() )
    {
        r.mode = Rep::left;
        r.base = A.as< ops::LeftMult >().a;
    }
    else if ( A.is< ops::RightMult >() )
    {
        r.mode = Rep::right;
        r.base = A.as< ops::RightMult >().b;
    }
    else if ( A.is< ops::SchurMult >() )
    {
        r.mode = Rep::entrywise;
        r.base = A.as< ops::SchurMult >().symbol;
    }
    else if ( A.is< ops::SchurInBasis >() )
    {
        const auto & k = A.as< ops::SchurInBasis >();
        r.mode         = Rep::entrywise;
        r.base         = k.symbol;
        r.basis        = true;
        r.P = k.P, r.Pinv = k.Pinv, r.Q = k.Q, r.Qinv = k.Qinv;
    }
    else if ( A.is< ops::AdPair >() )
    {
        const auto & k  = A.as< ops::AdPair >();
        const Eig    ea = diagonalize( k.a ), eb = diagonalize( k.b );
        r.mode          = Rep::entrywise;
        r.basis         = true;
        r.P = ea.V, r.Pinv = ea.Vinv, r.Q = eb.V, r.Qinv = eb.Vinv;
        r.base.resize( k.a.rows(), k.b.rows() );
        for ( Index i = 0; i < r.base.rows(); ++i )
            for ( Index j = 0; j < r.base.cols(); ++j ) r.base( i, j ) = ea.values( i ) - eb.values( j );
    }
    else
    {
        r.mode = Rep::dense;
        r.base = A.materialize();
    }
    r.spec = r.compute_spectrum();
    return r;
}

inline double spectral_scale ( const CVector & spec )
{
    double m = 0.0;
    for ( Index i = 0; i < spec.size(); ++i ) m = std::max( m, std::abs( spec( i ) ) );
    return m;
}

inline double zero_tolerance ( const CVector & spec ) { return 1e-10 * std::max( spectral_scale( spec ), 1e-300 ); }

}// namespace detail

///
/// eigenvalues of A (for left/right multiplication: those of the factor)
///
inline CVector spectrum ( const LpOperator & A ) { return detail::make_rep( A ).spec; }

// max |arg λ| over the nonzero spectrum
inline double spectral_angle ( const CVector & spec )
{
    const double tol = detail::zero_tolerance( spec );
    double       w   = 0.0;
    for ( Index i = 0; i < spec.size(); ++i )
        if ( std::abs( spec( i ) ) > tol ) w = std::max( w, std::abs( std::arg( spec( i ) ) ) );
    return w;
}

///
/// R(z, A) = (z - A)^{-1}, in the structured form of A where possible
///
inline LpOperator resolvent ( const LpOperator & A, cplx z )
{
    const auto rep = detail::make_rep( A );
    return rep.wrap( rep.resolvent( z ) );
}

///
/// f(A) by diagonalisation: V f(Λ) V⁻¹ on the generator kernel
///
inline LpOperator eigen_calculus ( const LpOperator & A, const std::function< cplx ( cplx ) > & f,
                                   KernelPolicy policy = KernelPolicy::vanish, double max_cond = 1e8 )
{
    const auto   rep  = detail::make_rep( A );
    const auto   spec = rep.spec;
    const double ztol = detail::zero_tolerance( spec );

    auto fz = [&] ( cplx z ) -> cplx {
        if ( policy == KernelPolicy::vanish && std::abs( z ) <= ztol ) return 0.0;
        return f( z );
    };

    if ( rep.mode == detail::Rep::entrywise ) return rep.wrap( rep.base.unaryExpr( fz ) );

    const auto e  = detail::diagonalize( rep.base, max_cond );
    CVector    fv = e.values.unaryExpr( fz );
    return rep.wrap( e.V * fv.asDiagonal() * e.Vinv );
}

inline LpOperator eigen_calculus ( const LpOperator & A, const HolFn & f, KernelPolicy policy = KernelPolicy::vanish )
{
    return eigen_calculus( A, [&f] ( cplx z ) { return f( z ); }, policy );
}

///
/// Diagonalised form of A for repeated evaluation of f(A)x with many f
/// (square functions, semigroup orbits).
///
class SpectralForm
{
public:
    explicit SpectralForm ( const LpOperator & A, double max_cond = 1e8 )
        : _rep( detail::make_rep( A ) )
        , _dim( A.dim() )
    {
        _ztol = detail::zero_tolerance( _rep.spec );
        if ( _rep.mode == detail::Rep::entrywise )
            _values = _rep.spec;
        else
        {
            _eig    = detail::diagonalize( _rep.base, max_cond );
            _values = _eig.values;
        }
    }

    const CVector & eigenvalues    () const { return _values; }
    double          zero_tolerance () const { return _ztol; }
    Index           dim            () const { return _dim; }

    // f(A) x with f̊(0) = 0
    CMatrix apply ( const std::function< cplx ( cplx ) > & f, const CMatrix & x ) const
    {
        return act( values_of( f ), x, false );
    }

    // f(A)* y for the Hilbert-Schmidt pairing
    CMatrix apply_adjoint ( const std::function< cplx ( cplx ) > & f, const CMatrix & y ) const
    {
        return act( values_of( f ), y, true );
    }

    // spectral projection onto the kernel of A
    CMatrix kernel_projection ( const CMatrix & x ) const
    {
        CVector v = _values.unaryExpr( [this] ( cplx z ) { return std::abs( z ) <= _ztol ? cplx( 1.0 ) : cplx( 0.0 ); } );
        return act( v, x, false );
    }

    LpOperator op ( const std::function< cplx ( cplx ) > & f ) const
    {
        const CVector v = values_of( f );
        if ( _rep.mode == detail::Rep::entrywise )
            return _rep.wrap( Eigen::Map< const CMatrix >( v.data(), _rep.base.rows(), _rep.base.cols() ) );
        return _rep.wrap( _eig.V * v.asDiagonal() * _eig.Vinv );
    }

private:
    CVector values_of ( const std::function< cplx ( cplx ) > & f ) const
    {
        return _values.unaryExpr( [&] ( cplx z ) { return std::abs( z ) <= _ztol ? cplx( 0.0 ) : f( z ); } );
    }

    CMatrix act ( const CVector & v, const CMatrix & x, bool adj ) const
    {
        if ( x.rows() != _dim || x.cols() != _dim ) throw shape_error( "SpectralForm: argument has wrong shape" );

        const auto & r = _rep;
        switch ( r.mode )
        {
            case detail::Rep::entrywise:
            {
                const Eigen::Map< const CMatrix > s( v.data(), r.base.rows(), r.base.cols() );
                if ( !r.basis ) return adj ? CMatrix( s.conjugate().cwiseProduct( x ) ) : CMatrix( s.cwiseProduct( x ) );
                if ( !adj ) return r.P * s.cwiseProduct( r.Pinv * x * r.Q ) * r.Qinv;
                return r.Pinv.adjoint() * s.conjugate().cwiseProduct( r.P.adjoint() * x * r.Qinv.adjoint() ) * r.Q.adjoint();
            }
            case detail::Rep::left:
            {
                const CMatrix k = _eig.V * v.asDiagonal() * _eig.Vinv;
                return adj ? CMatrix( k.adjoint() * x ) : CMatrix( k * x );
            }
            case detail::Rep::right:
            {
                const CMatrix k = _eig.V * v.asDiagonal() * _eig.Vinv;
                return adj ? CMatrix( x * k.adjoint() ) : CMatrix( x * k );
            }
            default:
            {
                const Eigen::Map< const CVector > xv( x.data(), x.size() );
                CVector                           t = adj ? CVector( _eig.V.adjoint() * xv ) : CVector( _eig.Vinv * xv );
                t = adj ? CVector( v.conjugate().cwiseProduct( t ) ) : CVector( v.cwiseProduct( t ) );
                CMatrix y( _dim, _dim );
                Eigen::Map< CVector >( y.data(), y.size() ) = adj ? CVector( _eig.Vinv.adjoint() * t ) : CVector( _eig.V * t );
                return y;
            }
        }
    }

    detail::Rep _rep;
    detail::Eig _eig;
    CVector     _values;
    double      _ztol;
    Index       _dim;
};

///
/// Contour adapted to the spectrum of A and the decay of f: gamma halfway
/// between the spectral angle and the angle of f, window set so that the
/// decay envelope has fallen below 1e-13 at both ends, step small enough for
/// the trapezoid rule in log-radius to resolve the strip of analyticity.
///
inline ContourSpec default_contour ( const CVector & spec, const HolFn & f )
{
    const double omega = spectral_angle( spec );
    if ( !( omega < f.theta() ) )
        throw domain_error( "contour: spectral angle " + format_double( omega ) + " is not below the angle of " + f.name() );

    const double ztol = detail::zero_tolerance( spec );
    double       lo = std::numeric_limits< double >::infinity(), hi = 0.0;
    for ( Index i = 0; i < spec.size(); ++i )
    {
        const double a = std::abs( spec( i ) );
        if ( a > ztol )
        {
            lo = std::min( lo, a );
            hi = std::max( hi, a );
        }
    }
    if ( hi == 0.0 ) lo = hi = 1.0;

    const double theta = std::min( f.theta(), pi * 0.999 );
    const double gamma = 0.5 * ( omega + theta );
    const double s     = f.klass() == HolClass::hinf0 ? f.decay_s() : 1.0;
    const double eps   = 1e-13 / std::max( 1.0, f.decay_c() );

    const double r_min = lo * std::pow( eps, 1.0 / s );
    const double r_max = hi * std::pow( eps, -1.0 / s );
    const double strip = std::min( gamma - omega, theta - gamma );
    const double h     = 2.0 * pi * strip / 40.0;
    const int    n     = std::clamp( int( std::ceil( std::log( r_max / r_min ) / h ) ) + 1, 400, 40000 );
    return { gamma, r_min, r_max, n };
}

namespace detail
{

//
// (1/2πi) ∫_Γ f(z) R(z,A) dz as a kernel matrix; the half-rule (every other
// node) gives the error estimate
//
inline std::pair< CMatrix, double > contour_kernel ( const Rep & rep, const std::function< cplx ( cplx ) > & f,
                                                     const ContourSpec & c )
{
    const double du = std::log( c.r_max / c.r_min ) / double( c.n_points - 1 );

    CMatrix even = CMatrix::Zero( rep.base.rows(), rep.base.cols() );
    CMatrix odd  = even;

    const cplx up = std::polar( 1.0, c.gamma ), dn = std::conj( up );

    for ( int k = 0; k < c.n_points; ++k )
    {
        const double r  = c.r_min * std::exp( du * k );
        const double wt = ( k == 0 || k == c.n_points - 1 ) ? 0.5 : 1.0;
        const cplx   zl = r * dn, zu = r * up;
        // lower ray outward, upper ray inward
        CMatrix term = ( f( zl ) * dn * r ) * rep.resolvent( zl ) - ( f( zu ) * up * r ) * rep.resolvent( zu );
        ( k % 2 == 0 ? even : odd ) += wt * term;
    }

    const cplx    pref = du / ( 2.0 * pi * cplx( 0.0, 1.0 ) );
    const CMatrix full = pref * ( even + odd );
    const CMatrix half = 2.0 * pref * even;
    const double  fn   = full.norm();
    const double  err  = ( full - half ).norm() / std::max( fn, 1e-300 );
    return { full, err };
}

// Riesz projection onto the generalized kernel of A: (1/2πi) ∮_{|z|=ρ} R(z,A) dz
inline CMatrix kernel_projection ( const Rep & rep, const CVector & spec )
{
    const double ztol = zero_tolerance( spec );
    double       lo   = std::numeric_limits< double >::infinity();
    bool         zero = false;
    for ( Index i = 0; i < spec.size(); ++i )
    {
        const double a = std::abs( spec( i ) );
        if ( a > ztol ) lo = std::min( lo, a );
        else            zero = true;
    }
    CMatrix p = CMatrix::Zero( rep.base.rows(), rep.base.cols() );
    if ( !zero ) return p;
    if ( !std::isfinite( lo ) ) return rep.identity();

    const double rho   = 0.5 * lo;
    const int    nodes = 128;
    for ( int k = 0; k < nodes; ++k )
    {
        const cplx z = std::polar( rho, 2.0 * pi * k / nodes );
        // dz / (2πi) = z dφ / 2π
        p += ( z / double( nodes ) ) * rep.resolvent( z );
    }
    return p;
}

}// namespace detail

///
/// f(A) = (1/2πi) ∫_{Γ_γ} f(z) R(z,A) dz for f ∈ H∞₀
///
inline ContourResult contour_calculus ( const LpOperator & A, const HolFn & f, std::optional< ContourSpec > spec = {},
                                        double tol = 1e-6 )
{
    if ( f.klass() != HolClass::hinf0 )
        throw domain_error( "contour_calculus: " + f.name() + " is not decaying; use extended_calculus" );

    const auto rep  = detail::make_rep( A );
    const auto sp   = rep.spec;
    const auto c    = spec ? *spec : default_contour( sp, f );
    c.validate();

    const double omega = spectral_angle( sp );
    if ( !( omega < c.gamma && c.gamma < f.theta() ) )
        throw domain_error( "contour_calculus: need spectral angle < gamma < angle of f" );

    auto [k, err] = detail::contour_kernel( rep, [&f] ( cplx z ) { return f( z ); }, c );
    return { rep.wrap( std::move( k ) ), err, err <= tol, c };
}

///
/// f(A) = (g(A) + P₀)⁻¹ (fg)(A) with g(z) = z/(1+z)² and P₀ the projection
/// onto the kernel of A, so that f acts as f̊(0) = 0 there.
///
inline ContourResult extended_calculus ( const LpOperator & A, const HolFn & f, double tol = 1e-6 )
{
    const HolFn g  = holfn::g();
    const HolFn fg = f * g;

    const auto rep = detail::make_rep( A );
    const auto sp  = rep.spec;

    const auto c_fg = default_contour( sp, fg );
    const auto c_g  = default_contour( sp, g );

    auto [k_fg, e_fg] = detail::contour_kernel( rep, [&fg] ( cplx z ) { return fg( z ); }, c_fg );
    auto [k_g, e_g]   = detail::contour_kernel( rep, [&g] ( cplx z ) { return g( z ); }, c_g );

    const CMatrix p0  = detail::kernel_projection( rep, sp );
    const CMatrix inv = rep.inverse( k_g + p0 );
    const CMatrix k   = rep.compose( inv, k_fg );

    const double err = e_fg + e_g;
    return { rep.wrap( k ), err, err <= tol, c_fg };
}

inline ContourResult imaginary_power ( const LpOperator & A, double s, double tol = 1e-6 )
{
    return extended_calculus( A, holfn::zis( s ), tol );
}

//
// operator norms on S^p
//

struct OpNorm
{
    double value;
    bool   exact;   // false: lower bound from power iteration
};

///
/// ‖T‖_{S^p → S^p}. Exact for p = 2 (spectral norm of the superoperator) and for
/// one-sided multiplications; otherwise a lower bound by the p → p power method
/// with `starts` random starts.
///
inline OpNorm operator_norm ( const LpOperator & T, PExponent p, int starts = 50, std::uint64_t seed = 0x0b0d,
                              int iterations = 100 )
{
    if ( T.is< ops::LeftMult >() ) return { spectral_norm( T.as< ops::LeftMult >().a ), true };
    if ( T.is< ops::RightMult >() ) return { spectral_norm( T.as< ops::RightMult >().b ), true };
    if ( p.value() == 2.0 )
    {
        if ( T.is< ops::SchurMult >() ) return { T.as< ops::SchurMult >().symbol.cwiseAbs().maxCoeff(), true };
        return { spectral_norm( T.materialize() ), true };
    }

    const Index     d  = T.dim();
    const auto      pc = p.conjugate();
    std::mt19937_64 rng( seed );
    double          best = 0.0;

    for ( int s = 0; s < starts; ++s )
    {
        CMatrix x = random_matrix( d, d, rng );
        x /= schatten_norm( x, p );
        double prev = 0.0;
        for ( int it = 0; it < iterations; ++it )
        {
            const CMatrix y  = T.apply( x );
            const double  ny = schatten_norm( y, p );
            best             = std::max( best, ny );
            if ( ny == 0.0 || std::abs( ny - prev ) <= 1e-13 * ny ) break;
            prev            = ny;
            const CMatrix w = T.apply_adjoint( dual_element( y, p ) );
            const CMatrix xn = dual_element( w, pc );
            if ( xn.norm() == 0.0 ) break;
            x = xn;
        }
    }
    return { best, false };
}

//
// sectoriality
//

struct SectorProfile
{
    double                                   omega_hat;
    std::vector< std::pair< double, double > > constants;   // (θ, K_θ)
};

///
/// ω̂ from the spectrum and K_θ = max ‖zR(z,A)‖ over z on ∂Σ_θ
///
inline SectorProfile sector_type ( const LpOperator & A, std::vector< double > thetas = {}, PExponent p = 2.0,
                                   int radii = 41 )
{
    const auto   rep   = detail::make_rep( A );
    const auto   sp    = rep.spec;
    const double omega = spectral_angle( sp );
    const double rho   = detail::spectral_scale( sp ) > 0.0 ? detail::spectral_scale( sp ) : 1.0;

    if ( thetas.empty() )
        for ( int k = 1; k <= 7; ++k ) thetas.push_back( omega + ( pi - omega ) * k / 8.0 );

    SectorProfile prof{ omega, {} };
    for ( double th : thetas )
    {
        if ( !( th > omega && th < pi ) ) throw domain_error( "sector_type: probe angle must lie in (omega_hat, pi)" );
        double k = 0.0;
        for ( int sgn : { -1, 1 } )
            for ( int i = 0; i < radii; ++i )
            {
                const double r = rho * std::pow( 10.0, -3.0 + 6.0 * i / double( radii - 1 ) );
                const cplx   z = std::polar( r, sgn * th );
                k = std::max( k, operator_norm( scaled( rep.wrap( rep.resolvent( z ) ), z ), p, 8 ).value );
            }
        prof.constants.emplace_back( th, k );
    }
    return prof;
}

//
// integral identities
//

struct Quadrature
{
    std::vector< double > nodes, weights;
};

///
/// Gauss-Hermite rule for ∫ e^{-x²} φ(x) dx (Golub-Welsch)
///
inline Quadrature gauss_hermite ( int n )
{
    if ( n < 1 ) throw domain_error( "gauss_hermite: need at least one node" );
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero( n, n );
    for ( int k = 1; k < n; ++k ) J( k, k - 1 ) = J( k - 1, k ) = std::sqrt( k / 2.0 );
    Eigen::SelfAdjointEigenSolver< Eigen::MatrixXd > es( J );
    Quadrature q;
    for ( int k = 0; k < n; ++k )
    {
        q.nodes.push_back( es.eigenvalues()( k ) );
        const double v = es.eigenvectors()( 0, k );
        q.weights.push_back( std::sqrt( pi ) * v * v );
    }
    return q;
}

namespace detail
{

inline CMatrix hermitian_exp ( const Eigen::SelfAdjointEigenSolver< CMatrix > & es, cplx c )
{
    const CVector e = ( c * es.eigenvalues().cast< cplx >() ).array().exp();
    return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

inline double group_average_residual ( const CMatrix & h, int nodes )
{
    if ( !is_hermitian( h ) ) throw domain_error( "group average: generator must be hermitian" );
    const Eigen::SelfAdjointEigenSolver< CMatrix > es( 0.5 * ( h + h.adjoint() ) );
    const auto                                     q = gauss_hermite( nodes );

    CMatrix avg = CMatrix::Zero( h.rows(), h.cols() );
    for ( int k = 0; k < nodes; ++k )
        avg += ( q.weights[k] / std::sqrt( pi ) ) * hermitian_exp( es, cplx( 0.0, std::sqrt( 2.0 ) * q.nodes[k] ) );

    const CMatrix h2     = h * h;
    const CMatrix oracle = ( -0.5 * h2 ).exp();
    return spectral_norm( avg - oracle );
}

}// namespace detail

///
/// (1/√2π) ∫ e^{-s²/2} e^{isa} ds against e^{-a²/2}; returns the operator-norm residual
///
inline double group_average_identity ( const CMatrix & a, int nodes = 64 )
{
    return detail::group_average_residual( a, nodes );
}

///
/// same identity for the group x ↦ e^{isa} x e^{-isb} generated by Ad_{(a,b)}
///
inline double group_average_identity ( const LpOperator & ad, int nodes = 64 )
{
    if ( !ad.is< ops::AdPair >() ) throw domain_error( "group average: expects an Ad operator" );
    return detail::group_average_residual( ad.materialize(), nodes );
}

struct SubordinationGrid
{
    double u_min = -6.0;
    double u_max = 56.0;
    int    n     = 1500;
};

struct SubordinationResult
{
    double residual;
    double weight_integral;
};

// h(s) = e^{-1/4s} / (2√π s^{3/2})
inline double subordination_density ( double s )
{
    return std::exp( -1.0 / ( 4.0 * s ) ) / ( 2.0 * std::sqrt( pi ) * std::pow( s, 1.5 ) );
}

///
/// ∫_0^∞ h(s) e^{-s t² C} ds against e^{-t C^{1/2}}, s = e^u, trapezoid in u
///
inline SubordinationResult subordination_identity ( const CMatrix & c, double t, const SubordinationGrid & grid = {} )
{
    if ( !( t >= 0.0 ) ) throw domain_error( "subordination: t must be >= 0" );
    if ( !is_hermitian( c ) ) throw domain_error( "subordination: C must be hermitian PSD" );

    const CMatrix ch = 0.5 * ( c + c.adjoint() );
    const CMatrix root = psd_sqrt( ch );
    const CMatrix oracle = ( -t * root ).exp();

    const double du  = ( grid.u_max - grid.u_min ) / double( grid.n - 1 );
    CMatrix      acc = CMatrix::Zero( c.rows(), c.cols() );
    double       wi  = 0.0;
    for ( int k = 0; k < grid.n; ++k )
    {
        const double s  = std::exp( grid.u_min + du * k );
        const double wt = ( k == 0 || k == grid.n - 1 ? 0.5 : 1.0 ) * du * s * subordination_density( s );
        wi += wt;
        if ( wt == 0.0 ) continue;
        const CMatrix semigroup = ( -s * t * t * ch ).exp();
        acc += wt * semigroup;
    }
    return { spectral_norm( acc - oracle ), wi };
}

inline SubordinationResult subordination_identity ( const LpOperator & C, double t, const SubordinationGrid & grid = {} )
{
    return subordination_identity( C.materialize(), t, grid );
}

}// namespace nclp
