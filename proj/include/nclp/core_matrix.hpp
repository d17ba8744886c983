#pragma once
//
// Dense complex matrices as elements of the finite noncommutative L^p space
// S^p_d (full matrix algebra, unnormalized trace).
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nclp
{

using cplx    = std::complex< double >;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index   = Eigen::Index;

inline constexpr double pi = 3.14159265358979323846;

//
// error hierarchy
//
struct error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// incompatible dimensions or malformed input
struct shape_error : error
{
    using error::error;
};

// violated precondition (out-of-range parameter, non-hermitian input, ...)
struct domain_error : error
{
    using error::error;
};

// failure of an underlying numerical routine
struct numeric_error : error
{
    using error::error;
};

// evaluation point too close to the spectrum of an operator
struct spectral_collision : numeric_error
{
    using numeric_error::numeric_error;
};

///
/// exponent 1 <= p <= infinity
///
class PExponent
{
public:
    constexpr PExponent ( double p = 2.0 )
        : _value( p )
    {
        if ( !( p >= 1.0 ) )   // also rejects NaN
            throw domain_error( "PExponent: p must satisfy 1 <= p <= inf" );
    }

    static constexpr PExponent infinity () { return PExponent( std::numeric_limits< double >::infinity() ); }

    constexpr double value       () const { return _value; }
    constexpr bool   is_infinite () const { return _value == std::numeric_limits< double >::infinity(); }

    // 1/p + 1/p' = 1
    constexpr PExponent conjugate () const
    {
        if ( is_infinite() ) return PExponent( 1.0 );
        if ( _value == 1.0 ) return infinity();
        return PExponent( _value / ( _value - 1.0 ) );
    }

    friend constexpr bool operator == ( PExponent a, PExponent b ) { return a._value == b._value; }

private:
    double _value;
};

inline std::string to_string ( PExponent p )
{
    if ( p.is_infinite() ) return "inf";
    std::ostringstream os;
    os.precision( 17 );
    os << p.value();
    return os.str();
}

//
// basic helpers
//

inline void require_finite ( const CMatrix & x, const char * what )
{
    if ( x.rows() < 1 || x.cols() < 1 )
        throw shape_error( std::string( what ) + ": empty matrix" );
    if ( !x.allFinite() )
        throw domain_error( std::string( what ) + ": matrix has non-finite entries" );
}

inline CMatrix adjoint ( const CMatrix & x ) { return x.adjoint(); }

// E_{ij} in M_{rows x cols}, 0-based indices
inline CMatrix matrix_unit ( Index rows, Index cols, Index i, Index j )
{
    CMatrix e = CMatrix::Zero( rows, cols );
    e( i, j ) = 1.0;
    return e;
}

inline CMatrix diag ( const std::vector< cplx > & d )
{
    CMatrix m = CMatrix::Zero( Index( d.size() ), Index( d.size() ) );
    for ( std::size_t i = 0; i < d.size(); ++i )
        m( Index( i ), Index( i ) ) = d[i];
    return m;
}

inline double spectral_norm ( const CMatrix & x )
{
    if ( x.size() == 0 ) return 0.0;
    Eigen::JacobiSVD< CMatrix > svd( x );
    return svd.singularValues()( 0 );
}

inline RVector singular_values ( const CMatrix & x )
{
    Eigen::JacobiSVD< CMatrix > svd( x );
    RVector s = svd.singularValues();
    if ( !s.allFinite() )
        throw numeric_error( "singular value decomposition failed (" + std::to_string( x.rows() ) + "x" +
                             std::to_string( x.cols() ) + " matrix, non-finite singular values)" );
    return s;
}

//
// (Σ s_i^p)^{1/p} with scaling by the largest entry; p = inf gives max
//
inline double lp_of_nonneg ( const RVector & s, PExponent p )
{
    if ( s.size() == 0 ) return 0.0;

    const double smax = s.maxCoeff();

    if ( p.is_infinite() ) return smax;
    if ( smax <= 0.0 )     return 0.0;

    const double pv  = p.value();
    double       acc = 0.0;

    for ( Index i = 0; i < s.size(); ++i )
        if ( s( i ) > 0.0 )
            acc += std::pow( s( i ) / smax, pv );

    return smax * std::pow( acc, 1.0 / pv );
}

///
/// Schatten p-norm via singular values; operator norm for p = inf
///
inline double schatten_norm ( const CMatrix & x, PExponent p )
{
    return lp_of_nonneg( singular_values( x ), p );
}

inline bool is_hermitian ( const CMatrix & x, double rel_tol = 1e-10 )
{
    if ( x.rows() != x.cols() ) return false;
    const double scale = std::max( x.cwiseAbs().maxCoeff(), std::numeric_limits< double >::min() );
    return ( x - x.adjoint() ).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

///
/// PSD square root; eigenvalues in [-tol, 0) are clamped to zero
///
inline CMatrix psd_sqrt ( const CMatrix & x, double rel_tol = 1e-10 )
{
    if ( x.rows() != x.cols() )
        throw shape_error( "psd_sqrt: matrix is not square" );

    const double scale = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;

    if ( scale == 0.0 ) return CMatrix::Zero( x.rows(), x.cols() );
    if ( !is_hermitian( x, rel_tol ) )
        throw domain_error( "psd_sqrt: matrix is not hermitian" );

    const CMatrix                                 h = 0.5 * ( x + x.adjoint() );
    Eigen::SelfAdjointEigenSolver< CMatrix >      eig( h );
    const double                                  opnorm = eig.eigenvalues().cwiseAbs().maxCoeff();
    RVector                                       ev     = eig.eigenvalues();

    if ( ev.minCoeff() < -rel_tol * opnorm )
        throw domain_error( "psd_sqrt: eigenvalue " + std::to_string( ev.minCoeff() ) + " below tolerance" );

    for ( Index i = 0; i < ev.size(); ++i )
        ev( i ) = std::sqrt( std::max( ev( i ), 0.0 ) );

    return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
}

///
/// |x| = (x*x)^{1/2}
///
inline CMatrix modulus ( const CMatrix & x )
{
    // polar decomposition through the SVD is more accurate than psd_sqrt( x*x )
    Eigen::JacobiSVD< CMatrix > svd( x, Eigen::ComputeThinV );
    const auto &                v = svd.matrixV();
    return v * svd.singularValues().cast< cplx >().asDiagonal() * v.adjoint();
}

///
/// duality pairing <x, y> = tr(xy)
///
inline cplx trace_pair ( const CMatrix & x, const CMatrix & y )
{
    if ( x.cols() != y.rows() || x.rows() != y.cols() )
        throw shape_error( "trace_pair: shapes are not compatible for a square product" );

    cplx acc = 0.0;
    for ( Index i = 0; i < x.rows(); ++i )
        acc += x.row( i ).transpose().cwiseProduct( y.col( i ) ).sum();
    return acc;
}

///
/// Duality map S^p -> unit sphere of S^{p'}: returns w with ‖w‖_{p'} = 1 and
/// Re tr(w* x) = ‖x‖_p. For p = 1 the (non-unique) choice U V* on the support
/// of x is taken, for p = inf the top singular pair(s) are used.
///
inline CMatrix dual_element ( const CMatrix & x, PExponent p )
{
    Eigen::JacobiSVD< CMatrix > svd( x, Eigen::ComputeThinU | Eigen::ComputeThinV );
    const RVector &             s    = svd.singularValues();
    const double                smax = s.size() ? s( 0 ) : 0.0;

    if ( smax == 0.0 ) return CMatrix::Zero( x.rows(), x.cols() );

    RVector w( s.size() );

    if ( p.value() == 1.0 )
    {
        for ( Index i = 0; i < s.size(); ++i )
            w( i ) = ( s( i ) > 1e-14 * smax ) ? 1.0 : 0.0;
    }
    else if ( p.is_infinite() )
    {
        Index top = 0;
        for ( Index i = 0; i < s.size(); ++i )
            top += ( s( i ) >= smax * ( 1.0 - 1e-12 ) );
        for ( Index i = 0; i < s.size(); ++i )
            w( i ) = ( i < top ) ? 1.0 / double( top ) : 0.0;
    }
    else
    {
        const double pv   = p.value();
        const double norm = lp_of_nonneg( s, p );
        for ( Index i = 0; i < s.size(); ++i )
            w( i ) = std::pow( s( i ) / norm, pv - 1.0 );
    }

    return svd.matrixU() * w.cast< cplx >().asDiagonal() * svd.matrixV().adjoint();
}

//
// random matrices (complex Gaussian entries)
//
inline CMatrix random_matrix ( Index rows, Index cols, std::mt19937_64 & rng )
{
    std::normal_distribution< double > nd( 0.0, 1.0 );
    CMatrix                            m( rows, cols );
    for ( Index j = 0; j < cols; ++j )
        for ( Index i = 0; i < rows; ++i )
        {
            const double re = nd( rng );
            const double im = nd( rng );
            m( i, j )       = cplx( re, im );
        }
    return m;
}

inline CMatrix random_hermitian ( Index n, std::mt19937_64 & rng )
{
    const CMatrix g = random_matrix( n, n, rng );
    return 0.5 * ( g + g.adjoint() );
}

inline CMatrix random_unitary ( Index n, std::mt19937_64 & rng )
{
    Eigen::HouseholderQR< CMatrix > qr( random_matrix( n, n, rng ) );
    return qr.householderQ() * CMatrix::Identity( n, n );
}

//
// text format: "rows cols" then rows lines of cols "re,im" pairs
//

inline std::string format_double ( double v )
{
    char buf[40];
    std::snprintf( buf, sizeof( buf ), "%.17g", v );
    return buf;
}

inline void write_matrix ( std::ostream & os, const CMatrix & x )
{
    os << x.rows() << ' ' << x.cols() << '\n';
    for ( Index i = 0; i < x.rows(); ++i )
    {
        for ( Index j = 0; j < x.cols(); ++j )
        {
            if ( j ) os << ' ';
            os << format_double( x( i, j ).real() ) << ',' << format_double( x( i, j ).imag() );
        }
        os << '\n';
    }
}

namespace detail
{

inline cplx parse_entry ( const std::string & tok )
{
    const auto comma = tok.find( ',' );
    if ( comma == std::string::npos )
        throw shape_error( "matrix text: entry '" + tok + "' is not a re,im pair" );

    const std::string re = tok.substr( 0, comma );
    const std::string im = tok.substr( comma + 1 );
    char *            end = nullptr;

    const double r = std::strtod( re.c_str(), &end );
    if ( re.empty() || *end != '\0' ) throw shape_error( "matrix text: bad real part '" + re + "'" );
    const double c = std::strtod( im.c_str(), &end );
    if ( im.empty() || *end != '\0' ) throw shape_error( "matrix text: bad imaginary part '" + im + "'" );

    return { r, c };
}

}// namespace detail

// returns false on clean end-of-stream before a header line
inline bool read_matrix ( std::istream & is, CMatrix & x )
{
    std::string line;

    // skip blank lines before the header
    while ( std::getline( is, line ) )
    {
        if ( line.find_first_not_of( " \t\r" ) != std::string::npos ) break;
    }
    if ( !is && line.find_first_not_of( " \t\r" ) == std::string::npos ) return false;

    std::istringstream hdr( line );
    long               rows = 0, cols = 0;
    if ( !( hdr >> rows >> cols ) || rows < 1 || cols < 1 )
        throw shape_error( "matrix text: bad header '" + line + "'" );

    x.resize( rows, cols );
    for ( long i = 0; i < rows; ++i )
    {
        if ( !std::getline( is, line ) )
            throw shape_error( "matrix text: missing row " + std::to_string( i ) );
        std::istringstream rs( line );
        std::string        tok;
        for ( long j = 0; j < cols; ++j )
        {
            if ( !( rs >> tok ) )
                throw shape_error( "matrix text: row " + std::to_string( i ) + " has too few entries" );
            x( i, j ) = detail::parse_entry( tok );
        }
        if ( rs >> tok )
            throw shape_error( "matrix text: row " + std::to_string( i ) + " has too many entries" );
    }
    require_finite( x, "matrix text" );
    return true;
}

inline CMatrix read_matrix ( std::istream & is )
{
    CMatrix x;
    if ( !read_matrix( is, x ) ) throw shape_error( "matrix text: no matrix found" );
    return x;
}

}// namespace nclp
