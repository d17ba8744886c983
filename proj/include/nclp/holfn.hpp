#pragma once
//
// Bounded analytic functions on sectors Σ_θ = { z ≠ 0 : |arg z| < θ }.
//

#include "nclp/core_matrix.hpp"

#include <functional>
#include <memory>
#include <string>

namespace nclp
{

enum class HolClass
{
    hinf,    // bounded analytic on Σ_θ
    hinf0    // additionally |f(z)| <= c |z|^s / (1 + |z|)^{2s}
};

class HolFn
{
public:
    using Fn = std::function< cplx ( cplx ) >;

    HolFn ( std::string name, double theta, Fn eval, HolClass klass, double decay = 0.0 )
        : _name( std::move( name ) )
        , _theta( theta )
        , _eval( std::move( eval ) )
        , _klass( klass )
        , _s( decay )
    {
        if ( !( theta > 0.0 && theta <= pi ) )
            throw domain_error( "HolFn " + _name + ": angle must lie in (0, pi]" );
        if ( _klass == HolClass::hinf0 && !( _s > 0.0 ) )
            throw domain_error( "HolFn " + _name + ": decay exponent must be positive" );
        probe();
    }

    cplx operator () ( cplx z ) const { return _eval( z ); }

    const std::string & name    () const { return _name; }
    double              theta   () const { return _theta; }
    HolClass            klass   () const { return _klass; }
    double              decay_s () const { return _s; }   // s of the H∞₀ envelope
    double              decay_c () const { return _c; }   // c of the H∞₀ envelope
    double              sup_probe () const { return _sup; }

    // f̊: f on nonzero points, 0 at the origin
    cplx at_spectrum ( cplx z, double zero_tol = 0.0 ) const
    {
        if ( std::abs( z ) <= zero_tol ) return 0.0;
        return _eval( z );
    }

    // envelope c |z|^s / (1+|z|)^{2s}
    double envelope ( double r ) const { return _c * std::pow( r, _s ) / std::pow( 1.0 + r, 2.0 * _s ); }

    ///
    /// sup of |f| over Σ_angle, sampled on rays |arg z| <= angle (angle < theta)
    ///
    double sup_norm ( double angle, int rays = 33, int radii = 161 ) const
    {
        double sup = 0.0;
        for ( int a = 0; a < rays; ++a )
        {
            const double phi = -angle + 2.0 * angle * a / double( rays - 1 );
            for ( int k = 0; k < radii; ++k )
            {
                const double r = std::pow( 10.0, -8.0 + 16.0 * k / double( radii - 1 ) );
                sup            = std::max( sup, std::abs( _eval( std::polar( r, phi ) ) ) );
            }
        }
        return sup;
    }

    friend HolFn operator * ( const HolFn & f, const HolFn & g )
    {
        const double theta = std::min( f._theta, g._theta );
        HolClass     klass = HolClass::hinf;
        double       s     = 0.0;
        if ( f._klass == HolClass::hinf0 ) { klass = HolClass::hinf0; s += f._s; }
        if ( g._klass == HolClass::hinf0 ) { klass = HolClass::hinf0; s += g._s; }
        Fn fe = f._eval, ge = g._eval;
        return HolFn( f._name + "*" + g._name, theta, [fe, ge] ( cplx z ) { return fe( z ) * ge( z ); }, klass, s );
    }

private:
    // verify boundedness (and the H∞₀ envelope) on a probe grid inside the sector
    void probe ()
    {
        const double fracs[] = { 0.0, 0.25, 0.5, 0.75, 0.95 };
        _sup = 0.0;
        _c   = 0.0;
        for ( double fr : fracs )
            for ( int sgn : { -1, 1 } )
            {
                const double phi = sgn * fr * std::min( _theta, pi * 0.999 );
                for ( int k = 0; k <= 64; ++k )
                {
                    const double r = std::pow( 10.0, -8.0 + 16.0 * k / 64.0 );
                    const double a = std::abs( _eval( std::polar( r, phi ) ) );
                    if ( !std::isfinite( a ) )
                        throw domain_error( "HolFn " + _name + ": non-finite value on probe grid" );
                    _sup = std::max( _sup, a );
                    if ( _klass == HolClass::hinf0 )
                        _c = std::max( _c, a * std::pow( 1.0 + r, 2.0 * _s ) / std::pow( r, _s ) );
                }
            }
        if ( _klass == HolClass::hinf0 && !( _c < 1e12 ) )
            throw domain_error( "HolFn " + _name + ": decay envelope fails on probe grid" );
    }

    std::string _name;
    double      _theta;
    Fn          _eval;
    HolClass    _klass;
    double      _s;
    double      _c   = 0.0;
    double      _sup = 0.0;
};

//
// library functions
//
namespace holfn
{

// g(z) = z / (1+z)^2
inline HolFn g ()
{
    return HolFn( "g", pi, [] ( cplx z ) { return z / ( ( 1.0 + z ) * ( 1.0 + z ) ); }, HolClass::hinf0, 1.0 );
}

// g_n(z) = n² z / ((n+z)(1+nz))
inline HolFn gn ( double n )
{
    if ( !( n > 0.0 ) ) throw domain_error( "gn: n must be positive" );
    return HolFn( "gn:" + format_double( n ), pi,
                  [n] ( cplx z ) { return n * n * z / ( ( n + z ) * ( 1.0 + n * z ) ); }, HolClass::hinf0, 1.0 );
}

inline HolFn zexp ()
{
    return HolFn( "zexp", pi / 2, [] ( cplx z ) { return z * std::exp( -z ); }, HolClass::hinf0, 1.0 );
}

inline HolFn sqrtzexp ()
{
    return HolFn( "sqrtzexp", pi / 2, [] ( cplx z ) { return std::sqrt( z ) * std::exp( -z ); }, HolClass::hinf0, 0.5 );
}

// z^{is} on the principal branch; ‖z^{is}‖_{∞,θ} = e^{θ|s|}
inline HolFn zis ( double s )
{
    return HolFn( "zis:" + format_double( s ), pi, [s] ( cplx z ) { return std::exp( cplx( 0.0, s ) * std::log( z ) ); },
                  HolClass::hinf );
}

// e^{-tz} - (1+z)^{-1}
inline HolFn heat ( double t )
{
    if ( !( t > 0.0 ) ) throw domain_error( "heat: t must be positive" );
    return HolFn( "heat:" + format_double( t ), pi / 2,
                  [t] ( cplx z ) { return std::exp( -t * z ) - 1.0 / ( 1.0 + z ); }, HolClass::hinf0, 1.0 );
}

// e^{-tz}, bounded on the right half-plane
inline HolFn expo ( double t )
{
    return HolFn( "exp:" + format_double( t ), pi / 2, [t] ( cplx z ) { return std::exp( -t * z ); }, HolClass::hinf );
}

inline HolFn constant_one ()
{
    return HolFn( "one", pi, [] ( cplx ) { return cplx( 1.0 ); }, HolClass::hinf );
}

///
/// lookup by string id: g, gn:<n>, zexp, sqrtzexp, zis:<s>, heat:<t>, exp:<t>, one
///
inline HolFn from_id ( const std::string & id )
{
    const auto colon = id.find( ':' );
    const auto head  = id.substr( 0, colon );
    auto       arg   = [&] {
        if ( colon == std::string::npos ) throw domain_error( "function id '" + id + "' needs a parameter" );
        try
        {
            std::size_t used = 0;
            const auto  rest = id.substr( colon + 1 );
            double      v    = std::stod( rest, &used );
            if ( used != rest.size() ) throw std::invalid_argument( rest );
            return v;
        }
        catch ( const std::logic_error & )
        {
            throw domain_error( "function id '" + id + "': bad parameter" );
        }
    };

    if ( head == "g" && colon == std::string::npos )        return g();
    if ( head == "gn" )                                      return gn( arg() );
    if ( head == "zexp" && colon == std::string::npos )     return zexp();
    if ( head == "sqrtzexp" && colon == std::string::npos ) return sqrtzexp();
    if ( head == "zis" )                                     return zis( arg() );
    if ( head == "heat" )                                    return heat( arg() );
    if ( head == "exp" )                                     return expo( arg() );
    if ( head == "one" && colon == std::string::npos )      return constant_one();

    throw domain_error( "unknown function id '" + id + "'" );
}

}// namespace holfn

}// namespace nclp
