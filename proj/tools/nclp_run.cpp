//
// nclp_run: experiment runner over the nclp library
//
// Every subcommand reads a flat configuration (JSON file via --config, overridden
// by flags), validates it, runs, and writes one table with a header block.
//

#include "nclp/nclp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace nclp;
using namespace nclp::models;
using json = nlohmann::json;

namespace
{

enum Exit
{
    exit_ok      = 0,
    exit_usage   = 2,
    exit_numeric = 3,
    exit_budget  = 4
};

struct usage_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

//
// configuration keys
//

enum class Kind
{
    number,
    integer,
    text,
    numbers,
    integers,
    texts
};

struct Key
{
    std::string name;
    Kind        kind;
    std::string help;
};

const std::vector< Key > & keys ()
{
    static const std::vector< Key > k{
        { "p", Kind::number, "Schatten exponent, p >= 1" },
        { "dim", Kind::integer, "matrix dimension" },
        { "grid", Kind::numbers, "square-function grid tmin,tmax,n" },
        { "seed", Kind::integer, "random seed (required by stochastic subcommands)" },
        { "samples", Kind::integer, "number of random samples" },
        { "family", Kind::integer, "family length" },
        { "n", Kind::integers, "sizes, e.g. --n 4 8 16" },
        { "fn", Kind::texts, "function ids: g, gn:<n>, zexp, sqrtzexp, zis:<s>, heat:<t>" },
        { "A", Kind::texts, "operators: leftdiag:<d,..>, rightdiag:<d,..>, ad:<a,..>/<b,..>, jordan:<a,b,c>, "
                            "collinear:<n>, condexp:<N>:<k>, leftfile:<path>" },
        { "theta", Kind::numbers, "sector angles" },
        { "t", Kind::numbers, "semigroup times" },
        { "restarts", Kind::integer, "search restarts" },
        { "per-ray", Kind::integer, "resolvent points per ray" },
        { "variant", Kind::text, "square-function variant: col, row, rad" },
        { "mode", Kind::text, "subcommand mode" },
        { "points", Kind::integer, "Schur multiplier point count" },
        { "rank", Kind::integer, "free group rank" },
        { "shells", Kind::integer, "dyadic shells" },
        { "d", Kind::integer, "Fock space one-particle dimension" },
        { "N", Kind::integer, "Fock truncation level / martingale tower length" },
        { "q", Kind::numbers, "deformation parameters in (-1, 1)" },
        { "spins", Kind::integer, "Clifford spin count" },
        { "M", Kind::integers, "Cesaro depths" },
    };
    return k;
}

const Key & key ( const std::string & name )
{
    for ( const auto & k : keys() )
        if ( k.name == name ) return k;
    throw usage_error( "unknown configuration key '" + name + "'" );
}

json convert ( const Key & k, const std::vector< std::string > & raw )
{
    const auto num = [&] ( const std::string & s ) {
        try
        {
            std::size_t pos = 0;
            const double v  = std::stod( s, &pos );
            if ( pos != s.size() ) throw std::invalid_argument( s );
            return v;
        }
        catch ( const std::exception & )
        {
            throw usage_error( k.name + ": '" + s + "' is not a number" );
        }
    };
    const auto integer = [&] ( const std::string & s ) {
        const double v = num( s );
        if ( v != std::floor( v ) || std::abs( v ) > 9.0e15 ) throw usage_error( k.name + ": '" + s + "' is not an integer" );
        return static_cast< long long >( v );
    };
    const bool scalar = k.kind == Kind::number || k.kind == Kind::integer || k.kind == Kind::text;
    if ( scalar && raw.size() != 1 ) throw usage_error( k.name + ": expects a single value" );

    json out = json::array();
    for ( const auto & s : raw )
        switch ( k.kind )
        {
        case Kind::number:
        case Kind::numbers: out.push_back( num( s ) ); break;
        case Kind::integer:
        case Kind::integers: out.push_back( integer( s ) ); break;
        default: out.push_back( s );
        }
    return scalar ? out.front() : out;
}

// values from a JSON config file are checked against the declared kind
json from_file ( const Key & k, const json & v )
{
    std::vector< std::string > raw;
    const auto                 text = [] ( const json & e ) { return e.is_string() ? e.get< std::string >() : e.dump(); };
    if ( v.is_array() )
        for ( const auto & e : v ) raw.push_back( text( e ) );
    else if ( v.is_string() && ( k.kind == Kind::numbers || k.kind == Kind::integers ) )
    {
        std::stringstream ss( v.get< std::string >() );
        for ( std::string tok; std::getline( ss, tok, ',' ); ) raw.push_back( tok );
    }
    else
        raw.push_back( text( v ) );
    return convert( k, raw );
}

//
// accessors with range checks
//

struct Config
{
    json values;

    double number ( const std::string & k, double lo, double hi ) const
    {
        const double v = values.at( k ).get< double >();
        if ( !( v >= lo && v <= hi ) )
            throw usage_error( k + ": " + format_double( v ) + " outside [" + format_double( lo ) + ", " + format_double( hi ) + "]" );
        return v;
    }

    int integer ( const std::string & k, int lo, int hi ) const
    {
        const auto v = values.at( k ).get< long long >();
        if ( v < lo || v > hi )
            throw usage_error( k + ": " + std::to_string( v ) + " outside [" + std::to_string( lo ) + ", " + std::to_string( hi ) + "]" );
        return int( v );
    }

    std::vector< double > numbers ( const std::string & k, double lo, double hi ) const
    {
        std::vector< double > out;
        for ( const auto & e : values.at( k ) )
        {
            const double v = e.get< double >();
            if ( !( v >= lo && v <= hi ) )
                throw usage_error( k + ": " + format_double( v ) + " outside [" + format_double( lo ) + ", " + format_double( hi ) + "]" );
            out.push_back( v );
        }
        if ( out.empty() ) throw usage_error( k + ": empty list" );
        return out;
    }

    std::vector< int > integers ( const std::string & k, int lo, int hi ) const
    {
        std::vector< int > out;
        for ( const auto & e : values.at( k ) )
        {
            const auto v = e.get< long long >();
            if ( v < lo || v > hi )
                throw usage_error( k + ": " + std::to_string( v ) + " outside [" + std::to_string( lo ) + ", " + std::to_string( hi ) + "]" );
            out.push_back( int( v ) );
        }
        if ( out.empty() ) throw usage_error( k + ": empty list" );
        return out;
    }

    std::string text ( const std::string & k, std::initializer_list< const char * > allowed ) const
    {
        const auto v = values.at( k ).get< std::string >();
        for ( const char * a : allowed )
            if ( v == a ) return v;
        std::string list;
        for ( const char * a : allowed ) list += std::string( list.empty() ? "" : ", " ) + a;
        throw usage_error( k + ": '" + v + "' is not one of " + list );
    }

    std::vector< std::string > texts ( const std::string & k ) const
    {
        auto out = values.at( k ).get< std::vector< std::string > >();
        if ( out.empty() ) throw usage_error( k + ": empty list" );
        return out;
    }

    PExponent p () const { return number( "p", 1.0, 1e6 ); }

    std::uint64_t seed () const
    {
        if ( values.at( "seed" ).is_null() ) throw usage_error( "seed: required for this subcommand" );
        const auto v = values.at( "seed" ).get< long long >();
        if ( v < 0 ) throw usage_error( "seed: must be non-negative" );
        return std::uint64_t( v );
    }

    std::optional< LogGrid > grid () const
    {
        if ( values.at( "grid" ).is_null() ) return {};
        const auto g = values.at( "grid" ).get< std::vector< double > >();
        if ( g.size() != 3 ) throw usage_error( "grid: expects tmin,tmax,n" );
        if ( !( g[0] > 0.0 && g[1] > g[0] ) ) throw usage_error( "grid: need 0 < tmin < tmax" );
        if ( !( g[2] >= 2 && g[2] <= 1e5 && g[2] == std::floor( g[2] ) ) ) throw usage_error( "grid: n must be an integer in [2, 100000]" );
        return LogGrid::make( g[0], g[1], int( g[2] ) );
    }

    HolFn fn ( const std::string & id ) const
    {
        try
        {
            return holfn::from_id( id );
        }
        catch ( const nclp::error & e )
        {
            throw usage_error( std::string( "fn: " ) + e.what() );
        }
    }
};

//
// operator specifications
//

std::vector< cplx > entries ( const std::string & s, const std::string & spec )
{
    std::vector< cplx > out;
    std::stringstream   ss( s );
    for ( std::string tok; std::getline( ss, tok, ',' ); )
    {
        char *       end = nullptr;
        const double v   = std::strtod( tok.c_str(), &end );
        if ( tok.empty() || *end != '\0' || !std::isfinite( v ) ) throw usage_error( "A: bad entry '" + tok + "' in '" + spec + "'" );
        out.push_back( v );
    }
    if ( out.empty() || out.size() > 16 ) throw usage_error( "A: '" + spec + "' needs 1 to 16 entries" );
    return out;
}

LpOperator parse_operator ( const std::string & spec )
{
    const auto colon = spec.find( ':' );
    if ( colon == std::string::npos ) throw usage_error( "A: '" + spec + "' lacks a kind prefix" );
    const std::string kind = spec.substr( 0, colon ), arg = spec.substr( colon + 1 );

    if ( kind == "leftdiag" ) return LpOperator::left( diag( entries( arg, spec ) ) );
    if ( kind == "rightdiag" ) return LpOperator::right( diag( entries( arg, spec ) ) );
    if ( kind == "ad" )
    {
        const auto slash = arg.find( '/' );
        if ( slash == std::string::npos ) throw usage_error( "A: '" + spec + "' expects ad:<a,..>/<b,..>" );
        const auto a = entries( arg.substr( 0, slash ), spec ), b = entries( arg.substr( slash + 1 ), spec );
        if ( a.size() != b.size() ) throw usage_error( "A: '" + spec + "' needs equal lengths" );
        return LpOperator::ad( diag( a ), diag( b ) );
    }
    if ( kind == "jordan" )
    {
        const auto e = entries( arg, spec );
        if ( e.size() != 3 ) throw usage_error( "A: '" + spec + "' expects jordan:<a,b,c>" );
        CMatrix m( 2, 2 );
        m << e[0], e[2], 0.0, e[1];
        return LpOperator::left( m );
    }
    if ( kind == "collinear" )
    {
        const auto e = entries( arg, spec );
        const int  n = int( e[0].real() );
        if ( e.size() != 1 || n < 1 || n > 12 || double( n ) != e[0].real() ) throw usage_error( "A: '" + spec + "' expects collinear:<1..12>" );
        return schur_generator( collinear_symbol( n ) );
    }
    if ( kind == "condexp" )
    {
        const auto c2 = arg.find( ':' );
        int        N = 0, k = -1;
        try
        {
            N = std::stoi( arg.substr( 0, c2 ) );
            k = c2 == std::string::npos ? -1 : std::stoi( arg.substr( c2 + 1 ) );
        }
        catch ( const std::exception & )
        {
        }
        if ( N < 1 || N > 4 || k < 0 || k > N ) throw usage_error( "A: '" + spec + "' expects condexp:<N 1..4>:<k 0..N>" );
        return LpOperator::cond_exp( N, k );
    }
    if ( kind == "leftfile" )
    {
        std::ifstream in( arg );
        if ( !in ) throw usage_error( "A: cannot open '" + arg + "'" );
        try
        {
            return LpOperator::left( read_matrix( in ) );
        }
        catch ( const nclp::error & e )
        {
            throw usage_error( "A: '" + arg + "': " + e.what() );
        }
    }
    throw usage_error( "A: unknown operator kind '" + kind + "'" );
}

//
// result table
//

struct Table
{
    Table ( std::vector< std::string > cols = {} )
        : columns( std::move( cols ) )
    {
    }

    std::vector< std::string >          columns;
    std::vector< std::vector< json > > rows;
    std::vector< std::string >          warnings;   // solver budget exhausted
    std::vector< std::string >          failures;   // numeric checks not met

    void add ( std::vector< json > row ) { rows.push_back( std::move( row ) ); }
};

std::string cell ( const json & v )
{
    if ( v.is_boolean() ) return v.get< bool >() ? "true" : "false";
    if ( v.is_string() )
    {
        const auto s = v.get< std::string >();
        if ( s.find_first_of( ",\"\n" ) == std::string::npos ) return s;
        std::string q = "\"";
        for ( char ch : s ) q += ch == '"' ? std::string( "\"\"" ) : std::string( 1, ch );
        return q + "\"";
    }
    if ( v.is_null() ) return "";
    if ( v.is_number_integer() ) return std::to_string( v.get< long long >() );
    char buf[40];
    std::snprintf( buf, sizeof buf, "%.12g", v.get< double >() );
    return buf;
}

// rounded so that csv and json rows agree
json num ( double v )
{
    char buf[40];
    std::snprintf( buf, sizeof buf, "%.12g", v );
    return std::stod( buf );
}

//
// subcommands
//

Table schatten_selftest ( const Config & c )
{
    const Index     dim = c.integer( "dim", 1, 16 );
    const int       S   = c.integer( "samples", 1, 10000 );
    const PExponent p   = c.p();
    std::mt19937_64 rng( c.seed() );

    Table t{ { "sample", "p", "norm", "adjoint_diff", "modulus_diff", "holder_lhs", "holder_rhs", "dual_pairing_err", "ok" } };
    for ( int s = 0; s < S; ++s )
    {
        const CMatrix x = random_matrix( dim, dim, rng ), y = random_matrix( dim, dim, rng );
        const double  nx = schatten_norm( x, p );
        const double  adj = std::abs( schatten_norm( x.adjoint(), p ) - nx ) / nx;
        const double  mod = std::abs( schatten_norm( modulus( x ), p ) - nx ) / nx;
        const double  lhs = std::abs( trace_pair( x, y ) );
        const double  rhs = nx * schatten_norm( y, p.conjugate() );
        const CMatrix du  = dual_element( x, p );
        const double  dp  = std::abs( trace_pair( du.adjoint(), x ) - nx ) / nx + std::abs( schatten_norm( du, p.conjugate() ) - 1.0 );
        const bool    ok  = adj <= 1e-10 && mod <= 1e-10 && lhs <= rhs * ( 1 + 1e-12 ) && dp <= 1e-8;
        if ( !ok ) t.failures.push_back( "sample " + std::to_string( s ) );
        t.add( { s, num( p.value() ), num( nx ), num( adj ), num( mod ), num( lhs ), num( rhs ), num( dp ), ok } );
    }
    return t;
}

Table khintchine ( const Config & c )
{
    const Index     dim = c.integer( "dim", 1, 8 );
    const int       n   = c.integer( "family", 1, 16 );
    const int       S   = c.integer( "samples", 1, 1000 );
    const PExponent p   = c.p();
    std::mt19937_64 rng( c.seed() );

    Table t{ { "sample", "n", "dim", "p", "radavg", "radavg_l2", "radnorm", "lower_ok", "upper_ratio", "ratio_l2" } };
    for ( int s = 0; s < S; ++s )
    {
        const auto xs = random_family( std::size_t( n ), dim, rng );
        const auto r  = khintchine_report( xs, p );
        if ( !r.lower_ok ) t.failures.push_back( "lower Khintchine bound, sample " + std::to_string( s ) );
        t.add( { s, n, dim, num( p.value() ), num( r.radavg ), num( r.radavg_l2 ), num( r.radnorm ), r.lower_ok, num( r.upper_ratio ),
                 num( r.ratio_l2 ) } );
    }
    return t;
}

Table tensor_extend_cmd ( const Config & c )
{
    const Index     dim = c.integer( "dim", 1, 8 );
    const int       n   = c.integer( "family", 1, 16 );
    const int       S   = c.integer( "samples", 1, 1000 );
    const PExponent p   = c.p();
    std::mt19937_64 rng( c.seed() );

    Table t{ { "sample", "op_norm", "col_in", "col_out", "row_in", "row_out", "contraction_ok" } };
    for ( int s = 0; s < S; ++s )
    {
        const auto    xs = random_family( std::size_t( n ), dim, rng );
        const CMatrix r0 = random_matrix( n, n, rng );
        const CMatrix m  = r0 / spectral_norm( r0 );
        const auto    r  = tensor_extend( m, xs, p );
        if ( !r.contraction_ok ) t.failures.push_back( "tensor extension, sample " + std::to_string( s ) );
        t.add( { s, num( r.op_norm ), num( r.col_in ), num( r.col_out ), num( r.row_in ), num( r.row_out ), r.contraction_ok } );
    }
    return t;
}

Table calculus_check ( const Config & c )
{
    Table t{ { "A", "fn", "dim", "method", "error_estimate", "max_rel_error", "ok" } };
    for ( const auto & spec : c.texts( "A" ) )
    {
        const LpOperator A = parse_operator( spec );
        for ( const auto & id : c.texts( "fn" ) )
        {
            const HolFn  f      = c.fn( id );
            const bool   hinf0  = f.klass() == HolClass::hinf0;
            const auto   r      = hinf0 ? contour_calculus( A, f ) : extended_calculus( A, f );
            const CMatrix want  = eigen_calculus( A, f ).materialize();
            const double  err   = ( r.op.materialize() - want ).norm() / std::max( want.norm(), 1e-300 );
            const bool    ok    = r.ok && err <= 1e-6;
            if ( !ok ) t.failures.push_back( spec + " / " + id );
            t.add( { spec, id, int( A.dim() ), hinf0 ? "contour" : "extended", num( r.error_estimate ), num( err ), ok } );
        }
    }
    return t;
}

Table identities ( const Config & c )
{
    const Index     dim = c.integer( "dim", 1, 8 );
    const auto      ts  = c.numbers( "t", 1e-3, 1e3 );
    std::mt19937_64 rng( c.seed() );

    Table         t{ { "identity", "case", "t", "residual", "weight_integral", "ok" } };
    const CMatrix h = random_hermitian( dim, rng );
    const double  g1 = group_average_identity( h );
    const double  g2 = group_average_identity( LpOperator::ad( h, h ) );
    for ( auto [name, r] : { std::pair{ "hermitian", g1 }, std::pair{ "ad-pair", g2 } } )
    {
        const bool ok = r <= 1e-8;
        if ( !ok ) t.failures.push_back( std::string( "group average " ) + name );
        t.add( { "group-average", name, nullptr, num( r ), nullptr, ok } );
    }
    const CMatrix x   = random_matrix( dim, dim, rng );
    const CMatrix psd = x * x.adjoint() + 0.1 * CMatrix::Identity( dim, dim );
    for ( double tt : ts )
    {
        const auto r  = subordination_identity( psd, tt );
        const bool ok = r.residual <= 1e-5 && std::abs( r.weight_integral - 1.0 ) <= 1e-8;
        if ( !ok ) t.failures.push_back( "subordination t=" + format_double( tt ) );
        t.add( { "subordination", "psd", num( tt ), num( r.residual ), num( r.weight_integral ), ok } );
    }
    return t;
}

Table sector_profile ( const Config & c )
{
    const auto      thetas = c.numbers( "theta", 0.0, pi );
    const PExponent p      = c.p();
    Table           t{ { "A", "omega_hat", "theta", "K_theta" } };
    for ( const auto & spec : c.texts( "A" ) )
    {
        const auto r = sector_type( parse_operator( spec ), thetas, p );
        for ( const auto & [th, K] : r.constants ) t.add( { spec, num( r.omega_hat ), num( th ), num( K ) } );
    }
    return t;
}

SearchCfg search_cfg ( const Config & c )
{
    SearchCfg cfg;
    cfg.restarts = c.integer( "restarts", 1, 4096 );
    cfg.seed     = c.seed();
    return cfg;
}

Table rbound ( const Config & c )
{
    const auto      thetas = c.numbers( "theta", 0.0, pi );
    const PExponent p      = c.p();
    const auto      cfg    = search_cfg( c );
    const int       per    = c.integer( "per-ray", 1, 64 );
    Table           t{ { "A", "theta", "rad", "col", "row", "converged" } };
    for ( const auto & spec : c.texts( "A" ) )
        for ( const auto & r : sector_rbound_profile( parse_operator( spec ), p, thetas, cfg, per ) )
        {
            const bool conv = r.rad.status == SearchStatus::converged && r.col.status == SearchStatus::converged &&
                              r.row.status == SearchStatus::converged;
            if ( !conv ) t.warnings.push_back( spec + " theta=" + format_double( r.theta ) );
            t.add( { spec, num( r.theta ), num( r.rad.value ), num( r.col.value ), num( r.row.value ), conv } );
        }
    return t;
}

Table sqfn_equiv ( const Config & c )
{
    const PExponent p = c.p();
    const int       S = c.integer( "samples", 1, 1000 );
    const auto      v = c.text( "variant", { "col", "row", "rad" } );
    const auto      variant = v == "col" ? SquareVariant::col : v == "row" ? SquareVariant::row : SquareVariant::rad;
    Table           t{ { "A", "fn", "variant", "p", "c_F", "K1_hat", "K2_hat" } };
    for ( const auto & spec : c.texts( "A" ) )
    {
        const LpOperator A = parse_operator( spec );
        for ( const auto & id : c.texts( "fn" ) )
        {
            const HolFn   F = c.fn( id );
            const LogGrid g = c.grid().value_or( default_grid( A, F ) );
            const auto    r = equivalence_experiment( A, F, p, S, c.seed(), g, variant );
            t.add( { spec, id, v, num( p.value() ), num( c_F( F, g ) ), num( r.K1_hat ), num( r.K2_hat ) } );
        }
    }
    return t;
}

Table rowcol_gap ( const Config & c )
{
    const PExponent p = c.p();
    Table           t{ { "n", "Fc", "Fr", "Fr_closed_form", "ratio" } };
    for ( int n : c.integers( "n", 1, 24 ) )
    {
        const auto r = row_col_gap( n, p, c.grid() );
        t.add( { n, num( r.Fc ), num( r.Fr ), num( r.Fr_closed_form ), num( r.ratio ) } );
    }
    return t;
}

Table schur ( const Config & c )
{
    const int       n  = c.integer( "points", 1, 12 );
    const auto      ts = c.numbers( "t", 0.0, 1e3 );
    const PExponent p  = c.p();
    const auto      sym = collinear_symbol( n );
    Table           t{ { "points", "t", "p", "choi_min", "op_norm", "exact", "ok" } };
    for ( double tt : ts )
    {
        const auto   T    = schur_semigroup( sym, tt );
        const double choi = min_hermitian_eigenvalue( choi_matrix( T ) );
        const auto   nrm  = operator_norm( T, p, 50, c.seed() );
        const bool   ok   = choi >= -1e-10 && nrm.value <= 1.0 + 1e-8;
        if ( !ok ) t.failures.push_back( "Schur semigroup t=" + format_double( tt ) );
        t.add( { n, num( tt ), num( p.value() ), num( choi ), num( nrm.value ), nrm.exact, ok } );
    }
    return t;
}

Table freegroup ( const Config & c )
{
    const auto      mode = c.text( "mode", { "norms", "poisson", "dyadic" } );
    const int       rank = c.integer( "rank", 1, 4 );
    const int       S    = c.integer( "samples", 1, 1000 );
    const int       p    = int( c.number( "p", 2, 8 ) );
    if ( p % 2 || c.values.at( "p" ).get< double >() != double( p ) ) throw usage_error( "p: exact group norms need an even integer p" );
    std::mt19937_64 rng( c.seed() );

    if ( mode == "dyadic" )
    {
        const int shells = c.integer( "shells", 1, 4 );
        Table     t{ { "sample", "rank", "shells", "p", "constant" } };
        for ( int s = 0; s < S; ++s )
            t.add( { s, rank, shells, p, num( dyadic_unconditionality( random_dyadic_instance( rank, shells, rng ), p ) ) } );
        return t;
    }
    const auto ts = c.numbers( "t", 0.0, 1e3 );
    Table      t{ { "sample", "t", "p", "norm", "poisson_norm", "ok" } };
    for ( int s = 0; s < S; ++s )
    {
        const auto   x  = random_poly( rank, 3, 6, rng );
        const double nx = group_lp_norm_even( x, p );
        if ( mode == "norms" )
        {
            t.add( { s, nullptr, p, num( nx ), nullptr, true } );
            continue;
        }
        for ( double tt : ts )
        {
            const double np = group_lp_norm_even( poisson_apply( x, tt ), p );
            const bool   ok = np <= nx * ( 1 + 1e-12 ) + 1e-12;
            if ( !ok ) t.failures.push_back( "Poisson contraction, sample " + std::to_string( s ) );
            t.add( { s, num( tt ), p, num( nx ), num( np ), ok } );
        }
    }
    return t;
}

Table qfock ( const Config & c )
{
    const auto mode = c.text( "mode", { "gram", "moments", "ou" } );
    const int  d    = c.integer( "d", 1, 4 );
    const int  N    = c.integer( "N", 0, 6 );
    const auto qs   = c.numbers( "q", -0.999999, 0.999999 );

    if ( mode == "gram" )
    {
        Table t{ { "q", "n", "d", "min_eigenvalue", "ok" } };
        for ( double q : qs )
            for ( int n = 0; n <= N; ++n )
            {
                const double m  = min_gram_eigenvalue( n, d, q );
                const bool   ok = m >= -1e-10;
                if ( !ok ) t.failures.push_back( "Gram positivity q=" + format_double( q ) );
                t.add( { num( q ), n, d, num( m ), ok } );
            }
        return t;
    }
    if ( mode == "moments" )
    {
        std::mt19937_64 rng( c.seed() );
        const CVector   h  = random_matrix( d, 1, rng ).col( 0 );
        const double    hn = h.norm();
        Table           t{ { "q", "order", "moment", "closed_form", "abs_error", "ok" } };
        for ( double q : qs )
            for ( int k : { 2, 4, 6 } )
            {
                if ( k > N ) continue;
                const double want = ( k == 2 ? 1.0 : k == 4 ? 2.0 + q : 5.0 + 6.0 * q + 3.0 * q * q + q * q * q ) * std::pow( hn, k );
                const cplx   got  = gaussian_moment( std::vector< CVector >( std::size_t( k ), h ), q, N );
                const double err  = std::abs( got - want );
                const bool   ok   = err <= 1e-9 * std::max( 1.0, want );
                if ( !ok ) t.failures.push_back( "moment q=" + format_double( q ) + " order " + std::to_string( k ) );
                t.add( { num( q ), k, num( got.real() ), num( want ), num( err ), ok } );
            }
        return t;
    }
    const auto ts = c.numbers( "t", 0.0, 1e3 );
    Table      t{ { "q", "t", "level_error", "semigroup_error", "ok" } };
    for ( double q : qs )
    {
        const FockBasis b( d, N, q );
        for ( double tt : ts )
        {
            const CMatrix T   = ou_semigroup( b, tt );
            double        lvl = 0.0;
            for ( int n = 0; n <= N; ++n )
            {
                const Index   o  = b.offset( n ), sz = models::detail::ipow( d, n );
                const CMatrix blk = T.block( o, o, sz, sz );
                lvl = std::max( lvl, ( blk - std::exp( -n * tt ) * CMatrix::Identity( sz, sz ) ).norm() );
            }
            const CMatrix half = ou_semigroup( b, tt / 2 );
            const double  sg   = ( half * half - T ).norm();
            const bool    ok   = lvl <= 1e-10 && sg <= 1e-10;
            if ( !ok ) t.failures.push_back( "OU semigroup q=" + format_double( q ) );
            t.add( { num( q ), num( tt ), num( lvl ), num( sg ), ok } );
        }
    }
    return t;
}

Table clifford ( const Config & c )
{
    const auto    mode = c.text( "mode", { "multiplier", "semigroup" } );
    const int     n    = c.integer( "spins", 1, 6 );
    const SpinRep rep( n );

    if ( mode == "multiplier" )
    {
        const PExponent p = c.p();
        Table           t{ { "fn", "spins", "p", "op_norm", "exact", "max_symbol" } };
        for ( const auto & id : c.texts( "fn" ) )
        {
            const HolFn f    = c.fn( id );
            double      msym = 0.0;
            const auto  sym  = [&] ( int k ) { return k == 0 ? cplx( 0.0 ) : f( double( k ) ); };
            for ( int k = 0; k <= n; ++k ) msym = std::max( msym, std::abs( sym( k ) ) );
            const auto r = operator_norm( clifford_multiplier( rep, sym, id ), p, 50, c.seed() );
            t.add( { id, n, num( p.value() ), num( r.value ), r.exact, num( msym ) } );
        }
        return t;
    }
    const auto ts = c.numbers( "t", 0.0, 1e3 );
    Table      t{ { "spins", "t", "choi_min", "eigen_error", "ok" } };
    for ( double tt : ts )
    {
        const auto T    = clifford_semigroup( rep, tt );
        const double ch = min_hermitian_eigenvalue( choi_matrix( T ) );
        double       e  = 0.0;
        for ( std::uint32_t F = 0; F < ( 1u << n ); ++F )
        {
            const CMatrix v = rep.V( F );
            e = std::max( e, ( T.apply( v ) - std::exp( -tt * std::popcount( F ) ) * v ).norm() / v.norm() );
        }
        const bool ok = ch >= -1e-10 && e <= 1e-12;
        if ( !ok ) t.failures.push_back( "Clifford semigroup t=" + format_double( tt ) );
        t.add( { n, num( tt ), num( ch ), num( e ), ok } );
    }
    return t;
}

Table martingale ( const Config & c )
{
    const auto            mode = c.text( "mode", { "stein", "cesaro" } );
    const int             N    = c.integer( "N", 1, 6 );
    const PExponent       p    = c.p();
    const MartingaleTower tower( N );

    if ( mode == "stein" )
    {
        const auto r = stein_colbound( tower, p, search_cfg( c ) );
        const bool conv = r.status == SearchStatus::converged;
        Table      t{ { "N", "p", "estimate", "converged" } };
        if ( !conv ) t.warnings.push_back( "Stein column bound search" );
        t.add( { N, num( p.value() ), num( r.value ), conv } );
        return t;
    }
    std::mt19937_64 rng( c.seed() );
    const auto      E = tower.expectation( std::max( 0, N - 1 ) );
    const CMatrix   x = random_matrix( tower.dim(), tower.dim(), rng );
    const double    d = schatten_norm( E.apply( x ) - x, p );
    Table           t{ { "M", "p", "value", "closed_form", "rel_error", "ok" } };
    for ( int M : c.integers( "M", 1, 200 ) )
    {
        const auto   r    = cesaro_square_function( E, x, M, p );
        const double want = d * cesaro_expectation_factor( M );
        const double err  = std::abs( r.value - want ) / std::max( want, 1e-300 );
        const bool   ok   = p.value() < 2.0 || err <= 1e-8;
        if ( !ok ) t.failures.push_back( "Cesaro M=" + std::to_string( M ) );
        t.add( { M, num( p.value() ), num( r.value ), num( want ), num( err ), ok } );
    }
    return t;
}

//
// registry
//

struct Command
{
    std::string                      name;
    std::string                      help;
    json                             defaults;   // allowed keys; null = must be supplied when used
    std::function< Table ( const Config & ) > run;
};

const std::vector< Command > & commands ()
{
    static const std::vector< Command > c{
        { "schatten-selftest", "Schatten norm invariants, Hoelder pairing and dual elements on random matrices",
          { { "p", 3.0 }, { "dim", 4 }, { "samples", 10 }, { "seed", nullptr } }, schatten_selftest },
        { "khintchine", "Rademacher averages against intersection/sum norms on random families",
          { { "p", 4.0 }, { "dim", 3 }, { "family", 4 }, { "samples", 5 }, { "seed", nullptr } }, khintchine },
        { "tensor-extend", "contractivity of scalar-matrix actions on column and row norms",
          { { "p", 3.0 }, { "dim", 3 }, { "family", 4 }, { "samples", 5 }, { "seed", nullptr } }, tensor_extend_cmd },
        { "calculus-check", "contour or extended functional calculus against the eigendecomposition oracle",
          { { "fn", { "g" } }, { "A", { "leftdiag:1,4" } } }, calculus_check },
        { "identities", "group-average and subordination identities",
          { { "dim", 3 }, { "t", { 0.5, 1.0, 2.0 } }, { "seed", nullptr } }, identities },
        { "sector-profile", "sectoriality constants K_theta on a list of angles",
          { { "A", { "leftdiag:1,4" } }, { "theta", { 0.5, 1.0, 1.5, 2.5 } }, { "p", 2.0 } }, sector_profile },
        { "rbound", "Rademacher, column and row bound estimates of resolvent families per angle",
          { { "A", { "leftdiag:1,2,5" } }, { "theta", { 1.5, 2.5 } }, { "p", 2.0 }, { "restarts", 8 }, { "per-ray", 4 }, { "seed", nullptr } },
          rbound },
        { "sqfn-equiv", "sampled equivalence constants between square-function norms and the Schatten norm",
          { { "A", { "leftdiag:1,4" } }, { "fn", { "sqrtzexp" } }, { "p", 2.0 }, { "samples", 10 }, { "variant", "col" }, { "grid", nullptr },
            { "seed", nullptr } },
          sqfn_equiv },
        { "rowcol-gap", "column and row square functions of the dyadic example and their ratio",
          { { "p", 4.0 }, { "n", { 4, 8, 16 } }, { "grid", nullptr } }, rowcol_gap },
        { "schur", "complete positivity and contractivity of the collinear Schur multiplier semigroup",
          { { "points", 4 }, { "t", { 0.1, 1.0 } }, { "p", 4.0 }, { "seed", 0 } }, schur },
        { "freegroup", "exact even-p norms, Poisson contractivity and dyadic unconditionality on free groups",
          { { "mode", "poisson" }, { "rank", 2 }, { "p", 4.0 }, { "samples", 5 }, { "t", { 0.5 } }, { "shells", 3 }, { "seed", nullptr } },
          freegroup },
        { "qfock", "q-Fock Gram positivity, Gaussian moments and the Ornstein-Uhlenbeck semigroup",
          { { "mode", "gram" }, { "d", 2 }, { "N", 4 }, { "q", { -0.5, 0.0, 0.5 } }, { "t", { 0.5 } }, { "seed", 0 } }, qfock },
        { "clifford", "Clifford multipliers and the fermionic Ornstein-Uhlenbeck semigroup",
          { { "mode", "semigroup" }, { "spins", 3 }, { "t", { 0.5 } }, { "p", 4.0 }, { "fn", { "zexp" } }, { "seed", 0 } }, clifford },
        { "martingale", "Stein column bound and Cesaro square function for the dyadic matrix tower",
          { { "mode", "cesaro" }, { "N", 3 }, { "p", 4.0 }, { "M", { 1, 5, 20 } }, { "restarts", 8 }, { "seed", nullptr } }, martingale },
    };
    return c;
}

//
// output
//

void write_table ( std::ostream & os, const Table & t, const json & echo, double wall, const std::string & format )
{
    if ( format == "json" )
    {
        json rows = json::array();
        for ( const auto & r : t.rows ) rows.push_back( r );
        json doc{ { "tool", "nclp_run" }, { "version", nclp::version }, { "config", echo }, { "wall_time_s", wall }, { "columns", t.columns },
                  { "rows", rows } };
        os << doc.dump( 1 ) << "\n";
        return;
    }
    os << "# nclp_run " << nclp::version << "\n";
    os << "# config " << echo.dump() << "\n";
    os << "# wall_time_s " << wall << "\n";
    for ( std::size_t i = 0; i < t.columns.size(); ++i ) os << ( i ? "," : "" ) << t.columns[i];
    os << "\n";
    for ( const auto & r : t.rows )
    {
        for ( std::size_t i = 0; i < r.size(); ++i ) os << ( i ? "," : "" ) << cell( r[i] );
        os << "\n";
    }
}

}// namespace

int main ( int argc, char ** argv )
{
    CLI::App app( "nclp_run: experiments on noncommutative Lp spaces of matrices" );
    app.require_subcommand( 1 );
    app.fallthrough();

    std::string out, format = "csv", config_path;
    bool        strict = false;
    app.add_option( "--out", out, "output file (default stdout)" );
    app.add_option( "--format", format, "csv or json" )->check( CLI::IsMember( { "csv", "json" } ) );
    app.add_option( "--config", config_path, "flat JSON object of key values; flags override it" );
    app.add_flag( "--strict", strict, "treat an exhausted search budget as failure" );

    std::map< std::string, std::vector< std::string > > raw;
    std::map< std::string, CLI::Option * >               opts;
    for ( const auto & k : keys() )
    {
        auto * o = app.add_option( "--" + k.name, raw[k.name], k.help )->allow_extra_args();
        if ( k.kind == Kind::number || k.kind == Kind::integer || k.kind == Kind::text ) o->expected( 1 );
        if ( k.kind == Kind::numbers || k.kind == Kind::integers ) o->delimiter( ',' );
        opts[k.name] = o;
    }
    std::map< std::string, CLI::App * > subs;
    for ( const auto & c : commands() ) subs[c.name] = app.add_subcommand( c.name, c.help );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp & e )
    {
        return app.exit( e );
    }
    catch ( const CLI::ParseError & e )
    {
        app.exit( e );
        return exit_usage;
    }

    const Command * cmd = nullptr;
    for ( const auto & c : commands() )
        if ( subs[c.name]->parsed() ) cmd = &c;

    Config cfg;
    try
    {
        cfg.values = cmd->defaults;
        if ( !config_path.empty() )
        {
            std::ifstream in( config_path );
            if ( !in ) throw usage_error( "config: cannot open '" + config_path + "'" );
            json file;
            try
            {
                file = json::parse( in );
            }
            catch ( const json::exception & e )
            {
                throw usage_error( "config: " + std::string( e.what() ) );
            }
            if ( !file.is_object() ) throw usage_error( "config: expected a flat JSON object" );
            for ( const auto & [k, v] : file.items() )
            {
                if ( k == "subcommand" || k == "format" || k == "out" || k == "strict" ) continue;
                if ( !cfg.values.contains( k ) ) throw usage_error( k + ": not used by " + cmd->name );
                cfg.values[k] = from_file( key( k ), v );
            }
            if ( format == "csv" && file.contains( "format" ) && !app.get_option( "--format" )->count() )
                format = file["format"].get< std::string >();
            if ( out.empty() && file.contains( "out" ) ) out = file["out"].get< std::string >();
            if ( file.contains( "strict" ) && !strict ) strict = file["strict"].get< bool >();
            if ( format != "csv" && format != "json" ) throw usage_error( "format: must be csv or json" );
        }
        for ( const auto & k : keys() )
        {
            if ( !opts[k.name]->count() ) continue;
            if ( !cfg.values.contains( k.name ) ) throw usage_error( k.name + ": not used by " + cmd->name );
            cfg.values[k.name] = convert( k, raw[k.name] );
        }
    }
    catch ( const usage_error & e )
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    }

    json echo   = cfg.values;
    echo["subcommand"] = cmd->name;

    Table      table;
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        table = cmd->run( cfg );
    }
    catch ( const usage_error & e )
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    }
    catch ( const nclp::domain_error & e )
    {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    }
    catch ( const nclp::error & e )
    {
        std::cerr << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    }
    const double wall = std::chrono::duration< double >( std::chrono::steady_clock::now() - t0 ).count();

    if ( out.empty() ) write_table( std::cout, table, echo, wall, format );
    else
    {
        std::ofstream os( out );
        if ( !os )
        {
            std::cerr << "usage error: out: cannot write '" << out << "'\n";
            return exit_usage;
        }
        write_table( os, table, echo, wall, format );
    }

    for ( const auto & f : table.failures ) std::cerr << "check failed: " << f << "\n";
    for ( const auto & w : table.warnings ) std::cerr << "warning: search budget exhausted: " << w << "\n";
    if ( !table.failures.empty() ) return exit_numeric;
    if ( !table.warnings.empty() && strict ) return exit_budget;
    return exit_ok;
}
