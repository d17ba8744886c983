#pragma once
//
// Free group algebra: reduced words, finitely supported polynomials, exact
// L^p norms for even p under the normalized trace, length multipliers.
//

#include "nclp/core_matrix.hpp"

#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace nclp::models
{

//
// words: letters ±1, ±2, … for c_i^{±1}; the empty word is the identity
//
using Word = std::vector< int >;

inline Word reduce ( const Word & w )
{
    Word r;
    for ( int l : w )
    {
        if ( l == 0 ) throw domain_error( "word: letter 0 is not a generator" );
        if ( !r.empty() && r.back() == -l ) r.pop_back();
        else                                r.push_back( l );
    }
    return r;
}

inline bool is_reduced ( const Word & w )
{
    for ( std::size_t i = 0; i < w.size(); ++i )
        if ( w[i] == 0 || ( i > 0 && w[i] == -w[i - 1] ) ) return false;
    return true;
}

inline int word_length ( const Word & w ) { return int( reduce( w ).size() ); }

inline Word inverse ( const Word & w )
{
    Word r( w.rbegin(), w.rend() );
    for ( auto & l : r ) l = -l;
    return r;
}

inline Word concat ( const Word & a, const Word & b )
{
    // free reduction at the junction only; a and b are reduced
    std::size_t k = 0;
    while ( k < a.size() && k < b.size() && a[a.size() - 1 - k] == -b[k] ) ++k;
    Word r( a.begin(), a.end() - std::ptrdiff_t( k ) );
    r.insert( r.end(), b.begin() + std::ptrdiff_t( k ), b.end() );
    return r;
}

// "a B a" ↦ c₁c₂⁻¹c₁ (lowercase generator, uppercase inverse), "e" ↦ identity
inline Word parse_word ( const std::string & s )
{
    Word               w;
    std::istringstream is( s );
    std::string        tok;
    while ( is >> tok )
    {
        if ( tok == "e" ) continue;
        for ( char ch : tok )
        {
            if ( !std::isalpha( static_cast< unsigned char >( ch ) ) || ch == 'e' || ch == 'E' )
                throw domain_error( "word: bad letter '" + std::string( 1, ch ) + "'" );
            const int lower = std::tolower( static_cast< unsigned char >( ch ) );
            // 'e' is reserved for the identity, so generators skip it
            const int idx = lower - 'a' + 1 - ( lower > 'e' ? 1 : 0 );
            w.push_back( std::isupper( static_cast< unsigned char >( ch ) ) ? -idx : idx );
        }
    }
    return reduce( w );
}

inline std::string word_to_string ( const Word & w )
{
    if ( w.empty() ) return "e";
    std::string s;
    for ( int l : w )
    {
        const int idx = std::abs( l );
        if ( idx > 25 ) throw domain_error( "word: generator index too large for text form" );
        char ch = char( 'a' + idx - 1 + ( idx >= 5 ? 1 : 0 ) );
        if ( l < 0 ) ch = char( std::toupper( ch ) );
        if ( !s.empty() ) s += ' ';
        s += ch;
    }
    return s;
}

inline Word generator ( int i ) { return Word{ i }; }

struct support_overflow : numeric_error
{
    using numeric_error::numeric_error;
};

///
/// finitely supported element Σ α_g λ(g)
///
class GroupPoly
{
public:
    using Map = std::map< Word, cplx >;

    GroupPoly () = default;

    static GroupPoly lambda ( const Word & g, cplx c = 1.0 )
    {
        GroupPoly x;
        x.add( g, c );
        return x;
    }

    void add ( const Word & g, cplx c )
    {
        if ( !std::isfinite( c.real() ) || !std::isfinite( c.imag() ) ) throw domain_error( "GroupPoly: non-finite coefficient" );
        const Word r = reduce( g );
        _c[r] += c;
        if ( _c[r] == cplx( 0.0 ) ) _c.erase( r );
    }

    cplx coefficient ( const Word & g ) const
    {
        auto it = _c.find( reduce( g ) );
        return it == _c.end() ? cplx( 0.0 ) : it->second;
    }

    const Map & terms () const { return _c; }
    std::size_t size () const { return _c.size(); }

    // normalized trace: coefficient of the identity
    cplx trace () const { return coefficient( {} ); }

    GroupPoly star () const
    {
        GroupPoly y;
        for ( const auto & [g, c] : _c ) y._c[inverse( g )] += std::conj( c );
        return y;
    }

    GroupPoly operator + ( const GroupPoly & o ) const
    {
        GroupPoly y = *this;
        for ( const auto & [g, c] : o._c ) y.add( g, c );
        return y;
    }

    GroupPoly operator * ( cplx s ) const
    {
        GroupPoly y;
        if ( s == cplx( 0.0 ) ) return y;
        for ( const auto & [g, c] : _c ) y._c[g] = s * c;
        return y;
    }

    double l2_norm () const
    {
        double acc = 0.0;
        for ( const auto & kv : _c ) acc += std::norm( kv.second );
        return std::sqrt( acc );
    }

private:
    Map _c;
};

inline constexpr std::size_t default_support_cap = std::size_t( 1 ) << 22;

inline GroupPoly word_multiply ( const GroupPoly & x, const GroupPoly & y, std::size_t cap = default_support_cap )
{
    if ( x.size() * y.size() > cap * 64 )
        throw support_overflow( "word_multiply: product of supports " + std::to_string( x.size() ) + " x " +
                                std::to_string( y.size() ) + " exceeds the configured cap" );
    std::map< Word, cplx > acc;
    for ( const auto & [g, a] : x.terms() )
        for ( const auto & [h, b] : y.terms() )
        {
            acc[concat( g, h )] += a * b;
            if ( acc.size() > cap ) throw support_overflow( "word_multiply: support exceeds the configured cap" );
        }
    GroupPoly z;
    for ( const auto & [g, c] : acc )
        if ( c != cplx( 0.0 ) ) z.add( g, c );
    return z;
}

// τ(ab) = Σ_g a_g b_{g⁻¹}
inline cplx trace_product ( const GroupPoly & a, const GroupPoly & b )
{
    cplx acc = 0.0;
    for ( const auto & [g, c] : a.terms() ) acc += c * b.coefficient( inverse( g ) );
    return acc;
}

///
/// ‖x‖_p = τ((x*x)^{p/2})^{1/p} for p ∈ {2, 4, 6, 8}, by exact convolution
///
inline double group_lp_norm_even ( const GroupPoly & x, int p, std::size_t cap = default_support_cap )
{
    if ( p != 2 && p != 4 && p != 6 && p != 8 ) throw domain_error( "group_lp_norm_even: p must be 2, 4, 6 or 8" );
    if ( p == 2 ) return x.l2_norm();

    const GroupPoly z = word_multiply( x.star(), x, cap );
    const int       m = p / 2;

    GroupPoly a = z, b = z;   // z^{⌈m/2⌉}, z^{⌊m/2⌋}
    if ( m == 3 ) a = word_multiply( z, z, cap );
    if ( m == 4 ) a = b = word_multiply( z, z, cap );

    const double t = trace_product( a, b ).real();
    return std::pow( std::max( t, 0.0 ), 1.0 / p );
}

///
/// α_g ↦ f(|g|) α_g on g ≠ e; the identity coefficient is kept unless
/// include_identity is set
///
inline GroupPoly length_multiplier ( const GroupPoly & x, const std::function< cplx ( int ) > & f, bool include_identity = false )
{
    GroupPoly y;
    for ( const auto & [g, c] : x.terms() )
    {
        if ( g.empty() && !include_identity ) y.add( g, c );
        else                                  y.add( g, f( int( g.size() ) ) * c );
    }
    return y;
}

// T_t(λ(g)) = e^{-t|g|} λ(g)
inline GroupPoly poisson_apply ( const GroupPoly & x, double t )
{
    if ( !( t >= 0.0 ) ) throw domain_error( "poisson_apply: t must be >= 0" );
    return length_multiplier( x, [t] ( int n ) { return cplx( std::exp( -t * n ) ); }, true );
}

//
// reduced words of a given length over `rank` generators
//
inline std::vector< Word > words_of_length ( int rank, int length, std::size_t limit = 1u << 20 )
{
    if ( rank < 1 ) throw domain_error( "words_of_length: rank must be >= 1" );
    std::vector< Word > out{ Word{} };
    for ( int l = 0; l < length; ++l )
    {
        std::vector< Word > next;
        for ( const auto & w : out )
            for ( int g = -rank; g <= rank; ++g )
            {
                if ( g == 0 || ( !w.empty() && w.back() == -g ) ) continue;
                Word v = w;
                v.push_back( g );
                next.push_back( std::move( v ) );
                if ( next.size() > limit ) throw support_overflow( "words_of_length: too many words" );
            }
        out = std::move( next );
    }
    return out;
}

inline GroupPoly random_poly ( int rank, int max_length, int terms, std::mt19937_64 & rng )
{
    std::normal_distribution< double > g;
    GroupPoly                          x;
    for ( int k = 0; k < terms; ++k )
    {
        const int length = int( rng() % std::uint64_t( max_length + 1 ) );
        Word      w;
        while ( int( w.size() ) < length )
        {
            int l = int( rng() % std::uint64_t( rank ) ) + 1;
            if ( rng() & 1u ) l = -l;
            if ( !w.empty() && w.back() == -l ) continue;
            w.push_back( l );
        }
        x.add( w, cplx( g( rng ), g( rng ) ) );
    }
    return x;
}

///
/// x_k supported on words of length 2^k with normalised Gaussian coefficients
///
inline std::vector< GroupPoly > random_dyadic_instance ( int rank, int shells, std::mt19937_64 & rng,
                                                         std::size_t max_words = 64 )
{
    std::normal_distribution< double > g;
    std::vector< GroupPoly >           xs;
    for ( int k = 0; k < shells; ++k )
    {
        auto words = words_of_length( rank, 1 << k );
        if ( words.size() > max_words )
        {
            std::shuffle( words.begin(), words.end(), rng );
            words.resize( max_words );
        }
        GroupPoly x;
        for ( const auto & w : words ) x.add( w, cplx( g( rng ), g( rng ) ) );
        xs.push_back( x * cplx( 1.0 / x.l2_norm() ) );
    }
    return xs;
}

///
/// max over signs of ‖Σ ε_k x_k‖_p / ‖Σ x_k‖_p with x_k in the shell |g| = 2^k
///
inline double dyadic_unconditionality ( const std::vector< GroupPoly > & xs, int p = 4 )
{
    if ( xs.empty() || xs.size() > 12 ) throw domain_error( "dyadic_unconditionality: need 1 to 12 shells" );
    for ( std::size_t k = 0; k < xs.size(); ++k )
        for ( const auto & kv : xs[k].terms() )
            if ( kv.first.size() != ( std::size_t( 1 ) << k ) )
                throw domain_error( "dyadic_unconditionality: member " + std::to_string( k ) + " leaves its length shell" );

    GroupPoly total;
    for ( const auto & x : xs ) total = total + x;
    const double base = group_lp_norm_even( total, p );
    if ( base == 0.0 ) throw domain_error( "dyadic_unconditionality: zero sum" );

    double best = 0.0;
    for ( std::uint64_t s = 0; s < ( std::uint64_t( 1 ) << ( xs.size() - 1 ) ); ++s )
    {
        GroupPoly sum = xs[0];
        for ( std::size_t k = 1; k < xs.size(); ++k ) sum = sum + xs[k] * cplx( ( s >> ( k - 1 ) ) & 1u ? -1.0 : 1.0 );
        best = std::max( best, group_lp_norm_even( sum, p ) / base );
    }
    return best;
}

//
// text form: one term per line, "word re im"
//
inline void write_poly ( std::ostream & os, const GroupPoly & x )
{
    for ( const auto & [g, c] : x.terms() )
        os << word_to_string( g ) << ' ' << format_double( c.real() ) << ' ' << format_double( c.imag() ) << '\n';
}

inline GroupPoly read_poly ( std::istream & is )
{
    GroupPoly   x;
    std::string line;
    while ( std::getline( is, line ) )
    {
        if ( line.find_first_not_of( " \t\r" ) == std::string::npos ) continue;
        // the last two tokens are the coefficient, the rest is the word
        std::istringstream       ls( line );
        std::vector< std::string > tok;
        std::string              t;
        while ( ls >> t ) tok.push_back( t );
        if ( tok.size() < 3 ) throw domain_error( "GroupPoly text: expected 'word re im' in line '" + line + "'" );
        std::string word;
        for ( std::size_t i = 0; i + 2 < tok.size(); ++i ) word += tok[i] + ' ';
        try
        {
            x.add( parse_word( word ), cplx( std::stod( tok[tok.size() - 2] ), std::stod( tok.back() ) ) );
        }
        catch ( const std::logic_error & )
        {
            throw domain_error( "GroupPoly text: bad coefficient in line '" + line + "'" );
        }
    }
    return x;
}

}// namespace nclp::models
