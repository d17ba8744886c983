#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace nclp::detail
{

// worker cap from NCLP_THREADS (default: hardware concurrency)
inline std::size_t thread_cap ()
{
    std::size_t hw = std::max< std::size_t >( 1, std::thread::hardware_concurrency() );

    if ( const char * env = std::getenv( "NCLP_THREADS" ) )
    {
        try
        {
            const long v = std::stol( env );
            if ( v >= 1 ) return std::size_t( v );
        }
        catch ( ... )
        {}
    }
    return hw;
}

//
// evaluate body(i) for i in [0,n); each index is written by exactly one worker,
// so results stored per index are independent of the thread count
//
template < typename Body >
void parallel_for ( std::size_t n, Body && body )
{
    const std::size_t workers = std::min( thread_cap(), n );

    if ( workers <= 1 || n < 64 )
    {
        for ( std::size_t i = 0; i < n; ++i ) body( i );
        return;
    }

    std::vector< std::thread > pool;
    pool.reserve( workers );
    for ( std::size_t w = 0; w < workers; ++w )
    {
        pool.emplace_back( [&, w] {
            for ( std::size_t i = w; i < n; i += workers ) body( i );
        } );
    }
    for ( auto & t : pool ) t.join();
}

// Kahan-Babuska summation in index order
inline double compensated_sum ( const std::vector< double > & v )
{
    double sum = 0.0, c = 0.0;
    for ( double x : v )
    {
        const double t = sum + x;
        if ( std::abs( sum ) >= std::abs( x ) ) c += ( sum - t ) + x;
        else                                    c += ( x - t ) + sum;
        sum = t;
    }
    return sum + c;
}

}// namespace nclp::detail
