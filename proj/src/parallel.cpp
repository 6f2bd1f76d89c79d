#include "isokin/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace isokin {

unsigned resolve_threads(std::optional<unsigned> requested)
{
    if (requested && *requested > 0)
        return *requested;
    if (char const* env = std::getenv("ISOKIN_THREADS"))
    {
        unsigned v = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
        if (ec == std::errc{} && v > 0)
            return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace isokin
