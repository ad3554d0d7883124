#include "tavg/exec.hpp"

#include <omp.h>

namespace tavg {

int max_threads() { return omp_get_max_threads(); }

}  // namespace tavg
