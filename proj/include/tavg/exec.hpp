#pragma once

namespace tavg {

// Selects between the OpenMP kernel and its serial reference.
enum class exec_policy { serial, parallel };

int max_threads();

}  // namespace tavg
