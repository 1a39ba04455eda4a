#pragma once

#include <mutex>

namespace levdyn {

// FFTW planning is not thread safe; execution with the new-array interface is.
std::mutex& fft_planner_mutex();

}  // namespace levdyn
