#pragma once

namespace panens::par {

// Process-wide kernel dispatch. Every OpenMP kernel has a serial twin that
// defines the reference result; both produce bit-identical output, so the
// switch only affects speed. Tests run both modes and compare.
enum class Mode { serial, openmp };

Mode mode();
void set_mode(Mode m);

// True when the binary was built with OpenMP support.
bool openmp_available();

int thread_count();

}  // namespace panens::par
