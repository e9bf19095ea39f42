#pragma once

namespace qiml {

// Worker count used by all OpenMP regions. Resolved once from the
// QIML_THREADS environment variable (falls back to the OpenMP default).
int worker_threads();

// Apply the QIML_THREADS cap to the OpenMP runtime. Called lazily by
// worker_threads(); exposed for the CLI so the cap is set up front.
void configure_threads();

}  // namespace qiml
