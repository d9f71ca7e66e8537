#ifndef WEISSFB_PARALLEL_HPP
#define WEISSFB_PARALLEL_HPP

#include <functional>

namespace wfb {

/// Thread cap: WEISSFB_THREADS if set (minimum 1), else hardware concurrency.
int thread_cap();

/// Runs fn(i) for i in [0, n) across up to thread_cap() threads. fn must not
/// throw across threads; exceptions are rethrown on the caller after joining.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace wfb

#endif
