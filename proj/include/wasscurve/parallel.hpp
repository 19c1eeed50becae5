#ifndef WASSCURVE_PARALLEL_HPP
#define WASSCURVE_PARALLEL_HPP

#include <algorithm>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace wasscurve {

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is
/// handled by exactly one chunk, so results that are written per index do not
/// depend on the worker count.
template <typename Fn>
void parallel_for(Eigen::Index n, int threads, Fn&& fn) {
  const Eigen::Index workers = std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(1, n));
  if (workers <= 1 || n < 256) {
    fn(Eigen::Index(0), n);
    return;
  }
  const Eigen::Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (Eigen::Index w = 1; w < workers; ++w) {
    const Eigen::Index begin = w * chunk;
    const Eigen::Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(Eigen::Index(0), std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace wasscurve

#endif  // WASSCURVE_PARALLEL_HPP
