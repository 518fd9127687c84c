// SPDX-License-Identifier: Apache-2.0
#include "infsup/common.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace infsup
{

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &body)
{
  if (threads <= 1 || n < 2)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      body(i);
    }
    return;
  }
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
  {
    pool.emplace_back(
        [&]()
        {
          for (std::size_t i = next++; i < n; i = next++)
          {
            try
            {
              body(i);
            }
            catch (...)
            {
              std::lock_guard lock(failure_mutex);
              if (!failure)
              {
                failure = std::current_exception();
              }
            }
          }
        });
  }
  for (auto &t : pool)
  {
    t.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

} // namespace infsup
