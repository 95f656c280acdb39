#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct FetchOptions {
  std::string endpoint_url = "https://api.etherscan.io/api";
  std::string api_key;
  std::size_t page_limit = 10;
  std::size_t page_size = 1000;
  double max_requests_per_second = 5.0;
  int max_retries = 3;
  // Used when a rate-limited response carries no Retry-After header.
  double default_retry_after_s = 1.0;
  double timeout_s = 30.0;
};

// Paged `account txlist` client. Requests are issued sequentially and spaced
// to respect max_requests_per_second; separate clients may run concurrently.
class EtherscanClient {
 public:
  explicit EtherscanClient(FetchOptions options);

  // Pages through the address history until a short page or page_limit.
  // Throws Error(NetworkError | ApiError | MalformedDocument) or
  // RateLimitedError once retries are exhausted. Rows that fail validation
  // are dropped and counted in last_rejects().
  std::vector<Transaction> fetch_address_history(const Address& address);

  std::size_t last_rejects() const noexcept { return last_rejects_; }
  std::size_t requests_made() const noexcept { return requests_; }

 private:
  std::string get_page(const Address& address, std::size_t page);
  void throttle();

  FetchOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::steady_clock::time_point last_request_{};
  std::size_t last_rejects_ = 0;
  std::size_t requests_ = 0;
};

std::vector<Transaction> fetch_address_history(const Address& address, const std::string& endpoint_url,
                                               const std::string& api_key, std::size_t page_limit);

}  // namespace phishgraph
