#include "phishgraph/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <httplib.h>

#include "phishgraph/error.hpp"
#include "phishgraph/ingest.hpp"

namespace phishgraph {
namespace {

bool mentions_rate_limit(std::string message) {
  std::transform(message.begin(), message.end(), message.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return message.find("rate limit") != std::string::npos;
}

}  // namespace

EtherscanClient::EtherscanClient(FetchOptions options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(Errc::InvalidConfig, "endpoint url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (options_.page_size == 0 || options_.page_limit == 0)
    throw Error(Errc::InvalidConfig, "page_size and page_limit must be positive");
}

void EtherscanClient::throttle() {
  if (options_.max_requests_per_second > 0.0) {
    const auto min_gap = std::chrono::duration<double>(1.0 / options_.max_requests_per_second);
    const auto now = std::chrono::steady_clock::now();
    if (requests_ > 0 && now - last_request_ < min_gap)
      std::this_thread::sleep_for(min_gap - (now - last_request_));
  }
  last_request_ = std::chrono::steady_clock::now();
  ++requests_;
}

std::string EtherscanClient::get_page(const Address& address, std::size_t page) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(options_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);

  const httplib::Params params = {
      {"module", "account"},         {"action", "txlist"},
      {"address", address.str()},    {"startblock", "0"},
      {"endblock", "99999999"},      {"page", std::to_string(page)},
      {"offset", std::to_string(options_.page_size)},
      {"sort", "asc"},               {"apikey", options_.api_key},
  };

  for (int attempt = 0;; ++attempt) {
    throttle();
    auto res = client.Get(path_, params, httplib::Headers{});
    if (!res) throw Error(Errc::NetworkError, "request failed: " + httplib::to_string(res.error()));

    double retry_after = -1.0;
    if (res->status == 429) {
      retry_after = options_.default_retry_after_s;
      if (res->has_header("Retry-After")) {
        try {
          retry_after = std::stod(res->get_header_value("Retry-After"));
        } catch (const std::exception&) {
        }
      }
    } else if (res->status != 200) {
      throw Error(Errc::NetworkError, "HTTP status " + std::to_string(res->status));
    } else {
      try {
        // Validate the envelope here so rate-limit replies can be retried.
        parse_etherscan_json(res->body, "page " + std::to_string(page));
        return res->body;
      } catch (const Error& e) {
        if (e.code() != Errc::ApiError || !mentions_rate_limit(e.what())) throw;
        retry_after = options_.default_retry_after_s;
      }
    }
    if (attempt >= options_.max_retries)
      throw RateLimitedError("rate limited after " + std::to_string(attempt + 1) + " attempts",
                             retry_after);
    std::this_thread::sleep_for(std::chrono::duration<double>(retry_after));
  }
}

std::vector<Transaction> EtherscanClient::fetch_address_history(const Address& address) {
  std::vector<Transaction> out;
  last_rejects_ = 0;
  for (std::size_t page = 1; page <= options_.page_limit; ++page) {
    const std::string body = get_page(address, page);
    ParseResult parsed = parse_etherscan_json(body, "page " + std::to_string(page));
    const std::size_t rows = parsed.transactions.size() + parsed.rejects.size();
    last_rejects_ += parsed.rejects.size();
    std::move(parsed.transactions.begin(), parsed.transactions.end(), std::back_inserter(out));
    if (rows < options_.page_size) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const Transaction& a, const Transaction& b) {
    return a.block_number < b.block_number;
  });
  return out;
}

std::vector<Transaction> fetch_address_history(const Address& address, const std::string& endpoint_url,
                                               const std::string& api_key, std::size_t page_limit) {
  FetchOptions options;
  options.endpoint_url = endpoint_url;
  options.api_key = api_key;
  options.page_limit = page_limit;
  return EtherscanClient(std::move(options)).fetch_address_history(address);
}

}  // namespace phishgraph
