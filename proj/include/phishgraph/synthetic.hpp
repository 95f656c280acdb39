#pragma once

#include <cstdint>

#include "phishgraph/txmodel.hpp"

namespace phishgraph {

// Per-transaction value: 10^N(log10_mean, log10_sd) wei, rounded to an integer.
struct ValueDistribution {
  double log10_mean = 17.0;  // 0.1 ether
  double log10_sd = 1.0;
};

struct SyntheticConfig {
  std::uint64_t n_benign_addresses = 400;
  std::uint64_t n_phishing_addresses = 100;
  // Sent transactions per benign address, inclusive range.
  std::uint64_t tx_per_address_min = 4;
  std::uint64_t tx_per_address_max = 12;
  // Phishing addresses send this many times more transactions.
  double phishing_tx_multiplier = 3.0;
  // Burst window in UTC hours, inclusive.
  int phishing_burst_hour_lo = 2;
  int phishing_burst_hour_hi = 4;
  std::uint64_t phishing_dormancy_days = 30;
  // Distinct benign recipients (cash-out addresses) per phishing address;
  // 0 draws a fresh recipient for every transfer.
  std::uint64_t phishing_fanout = 3;
  // Probability that a cash-out address is another phishing address.
  double phishing_sink_collusion = 0.75;
  std::uint64_t observation_days = 180;
  // Each benign address is active over a random span of this many days,
  // inclusive range, placed uniformly inside the observation window.
  std::uint64_t benign_active_days_min = 7;
  std::uint64_t benign_active_days_max = 180;
  std::int64_t start_timestamp = 1672531200;  // 2023-01-01T00:00:00Z
  ValueDistribution benign_value{};
  ValueDistribution phishing_value{};
  // Fraction of phishing addresses that follow the dormancy-then-burst
  // timing; the rest transact on the benign schedule. 0 removes the timing
  // signal, 1 makes it universal.
  double signal_strength = 1.0;
  // Probability that a benign transfer goes to a phishing address.
  double victim_rate = 0.1;
  std::uint64_t seed = 7;

  bool operator==(const SyntheticConfig&) const = default;
};

// Throws Error(InvalidConfig) describing the first violated constraint.
void validate(const SyntheticConfig& cfg);

// Deterministic for a fixed config. Every address gets provenance Synthetic.
LabeledDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace phishgraph
