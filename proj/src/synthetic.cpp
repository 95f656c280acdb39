#include "phishgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "phishgraph/error.hpp"
#include "phishgraph/rng.hpp"

namespace phishgraph {
namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kHour = 3600;
constexpr std::uint64_t kFirstBlock = 16'000'000;
constexpr std::int64_t kBlockTime = 12;

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::InvalidConfig, std::string("synthetic config: ") + what);
}

Address random_address(Rng& rng, std::set<Address>& used) {
  for (;;) {
    std::array<std::uint8_t, 20> bytes{};
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
      const std::uint64_t x = rng.next();
      for (std::size_t k = 0; k < 8 && i + k < bytes.size(); ++k)
        bytes[i + k] = static_cast<std::uint8_t>(x >> (8 * k));
    }
    Address a = Address::from_bytes(bytes);
    if (used.insert(a).second) return a;
  }
}

std::string random_hash(Rng& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string h = "0x";
  for (int w = 0; w < 4; ++w) {
    std::uint64_t x = rng.next();
    for (int k = 0; k < 16; ++k, x >>= 4) h.push_back(kHex[x & 0xf]);
  }
  return h;
}

Wei draw_value(Rng& rng, const ValueDistribution& d) {
  const double exponent = std::clamp(rng.normal(d.log10_mean, d.log10_sd), 0.0, 26.0);
  const double v = std::floor(std::pow(10.0, exponent));
  // Integral doubles convert to cpp_int exactly.
  return Wei(v);
}

// Gas profile shared by both classes so explicit gas columns carry no class signal.
void draw_gas(Rng& rng, Transaction& tx) {
  if (rng.bernoulli(0.6)) {
    tx.gas = 21000;
    tx.gas_used = 21000;
  } else {
    tx.gas_used = static_cast<std::uint64_t>(rng.between(30000, 150000));
    tx.gas = tx.gas_used + static_cast<std::uint64_t>(rng.between(0, 60000));
  }
  const double gwei = std::clamp(rng.normal(30.0, 8.0), 1.0, 200.0);
  tx.gas_price = static_cast<std::uint64_t>(std::llround(gwei * 1e9));
}

}  // namespace

void validate(const SyntheticConfig& cfg) {
  require(cfg.n_benign_addresses >= 2, "n_benign_addresses must be >= 2");
  require(cfg.tx_per_address_min >= 1, "tx_per_address_min must be >= 1");
  require(cfg.tx_per_address_min <= cfg.tx_per_address_max, "tx_per_address range min > max");
  require(cfg.phishing_tx_multiplier > 0.0, "phishing_tx_multiplier must be > 0");
  require(cfg.phishing_burst_hour_lo >= 0 && cfg.phishing_burst_hour_hi <= 23 &&
              cfg.phishing_burst_hour_lo <= cfg.phishing_burst_hour_hi,
          "burst hour range must lie within [0,23] with lo <= hi");
  require(cfg.observation_days > cfg.phishing_dormancy_days + 1,
          "observation_days must exceed phishing_dormancy_days + 1");
  require(cfg.benign_active_days_min >= 1 && cfg.benign_active_days_min <= cfg.benign_active_days_max &&
              cfg.benign_active_days_max <= cfg.observation_days,
          "benign active span must satisfy 1 <= min <= max <= observation_days");
  require(cfg.start_timestamp > 0, "start_timestamp must be positive");
  require(cfg.benign_value.log10_sd >= 0.0 && cfg.phishing_value.log10_sd >= 0.0,
          "value distribution sd must be >= 0");
  require(cfg.signal_strength >= 0.0 && cfg.signal_strength <= 1.0, "signal_strength must be in [0,1]");
  require(cfg.phishing_sink_collusion >= 0.0 && cfg.phishing_sink_collusion <= 1.0,
          "phishing_sink_collusion must be in [0,1]");
  require(cfg.victim_rate >= 0.0 && cfg.victim_rate <= 1.0, "victim_rate must be in [0,1]");
}

LabeledDataset generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);

  std::set<Address> used;
  std::vector<Address> benign, phishing;
  for (std::uint64_t i = 0; i < cfg.n_benign_addresses; ++i) benign.push_back(random_address(rng, used));
  for (std::uint64_t i = 0; i < cfg.n_phishing_addresses; ++i) phishing.push_back(random_address(rng, used));

  const std::int64_t window = static_cast<std::int64_t>(cfg.observation_days) * kDay;
  std::vector<Transaction> txs;
  std::set<std::string> hashes;

  auto emit = [&](const Address& from, const Address& to, std::int64_t offset,
                  const ValueDistribution& vd) {
    Transaction tx;
    tx.timestamp = cfg.start_timestamp + offset;
    tx.block_number = kFirstBlock + static_cast<std::uint64_t>(offset / kBlockTime);
    do {
      tx.tx_hash = random_hash(rng);
    } while (!hashes.insert(tx.tx_hash).second);
    tx.sender = from;
    tx.receiver = to;
    tx.value = draw_value(rng, vd);
    draw_gas(rng, tx);
    txs.push_back(std::move(tx));
  };

  auto pick_benign_other = [&](std::size_t self) {
    std::size_t j = static_cast<std::size_t>(rng.below(benign.size() - 1));
    if (j >= self) ++j;
    return benign[j];
  };

  auto sent_count = [&](double multiplier) {
    const auto base = rng.between(static_cast<std::int64_t>(cfg.tx_per_address_min),
                                  static_cast<std::int64_t>(cfg.tx_per_address_max));
    return std::max<std::int64_t>(1, std::llround(static_cast<double>(base) * multiplier));
  };

  for (std::size_t i = 0; i < benign.size(); ++i) {
    const auto n = sent_count(1.0);
    const std::int64_t span =
        rng.between(static_cast<std::int64_t>(cfg.benign_active_days_min), static_cast<std::int64_t>(cfg.benign_active_days_max)) * kDay;
    const std::int64_t begin = rng.between(0, window - span);
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t offset = begin + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
      const bool to_phishing = !phishing.empty() && rng.bernoulli(cfg.victim_rate);
      const Address to = to_phishing ? phishing[rng.below(phishing.size())] : pick_benign_other(i);
      emit(benign[i], to, offset, cfg.benign_value);
    }
  }

  const std::int64_t hour_lo = cfg.phishing_burst_hour_lo * kHour;
  const std::int64_t hour_end = (cfg.phishing_burst_hour_hi + 1) * kHour;
  for (const Address& p : phishing) {
    const auto n = sent_count(cfg.phishing_tx_multiplier);
    const bool bursty = rng.bernoulli(cfg.signal_strength);
    std::vector<Address> sinks;
    for (std::uint64_t k = 0; k < cfg.phishing_fanout; ++k) {
      const bool collude = phishing.size() > 1 && rng.bernoulli(cfg.phishing_sink_collusion);
      const Address* sink = &benign[rng.below(benign.size())];
      while (collude && (sink = &phishing[rng.below(phishing.size())], *sink == p)) {
      }
      sinks.push_back(*sink);
    }
    auto recipient = [&] {
      return sinks.empty() ? benign[rng.below(benign.size())] : sinks[rng.below(sinks.size())];
    };
    if (!bursty) {
      for (std::int64_t k = 0; k < n; ++k) {
        const std::int64_t offset = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(window)));
        emit(p, recipient(), offset, cfg.phishing_value);
      }
      continue;
    }
    // Dormant until the burst, then tightly spaced sends inside the hour
    // window, spilling onto following nights.
    const auto last_day = static_cast<std::int64_t>(cfg.observation_days) - 1;
    std::int64_t day = rng.between(static_cast<std::int64_t>(cfg.phishing_dormancy_days), last_day);
    std::int64_t t = day * kDay + hour_lo + rng.between(0, 600);
    for (std::int64_t k = 0; k < n; ++k) {
      if (t >= day * kDay + hour_end) {
        ++day;
        t = day * kDay + hour_lo + rng.between(0, 600);
      }
      emit(p, recipient(), t, cfg.phishing_value);
      t += rng.between(60, 900);
    }
  }

  std::map<Address, AddressLabel> labels;
  for (const Address& a : benign) labels[a] = {Label::Benign, Provenance::Synthetic};
  for (const Address& a : phishing) labels[a] = {Label::Phishing, Provenance::Synthetic};
  // Addresses that never transact would not be graph nodes; drop their labels.
  std::set<Address> active;
  for (const Transaction& tx : txs) {
    active.insert(tx.sender);
    active.insert(tx.receiver);
  }
  std::erase_if(labels, [&](const auto& kv) { return !active.contains(kv.first); });

  sort_transactions(txs);
  return LabeledDataset(std::move(txs), std::move(labels));
}

}  // namespace phishgraph
