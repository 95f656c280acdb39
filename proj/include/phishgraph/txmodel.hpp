#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace phishgraph {

// Exact wei amounts; on-chain values exceed 64 bits.
using Wei = boost::multiprecision::cpp_int;

Wei parse_wei(std::string_view decimal);
std::string to_decimal(const Wei& value);
// Correctly rounded (nearest-even) conversion. Lossy above 2^53.
double wei_to_double(const Wei& value);

class Address {
 public:
  Address() = default;

  // Accepts 40 hex digits with or without a 0x/0X prefix, any case.
  static Address parse(std::string_view raw);
  static std::optional<Address> try_parse(std::string_view raw) noexcept;
  static Address from_bytes(const std::array<std::uint8_t, 20>& bytes) { return Address(bytes); }

  const std::array<std::uint8_t, 20>& bytes() const noexcept { return bytes_; }
  std::string str() const;

  auto operator<=>(const Address&) const = default;

 private:
  explicit Address(const std::array<std::uint8_t, 20>& bytes) : bytes_(bytes) {}
  std::array<std::uint8_t, 20> bytes_{};
};

Address canonicalize_address(std::string_view raw);

// Canonical "0x" + 64 lowercase hex digits, or std::nullopt.
std::optional<std::string> canonicalize_tx_hash(std::string_view raw) noexcept;

enum class Label : std::uint8_t { Benign = 0, Phishing = 1 };

enum class Provenance : std::uint8_t {
  ListedPhishing = 0,
  VerifiedPhishing = 1,
  OneHopPhishing = 2,
  AssumedBenign = 3,
  Synthetic = 4,
};

const char* to_string(Label label) noexcept;
const char* to_string(Provenance provenance) noexcept;

struct Transaction {
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;
  std::string tx_hash;
  Address sender;
  Address receiver;
  Wei value = 0;
  std::uint64_t gas = 0;
  std::uint64_t gas_price = 0;
  std::uint64_t gas_used = 0;

  bool operator==(const Transaction&) const = default;
};

enum class RejectReason {
  MissingField,
  BadNumeral,
  BadAddress,
  BadHash,
  BadTimestamp,
  GasExceeded,
};

const char* to_string(RejectReason reason) noexcept;

// Returns the first invariant the transaction violates, if any.
std::optional<RejectReason> validate(const Transaction& tx) noexcept;

struct AddressLabel {
  Label label = Label::Benign;
  Provenance provenance = Provenance::AssumedBenign;

  bool operator==(const AddressLabel&) const = default;
};

class LabeledDataset {
 public:
  LabeledDataset() = default;

  // Throws Error(InvalidDataset) if any transaction is invalid, a hash repeats,
  // or an endpoint lacks a label.
  LabeledDataset(std::vector<Transaction> transactions, std::map<Address, AddressLabel> labels);

  const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
  const std::map<Address, AddressLabel>& labels() const noexcept { return labels_; }

  Label label_of(const Address& a) const;
  Provenance provenance_of(const Address& a) const;

  // A transaction is phishing iff either endpoint is labeled Phishing.
  bool is_phishing_tx(std::size_t index) const;

  bool operator==(const LabeledDataset&) const = default;

 private:
  std::vector<Transaction> transactions_;
  std::map<Address, AddressLabel> labels_;
};

// Canonical transaction order: (block, timestamp, hash).
void sort_transactions(std::vector<Transaction>& txs);

}  // namespace phishgraph

template <>
struct std::hash<phishgraph::Address> {
  std::size_t operator()(const phishgraph::Address& a) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto b : a.bytes()) h = (h ^ b) * 1099511628211ULL;
    return static_cast<std::size_t>(h);
  }
};
