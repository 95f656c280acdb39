#include "phishgraph/txmodel.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "phishgraph/error.hpp"

namespace phishgraph {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidAddress: return "InvalidAddress";
    case Errc::InvalidNumeral: return "InvalidNumeral";
    case Errc::InvalidTransaction: return "InvalidTransaction";
    case Errc::InvalidDataset: return "InvalidDataset";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::ApiError: return "ApiError";
    case Errc::NetworkError: return "NetworkError";
    case Errc::RateLimited: return "RateLimited";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::ClassAbsent: return "ClassAbsent";
    case Errc::SingleClass: return "SingleClass";
    case Errc::IoError: return "IoError";
    case Errc::FormatError: return "FormatError";
    case Errc::LayoutMismatch: return "LayoutMismatch";
  }
  return "Unknown";
}

namespace {

int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view strip_hex_prefix(std::string_view s) noexcept {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  return s;
}

constexpr char kHexDigits[] = "0123456789abcdef";

}  // namespace

Wei parse_wei(std::string_view decimal) {
  if (decimal.empty()) throw Error(Errc::InvalidNumeral, "empty numeral");
  Wei result = 0;
  for (char c : decimal) {
    if (c < '0' || c > '9')
      throw Error(Errc::InvalidNumeral, "invalid numeral '" + std::string(decimal) + "'");
    result *= 10;
    result += c - '0';
  }
  return result;
}

std::string to_decimal(const Wei& value) { return value.str(); }

double wei_to_double(const Wei& value) {
  // glibc strtod rounds correctly (ties to even), which the cpp_int
  // conversion does not guarantee.
  const std::string s = value.str();
  return std::strtod(s.c_str(), nullptr);
}

std::optional<Address> Address::try_parse(std::string_view raw) noexcept {
  const std::string_view hex = strip_hex_prefix(raw);
  if (hex.size() != 40) return std::nullopt;
  std::array<std::uint8_t, 20> bytes{};
  for (std::size_t i = 0; i < 20; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return Address(bytes);
}

Address Address::parse(std::string_view raw) {
  auto a = try_parse(raw);
  if (!a) throw Error(Errc::InvalidAddress, "invalid address '" + std::string(raw) + "'");
  return *a;
}

std::string Address::str() const {
  std::string out = "0x";
  out.reserve(42);
  for (auto b : bytes_) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

Address canonicalize_address(std::string_view raw) { return Address::parse(raw); }

std::optional<std::string> canonicalize_tx_hash(std::string_view raw) noexcept {
  const std::string_view hex = strip_hex_prefix(raw);
  if (hex.size() != 64) return std::nullopt;
  std::string out = "0x";
  out.reserve(66);
  for (char c : hex) {
    const int v = hex_value(c);
    if (v < 0) return std::nullopt;
    out.push_back(kHexDigits[v]);
  }
  return out;
}

const char* to_string(Label label) noexcept {
  return label == Label::Phishing ? "phishing" : "benign";
}

const char* to_string(Provenance provenance) noexcept {
  switch (provenance) {
    case Provenance::ListedPhishing: return "listed_phishing";
    case Provenance::VerifiedPhishing: return "verified_phishing";
    case Provenance::OneHopPhishing: return "one_hop_phishing";
    case Provenance::AssumedBenign: return "assumed_benign";
    case Provenance::Synthetic: return "synthetic";
  }
  return "unknown";
}

const char* to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::MissingField: return "MissingField";
    case RejectReason::BadNumeral: return "BadNumeral";
    case RejectReason::BadAddress: return "BadAddress";
    case RejectReason::BadHash: return "BadHash";
    case RejectReason::BadTimestamp: return "BadTimestamp";
    case RejectReason::GasExceeded: return "GasExceeded";
  }
  return "Unknown";
}

std::optional<RejectReason> validate(const Transaction& tx) noexcept {
  if (tx.tx_hash.empty()) return RejectReason::MissingField;
  if (!canonicalize_tx_hash(tx.tx_hash)) return RejectReason::BadHash;
  if (tx.timestamp <= 0) return RejectReason::BadTimestamp;
  if (tx.value < 0) return RejectReason::BadNumeral;
  if (tx.gas_used > tx.gas) return RejectReason::GasExceeded;
  return std::nullopt;
}

LabeledDataset::LabeledDataset(std::vector<Transaction> transactions,
                               std::map<Address, AddressLabel> labels)
    : transactions_(std::move(transactions)), labels_(std::move(labels)) {
  std::set<std::string_view> hashes;
  for (std::size_t i = 0; i < transactions_.size(); ++i) {
    const Transaction& tx = transactions_[i];
    if (auto reason = validate(tx))
      throw Error(Errc::InvalidDataset, "transaction " + std::to_string(i) + " invalid: " +
                                            to_string(*reason));
    if (!hashes.insert(tx.tx_hash).second)
      throw Error(Errc::InvalidDataset, "duplicate transaction hash " + tx.tx_hash);
    for (const Address* a : {&tx.sender, &tx.receiver})
      if (!labels_.contains(*a))
        throw Error(Errc::InvalidDataset, "address " + a->str() + " has no label");
  }
}

Label LabeledDataset::label_of(const Address& a) const {
  auto it = labels_.find(a);
  if (it == labels_.end()) throw Error(Errc::InvalidDataset, "address " + a.str() + " has no label");
  return it->second.label;
}

Provenance LabeledDataset::provenance_of(const Address& a) const {
  auto it = labels_.find(a);
  if (it == labels_.end()) throw Error(Errc::InvalidDataset, "address " + a.str() + " has no label");
  return it->second.provenance;
}

bool LabeledDataset::is_phishing_tx(std::size_t index) const {
  const Transaction& tx = transactions_.at(index);
  return label_of(tx.sender) == Label::Phishing || label_of(tx.receiver) == Label::Phishing;
}

void sort_transactions(std::vector<Transaction>& txs) {
  std::stable_sort(txs.begin(), txs.end(), [](const Transaction& a, const Transaction& b) {
    if (a.block_number != b.block_number) return a.block_number < b.block_number;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.tx_hash < b.tx_hash;
  });
}

}  // namespace phishgraph
