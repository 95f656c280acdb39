#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "phishgraph/error.hpp"
#include "phishgraph/ingest.hpp"

namespace phishgraph {
namespace {

enum Field { kBlock, kTimestamp, kHash, kFrom, kTo, kValue, kGas, kGasPrice, kGasUsed, kFieldCount };

constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "blocknumber", "timestamp", "hash", "from", "to", "value", "gas", "gasprice", "gasused"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits one CSV record with RFC 4180 quoting. Embedded newlines inside
// quotes are not supported (Etherscan exports never contain them).
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
std::optional<T> parse_uint(std::string_view s) {
  if (s.empty()) return std::nullopt;
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

struct RowOutcome {
  std::optional<Transaction> tx;
  RejectReason reason = RejectReason::MissingField;
  std::string detail;
};

RowOutcome reject(RejectReason r, std::string detail) { return {std::nullopt, r, std::move(detail)}; }

RowOutcome build_transaction(const std::array<std::string_view, kFieldCount>& f) {
  for (int i = 0; i < kFieldCount; ++i)
    if (f[i].empty()) return reject(RejectReason::MissingField, std::string(kFieldNames[i]));

  Transaction tx;
  auto block = parse_uint<std::uint64_t>(f[kBlock]);
  auto ts = parse_uint<std::int64_t>(f[kTimestamp]);
  auto gas = parse_uint<std::uint64_t>(f[kGas]);
  auto gas_price = parse_uint<std::uint64_t>(f[kGasPrice]);
  auto gas_used = parse_uint<std::uint64_t>(f[kGasUsed]);
  if (!block) return reject(RejectReason::BadNumeral, "blockNumber");
  if (!ts) return reject(RejectReason::BadNumeral, "timeStamp");
  if (!gas) return reject(RejectReason::BadNumeral, "gas");
  if (!gas_price) return reject(RejectReason::BadNumeral, "gasPrice");
  if (!gas_used) return reject(RejectReason::BadNumeral, "gasUsed");
  try {
    tx.value = parse_wei(f[kValue]);
  } catch (const Error&) {
    return reject(RejectReason::BadNumeral, "value");
  }
  auto hash = canonicalize_tx_hash(f[kHash]);
  if (!hash) return reject(RejectReason::BadHash, std::string(f[kHash]));
  auto from = Address::try_parse(f[kFrom]);
  if (!from) return reject(RejectReason::BadAddress, std::string(f[kFrom]));
  auto to = Address::try_parse(f[kTo]);
  if (!to) return reject(RejectReason::BadAddress, std::string(f[kTo]));

  tx.block_number = *block;
  tx.timestamp = *ts;
  tx.tx_hash = std::move(*hash);
  tx.sender = *from;
  tx.receiver = *to;
  tx.gas = *gas;
  tx.gas_price = *gas_price;
  tx.gas_used = *gas_used;
  if (auto r = validate(tx)) return reject(*r, "");
  return {std::move(tx), {}, {}};
}

}  // namespace

ParseResult parse_etherscan_csv(std::istream& in, std::string_view source) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;

  std::array<int, kFieldCount> column{};
  column.fill(-1);
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!have_header) {
      auto names = split_csv_line(line);
      for (std::size_t c = 0; c < names.size(); ++c) {
        const std::string name = lower(trim(names[c]));
        for (int f = 0; f < kFieldCount; ++f)
          if (name == kFieldNames[f] && column[f] < 0) column[f] = static_cast<int>(c);
      }
      for (int f = 0; f < kFieldCount; ++f)
        if (column[f] < 0)
          throw Error(Errc::MalformedHeader, std::string(source) + ":" + std::to_string(line_no) +
                                                 ": missing column '" + std::string(kFieldNames[f]) +
                                                 "'");
      have_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    std::array<std::string_view, kFieldCount> fields{};
    for (int f = 0; f < kFieldCount; ++f)
      if (static_cast<std::size_t>(column[f]) < cells.size()) fields[f] = trim(cells[column[f]]);
    RowOutcome row = build_transaction(fields);
    if (row.tx)
      result.transactions.push_back(std::move(*row.tx));
    else
      result.rejects.push_back({std::string(source), line_no, row.reason, std::move(row.detail)});
  }
  if (!have_header) throw Error(Errc::MalformedHeader, std::string(source) + ": missing header row");
  return result;
}

ParseResult parse_etherscan_json(std::string_view document, std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedDocument, std::string(source) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("result"))
    throw Error(Errc::MalformedDocument, std::string(source) + ": expected object with 'result'");

  const auto& res = doc["result"];
  const std::string status = doc.contains("status") && doc["status"].is_string()
                                 ? doc["status"].get<std::string>()
                                 : std::string();
  if (!res.is_array()) {
    if (status != "1") {
      std::string message = doc.value("message", std::string());
      if (res.is_string()) message += ": " + res.get<std::string>();
      throw Error(Errc::ApiError, std::string(source) + ": " + message);
    }
    throw Error(Errc::MalformedDocument, std::string(source) + ": 'result' is not an array");
  }

  ParseResult result;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& item = res[i];
    if (!item.is_object()) {
      result.rejects.push_back({std::string(source), i, RejectReason::MissingField, "not an object"});
      continue;
    }
    // Keys matched case-insensitively, as for CSV headers.
    std::array<std::string, kFieldCount> owned;
    for (const auto& [key, val] : item.items()) {
      const std::string k = lower(key);
      for (int f = 0; f < kFieldCount; ++f) {
        if (k != kFieldNames[f] || !owned[f].empty()) continue;
        if (val.is_string())
          owned[f] = val.get<std::string>();
        else if (val.is_number_unsigned())
          owned[f] = std::to_string(val.get<std::uint64_t>());
      }
    }
    std::array<std::string_view, kFieldCount> fields{};
    for (int f = 0; f < kFieldCount; ++f) fields[f] = trim(owned[f]);
    RowOutcome row = build_transaction(fields);
    if (row.tx)
      result.transactions.push_back(std::move(*row.tx));
    else
      result.rejects.push_back({std::string(source), i, row.reason, std::move(row.detail)});
  }
  return result;
}

ParseResult parse_etherscan_json(std::istream& in, std::string_view source) {
  const std::string doc{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_etherscan_json(std::string_view(doc), source);
}

CleanResult clean(std::vector<Transaction> txs) {
  CleanResult out;
  std::unordered_set<std::string> seen;
  out.transactions.reserve(txs.size());
  for (std::size_t i = 0; i < txs.size(); ++i) {
    Transaction& tx = txs[i];
    if (auto r = validate(tx)) {
      ++out.report.invalid_dropped;
      out.report.rejects.push_back({"<clean>", i, *r, tx.tx_hash});
      continue;
    }
    tx.tx_hash = *canonicalize_tx_hash(tx.tx_hash);
    if (!seen.insert(tx.tx_hash).second) {
      ++out.report.dup_dropped;
      continue;
    }
    out.transactions.push_back(std::move(tx));
  }
  out.report.kept = out.transactions.size();
  return out;
}

std::set<Address> read_address_list(std::istream& in, std::string_view source) {
  std::set<Address> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    auto a = Address::try_parse(s);
    if (!a)
      throw Error(Errc::InvalidAddress, std::string(source) + ":" + std::to_string(line_no) +
                                            ": invalid address '" + std::string(s) + "'");
    out.insert(*a);
  }
  return out;
}

PhishingList make_phishing_list(std::set<Address> addresses, std::set<Address> verified) {
  if (!std::includes(addresses.begin(), addresses.end(), verified.begin(), verified.end()))
    throw Error(Errc::InvalidConfig, "verified list contains addresses not on the phishing list");
  return {std::move(addresses), std::move(verified)};
}

}  // namespace phishgraph
