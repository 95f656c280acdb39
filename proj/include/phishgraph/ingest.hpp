#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phishgraph/txmodel.hpp"

namespace phishgraph {

struct RowReject {
  std::string source;
  std::size_t line = 0;  // 1-based file line for CSV, 0-based result index for JSON
  RejectReason reason = RejectReason::MissingField;
  std::string detail;
};

struct ParseResult {
  std::vector<Transaction> transactions;
  std::vector<RowReject> rejects;
};

// Etherscan-style CSV export. Header is mandatory; required columns are
// matched case-insensitively and extra columns are ignored. Bad rows land in
// rejects. Throws Error(MalformedHeader).
ParseResult parse_etherscan_csv(std::istream& in, std::string_view source = "<csv>");

// Etherscan `account txlist` envelope. Throws Error(MalformedDocument) or
// Error(ApiError) when status != "1" and result is not an array.
ParseResult parse_etherscan_json(std::string_view document, std::string_view source = "<json>");
ParseResult parse_etherscan_json(std::istream& in, std::string_view source = "<json>");

struct CleanReport {
  std::size_t kept = 0;
  std::size_t dup_dropped = 0;
  std::size_t invalid_dropped = 0;
  std::vector<RowReject> rejects;  // invalid records found by clean(); indices are input positions
};

struct CleanResult {
  std::vector<Transaction> transactions;
  CleanReport report;
};

// Drops invalid records, then duplicate hashes (first occurrence wins).
CleanResult clean(std::vector<Transaction> txs);

struct PhishingList {
  std::set<Address> addresses;
  std::set<Address> verified;  // must be a subset of addresses
};

// One address per line; blank lines and '#' comments skipped.
// Throws Error(InvalidAddress) naming source and line.
std::set<Address> read_address_list(std::istream& in, std::string_view source = "<list>");

// Throws Error(InvalidConfig) if verified is not a subset of addresses.
PhishingList make_phishing_list(std::set<Address> addresses, std::set<Address> verified);

// Two-stage labeling: R1 matches against the listed set; with require_verified
// only the verified subset stays Phishing (R2). Counterparties of phishing
// addresses get OneHopPhishing provenance but keep the Benign address label.
// Transactions are returned in canonical order, so the result does not depend
// on input order. Warnings (e.g. an empty list) are appended to `warnings`.
LabeledDataset label_dataset(std::vector<Transaction> txs, const PhishingList& list,
                             bool require_verified,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace phishgraph
