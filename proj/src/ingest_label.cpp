#include "phishgraph/ingest.hpp"

namespace phishgraph {

LabeledDataset label_dataset(std::vector<Transaction> txs, const PhishingList& list,
                             bool require_verified, std::vector<std::string>* warnings) {
  if (list.addresses.empty() && warnings)
    warnings->push_back("EmptyPhishingList: every address labeled benign");

  auto is_phishing = [&](const Address& a) {
    return require_verified ? list.verified.contains(a) : list.addresses.contains(a);
  };
  auto listed_label = [&](const Address& a) -> AddressLabel {
    const bool verified = list.verified.contains(a);
    const Provenance p = verified ? Provenance::VerifiedPhishing : Provenance::ListedPhishing;
    return {is_phishing(a) ? Label::Phishing : Label::Benign, p};
  };

  std::map<Address, AddressLabel> labels;
  for (const Transaction& tx : txs) {
    for (const Address* a : {&tx.sender, &tx.receiver}) {
      if (list.addresses.contains(*a))
        labels[*a] = listed_label(*a);
      else
        labels.try_emplace(*a, AddressLabel{Label::Benign, Provenance::AssumedBenign});
    }
  }
  // 1-hop: unlisted counterparties of phishing addresses. Set after the first
  // pass so the outcome does not depend on transaction order.
  for (const Transaction& tx : txs) {
    const bool s = is_phishing(tx.sender);
    const bool r = is_phishing(tx.receiver);
    if (s && !list.addresses.contains(tx.receiver))
      labels[tx.receiver] = {Label::Benign, Provenance::OneHopPhishing};
    if (r && !list.addresses.contains(tx.sender))
      labels[tx.sender] = {Label::Benign, Provenance::OneHopPhishing};
  }

  sort_transactions(txs);
  return LabeledDataset(std::move(txs), std::move(labels));
}

}  // namespace phishgraph
