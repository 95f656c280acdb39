#include "phishgraph/storage.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "phishgraph/error.hpp"
#include "phishgraph/report.hpp"

namespace phishgraph {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void magic(const char (&m)[5]) { bytes(m, 4); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void check() {
    if (!out_) throw Error(Errc::IoError, "write failed");
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, const char* what) : in_(in), what_(what) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated");
  }
  void magic(const char (&m)[5]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0) fail("bad magic");
  }
  void version(std::uint32_t expected) {
    if (u32() != expected) fail("unsupported version");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 24)) fail("string too long");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  // Guards allocation sizes read from the stream.
  std::uint64_t count(std::uint64_t limit) {
    const std::uint64_t n = u64();
    if (n > limit) fail("count out of range");
    return n;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const char* why) { throw Error(Errc::FormatError, std::string(what_) + ": " + why); }

 private:
  std::istream& in_;
  const char* what_;
};

constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 40;

void write_address(Writer& w, const Address& a) { w.bytes(a.bytes().data(), 20); }

Address read_address(Reader& r) {
  std::array<std::uint8_t, 20> b{};
  r.bytes(b.data(), 20);
  return Address::from_bytes(b);
}

void write_hash(Writer& w, const std::string& hash) {
  // Canonical "0x" + 64 hex; stored as 32 raw bytes.
  unsigned char raw[32];
  auto nibble = [](char c) { return c <= '9' ? c - '0' : c - 'a' + 10; };
  for (int i = 0; i < 32; ++i) raw[i] = static_cast<unsigned char>(nibble(hash[2 + 2 * i]) << 4 | nibble(hash[3 + 2 * i]));
  w.bytes(raw, 32);
}

std::string read_hash(Reader& r) {
  unsigned char raw[32];
  r.bytes(raw, 32);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s = "0x";
  for (unsigned char b : raw) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

void write_wei(Writer& w, const Wei& v) {
  std::vector<unsigned char> mag;
  boost::multiprecision::export_bits(v, std::back_inserter(mag), 8);  // big-endian, minimal
  w.u32(static_cast<std::uint32_t>(mag.size()));
  w.bytes(mag.data(), mag.size());
}

Wei read_wei(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n > 64) r.fail("value too wide");
  std::vector<unsigned char> mag(n);
  r.bytes(mag.data(), n);
  Wei v = 0;
  if (n) boost::multiprecision::import_bits(v, mag.begin(), mag.end(), 8);
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, const LabeledDataset& ds) {
  Writer w(out);
  w.magic("PGDS");
  w.u32(kDatasetFormatVersion);
  w.u64(ds.transactions().size());
  for (const Transaction& tx : ds.transactions()) {
    w.u64(tx.block_number);
    w.u64(static_cast<std::uint64_t>(tx.timestamp));
    write_hash(w, tx.tx_hash);
    write_address(w, tx.sender);
    write_address(w, tx.receiver);
    write_wei(w, tx.value);
    w.u64(tx.gas);
    w.u64(tx.gas_price);
    w.u64(tx.gas_used);
  }
  w.u64(ds.labels().size());
  for (const auto& [addr, lab] : ds.labels()) {
    write_address(w, addr);
    w.u8(static_cast<std::uint8_t>(lab.label));
    w.u8(static_cast<std::uint8_t>(lab.provenance));
  }
  w.check();
}

LabeledDataset read_dataset(std::istream& in) {
  Reader r(in, "dataset");
  r.magic("PGDS");
  r.version(kDatasetFormatVersion);
  std::vector<Transaction> txs(r.count(kMaxCount));
  for (Transaction& tx : txs) {
    tx.block_number = r.u64();
    tx.timestamp = static_cast<std::int64_t>(r.u64());
    tx.tx_hash = read_hash(r);
    tx.sender = read_address(r);
    tx.receiver = read_address(r);
    tx.value = read_wei(r);
    tx.gas = r.u64();
    tx.gas_price = r.u64();
    tx.gas_used = r.u64();
  }
  std::map<Address, AddressLabel> labels;
  const std::uint64_t n_labels = r.count(kMaxCount);
  for (std::uint64_t i = 0; i < n_labels; ++i) {
    const Address a = read_address(r);
    const std::uint8_t l = r.u8(), p = r.u8();
    if (l > 1 || p > static_cast<std::uint8_t>(Provenance::Synthetic)) r.fail("bad label code");
    labels[a] = {static_cast<Label>(l), static_cast<Provenance>(p)};
  }
  r.expect_end();
  try {
    return LabeledDataset(std::move(txs), std::move(labels));
  } catch (const Error& e) {
    throw Error(Errc::FormatError, std::string("dataset: ") + e.what());
  }
}

void write_features_binary(std::ostream& out, const FeatureMatrix& fm) {
  Writer w(out);
  w.magic("PGFM");
  w.u32(kFeatureFormatVersion);
  w.u64(fm.rows.rows);
  w.u64(fm.rows.cols);
  for (const auto& n : fm.names) w.str(n);
  w.u8(fm.scaler ? 1 : 0);
  if (fm.scaler)
    for (std::size_t j = 0; j < fm.rows.cols; ++j) {
      w.f64(fm.scaler->min[j]);
      w.f64(fm.scaler->max[j]);
    }
  for (double v : fm.rows.data) w.f64(v);
  w.check();
}

FeatureMatrix read_features_binary(std::istream& in) {
  Reader r(in, "feature matrix");
  r.magic("PGFM");
  r.version(kFeatureFormatVersion);
  FeatureMatrix fm;
  const std::uint64_t rows = r.count(kMaxCount);
  const std::uint64_t cols = r.count(1 << 16);
  for (std::uint64_t j = 0; j < cols; ++j) fm.names.push_back(r.str());
  if (r.u8()) {
    MinMaxScaler s;
    for (std::uint64_t j = 0; j < cols; ++j) {
      s.min.push_back(r.f64());
      s.max.push_back(r.f64());
    }
    fm.scaler = std::move(s);
  }
  fm.rows = Matrix(rows, cols);
  for (double& v : fm.rows.data) v = r.f64();
  r.expect_end();
  return fm;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& fm, const std::vector<Address>& nodes) {
  if (nodes.size() != fm.rows.rows) throw Error(Errc::ShapeMismatch, "node list length != feature rows");
  const auto old = out.precision(17);
  out << "address";
  for (const auto& n : fm.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < fm.rows.rows; ++i) {
    out << nodes[i].str();
    for (double v : fm.rows.row(i)) out << ',' << v;
    out << '\n';
  }
  out.precision(old);
  if (!out) throw Error(Errc::IoError, "write failed");
}

void write_model(std::ostream& out, const GcnModel& model) {
  Writer w(out);
  w.magic("PGMD");
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.layer_count()));
  w.u8(model.biases.empty() ? 0 : 1);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Matrix& m = model.weights[l];
    w.u64(m.rows);
    w.u64(m.cols);
    for (double v : m.data) w.f64(v);
    if (!model.biases.empty())
      for (double v : model.biases[l]) w.f64(v);
  }
  w.check();
}

GcnModel read_model(std::istream& in) {
  Reader r(in, "model");
  r.magic("PGMD");
  r.version(kModelFormatVersion);
  const std::uint32_t layers = r.u32();
  if (layers == 0 || layers > 64) r.fail("bad layer count");
  const bool bias = r.u8() != 0;
  GcnModel m;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint64_t rows = r.count(1 << 20), cols = r.count(1 << 20);
    if (l > 0 && rows != m.weights.back().cols) r.fail("layer dimensions do not chain");
    Matrix w(rows, cols);
    for (double& v : w.data) v = r.f64();
    m.weights.push_back(std::move(w));
    if (bias) {
      std::vector<double> b(cols);
      for (double& v : b) v = r.f64();
      m.biases.push_back(std::move(b));
    }
  }
  if (m.weights.back().cols != 2) r.fail("output layer must have 2 columns");
  r.expect_end();
  return m;
}

nlohmann::json to_json(const ModelSidecar& s) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["config"] = s.config;
  j["seed"] = s.config.seed;
  j["feature_set"] = s.feature_set;
  j["feature_names"] = s.feature_names;
  j["adjacency"] = {{"self_loops", s.adjacency.add_self_loops}, {"symmetrize", s.adjacency.symmetrize}};
  if (s.scaler) j["scaler"] = {{"min", s.scaler->min}, {"max", s.scaler->max}};
  return j;
}

ModelSidecar sidecar_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<std::uint32_t>() != kModelFormatVersion)
      throw Error(Errc::FormatError, "model sidecar: unsupported version");
    ModelSidecar s;
    j.at("config").get_to(s.config);
    j.at("feature_names").get_to(s.feature_names);
    s.feature_set = j.value("feature_set", std::string());
    s.adjacency.add_self_loops = j.at("adjacency").at("self_loops").get<bool>();
    s.adjacency.symmetrize = j.at("adjacency").at("symmetrize").get<bool>();
    if (j.contains("scaler"))
      s.scaler = MinMaxScaler{j.at("scaler").at("min").get<std::vector<double>>(),
                              j.at("scaler").at("max").get<std::vector<double>>()};
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, std::string("model sidecar: ") + e.what());
  }
}

void check_feature_layout(const ModelSidecar& sidecar, const std::vector<std::string>& names) {
  if (sidecar.feature_names != names)
    throw Error(Errc::LayoutMismatch, "feature layout does not match the model (expected " +
                                          std::to_string(sidecar.feature_names.size()) + " named columns of set '" +
                                          sidecar.feature_set + "')");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string s{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(Errc::IoError, "read failed: " + path.string());
  return s;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

}  // namespace phishgraph
