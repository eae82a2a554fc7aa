#include "pwu/data.hpp"

#include "pwu/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace pwu {

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out;
  out.split = split;
  out.num_classes = num_classes;
  out.x.resize(dim(), static_cast<Eigen::Index>(indices.size()));
  out.y.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= size()) {
      throw ValidationError("dataset index " + std::to_string(idx) + " out of range");
    }
    out.x.col(static_cast<Eigen::Index>(i)) = x.col(idx);
    out.y.push_back(y[static_cast<std::size_t>(idx)]);
  }
  return out;
}

Dataset Dataset::without(const std::vector<int>& indices) const {
  std::vector<char> drop(static_cast<std::size_t>(size()), 0);
  for (int idx : indices) {
    if (idx < 0 || idx >= size()) {
      throw ValidationError("dataset index " + std::to_string(idx) + " out of range");
    }
    drop[static_cast<std::size_t>(idx)] = 1;
  }
  std::vector<int> keep;
  for (int i = 0; i < size(); ++i) {
    if (!drop[static_cast<std::size_t>(i)]) {
      keep.push_back(i);
    }
  }
  return subset(keep);
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(x.cols()) != y.size()) {
    throw ValidationError("feature count " + std::to_string(x.cols()) + " != label count " +
                          std::to_string(y.size()));
  }
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
  if (!x.allFinite()) {
    throw ValidationError("dataset contains non-finite features");
  }
}

// ---- IDX -----------------------------------------------------------------

namespace {

std::vector<unsigned char> read_maybe_gz(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) {
    throw ParseError("cannot open " + path.string());
  }
  std::vector<unsigned char> bytes;
  unsigned char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) {
    bytes.insert(bytes.end(), buf, buf + n);
  }
  const bool failed = n < 0;
  gzclose(f);
  if (failed) {
    throw ParseError("read error (corrupt compressed stream?) in " + path.string() +
                     " at byte " + std::to_string(bytes.size()));
  }
  return bytes;
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off, const std::string& what) {
  if (off + 4 > b.size()) {
    throw ParseError(what + ": file truncated at byte " + std::to_string(b.size()) +
                     " while reading header field at offset " + std::to_string(off));
  }
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::filesystem::path pick(const std::filesystem::path& dir, const std::string& stem) {
  const auto plain = dir / stem;
  if (std::filesystem::exists(plain)) {
    return plain;
  }
  return dir / (stem + ".gz");
}

} // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_maybe_gz(images);
  const auto lab = read_maybe_gz(labels);
  const std::string iname = images.filename().string();
  const std::string lname = labels.filename().string();

  const std::uint32_t imagic = be32(img, 0, iname);
  if (imagic != 0x00000803u) {
    std::ostringstream msg;
    msg << iname << ": bad image magic 0x" << std::hex << imagic << " at byte 0";
    throw ParseError(msg.str());
  }
  const std::uint32_t lmagic = be32(lab, 0, lname);
  if (lmagic != 0x00000801u) {
    std::ostringstream msg;
    msg << lname << ": bad label magic 0x" << std::hex << lmagic << " at byte 0";
    throw ParseError(msg.str());
  }
  const std::size_t count = be32(img, 4, iname);
  const std::size_t rows = be32(img, 8, iname);
  const std::size_t cols = be32(img, 12, iname);
  const std::size_t lcount = be32(lab, 4, lname);
  const std::size_t pixels = rows * cols;
  if (img.size() < 16 + count * pixels) {
    throw ParseError(iname + ": file truncated at byte " + std::to_string(img.size()) +
                     ", expected " + std::to_string(16 + count * pixels));
  }
  if (lab.size() < 8 + lcount) {
    throw ParseError(lname + ": file truncated at byte " + std::to_string(lab.size()) +
                     ", expected " + std::to_string(8 + lcount));
  }
  if (count != lcount) {
    throw ValidationError("image count " + std::to_string(count) + " != label count " +
                          std::to_string(lcount));
  }
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(count));
  d.y.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = img.data() + 16 + i * pixels;
    for (std::size_t j = 0; j < pixels; ++j) {
      d.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = p[j] / 255.0;
    }
    d.y[i] = lab[8 + i];
    max_label = std::max(max_label, d.y[i]);
  }
  d.num_classes = std::max(10, max_label + 1);
  return d;
}

// ---- CSV -----------------------------------------------------------------

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "' at row " +
                     std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  CsvTable table;
  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  bool skip = header;
  while (std::getline(in, line)) {
    if (skip) {
      skip = false;
      ++row;
      continue;
    }
    if (line.empty() || line == "\r") {
      ++row;
      continue;
    }
    const auto cells = split_commas(line);
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw ParseError(path.filename().string() + ": ragged row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(parse_number(cells[c], row, c));
    }
    table.rows.push_back(std::move(values));
    ++row;
  }
  return table;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, int label_column, bool header) {
  const CsvTable t = read_csv(path, header);
  if (t.rows.empty()) {
    throw ParseError(path.filename().string() + ": no data rows");
  }
  const int width = static_cast<int>(t.rows.front().size());
  if (label_column < 0 || label_column >= width) {
    throw ValidationError("label column " + std::to_string(label_column) + " out of range for " +
                          std::to_string(width) + " columns");
  }
  if (width < 2) {
    throw ValidationError("CSV needs at least one feature column besides the label");
  }
  Dataset d;
  d.x.resize(width - 1, static_cast<Eigen::Index>(t.rows.size()));
  int max_label = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const double lv = r[static_cast<std::size_t>(label_column)];
    if (lv < 0 || lv != std::floor(lv)) {
      throw ParseError("label '" + std::to_string(lv) + "' at row " + std::to_string(i) +
                       " is not a non-negative integer");
    }
    d.y.push_back(static_cast<int>(lv));
    max_label = std::max(max_label, d.y.back());
    Eigen::Index f = 0;
    for (int c = 0; c < width; ++c) {
      if (c != label_column) {
        d.x(f++, static_cast<Eigen::Index>(i)) = r[static_cast<std::size_t>(c)];
      }
    }
  }
  d.num_classes = max_label + 1;
  return d;
}

Standardization fit_standardization(const Dataset& train) {
  if (train.size() == 0) {
    throw ValidationError("cannot standardize an empty dataset");
  }
  Standardization s;
  s.mean = train.x.rowwise().mean();
  const Mat centred = train.x.colwise() - s.mean;
  s.scale = (centred.array().square().rowwise().sum() / static_cast<double>(train.size())).sqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale[i] > 0.0)) {
      s.scale[i] = 1.0;
    }
  }
  return s;
}

// ---- blobs ---------------------------------------------------------------

std::pair<Dataset, Dataset> gen_blobs(const BlobOptions& o) {
  if (o.classes < 2) {
    throw ValidationError("blobs need at least two classes");
  }
  if (o.per_class < 1 || o.dim < 2 || o.spread < 0.0) {
    throw ValidationError("blobs need per_class >= 1, dim >= 2 and spread >= 0");
  }
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_train = (o.per_class * 4) / 5;
  const int n_test = o.per_class - n_train;

  Dataset train;
  Dataset test;
  train.split = Split::train;
  test.split = Split::test;
  train.num_classes = test.num_classes = o.classes;
  train.x.resize(o.dim, static_cast<Eigen::Index>(n_train) * o.classes);
  test.x.resize(o.dim, static_cast<Eigen::Index>(n_test) * o.classes);
  Eigen::Index tr = 0;
  Eigen::Index te = 0;
  for (int c = 0; c < o.classes; ++c) {
    Vec mean = Vec::Zero(o.dim);
    const double angle = 2.0 * std::numbers::pi * c / o.classes;
    mean[0] = 2.0 * std::cos(angle);
    mean[1] = 2.0 * std::sin(angle);
    std::vector<Vec> pts;
    for (int i = 0; i < o.per_class; ++i) {
      Vec p(o.dim);
      for (int j = 0; j < o.dim; ++j) {
        p[j] = mean[j] + o.spread * normal(rng);
      }
      pts.push_back(std::move(p));
    }
    std::shuffle(pts.begin(), pts.end(), rng);
    for (int i = 0; i < o.per_class; ++i) {
      if (i < n_train) {
        train.x.col(tr++) = pts[static_cast<std::size_t>(i)];
        train.y.push_back(c);
      } else {
        test.x.col(te++) = pts[static_cast<std::size_t>(i)];
        test.y.push_back(c);
      }
    }
  }
  return {std::move(train), std::move(test)};
}

// ---- spec strings --------------------------------------------------------

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body, const std::string& spec) {
  std::map<std::string, std::string> kv;
  if (body.empty()) {
    return kv;
  }
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    if (comma == std::string::npos) {
      comma = body.size();
    }
    const std::string item = body.substr(start, comma - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("malformed data spec item '" + item + "' in '" + spec + "'");
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    start = comma + 1;
  }
  return kv;
}

template <typename T>
T get_num(std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  T v{};
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("data spec value " + key + "=" + s + " is not a number");
  }
  kv.erase(it);
  return v;
}

std::string get_str(std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw ValidationError("data spec needs '" + key + "='");
  }
  std::string v = it->second;
  kv.erase(it);
  return v;
}

void reject_unknown(const std::map<std::string, std::string>& kv, const std::string& spec) {
  if (!kv.empty()) {
    throw ValidationError("unknown data spec key '" + kv.begin()->first + "' in '" + spec + "'");
  }
}

} // namespace

DataBundle load_data(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  auto kv = parse_kv(colon == std::string::npos ? "" : spec.substr(colon + 1), spec);
  DataBundle bundle;
  bundle.spec = spec;
  if (kind == "blobs") {
    BlobOptions o;
    o.classes = get_num<int>(kv, "classes", o.classes);
    o.per_class = get_num<int>(kv, "per_class", o.per_class);
    o.dim = get_num<int>(kv, "dim", o.dim);
    o.spread = get_num<double>(kv, "spread", o.spread);
    o.seed = get_num<std::uint64_t>(kv, "seed", o.seed);
    reject_unknown(kv, spec);
    auto [train, test] = gen_blobs(o);
    bundle.train = std::move(train);
    bundle.test = std::move(test);
    bundle.domain = Box::padded(bundle.train.x);
  } else if (kind == "idx") {
    const std::filesystem::path dir = get_str(kv, "dir");
    reject_unknown(kv, spec);
    bundle.train = load_idx(pick(dir, "train-images-idx3-ubyte"), pick(dir, "train-labels-idx1-ubyte"));
    bundle.test = load_idx(pick(dir, "t10k-images-idx3-ubyte"), pick(dir, "t10k-labels-idx1-ubyte"));
    bundle.test.split = Split::test;
    const int classes = std::max(bundle.train.num_classes, bundle.test.num_classes);
    bundle.train.num_classes = bundle.test.num_classes = classes;
    bundle.domain = Box::unit(bundle.train.dim());
  } else if (kind == "csv") {
    const std::string train_path = get_str(kv, "train");
    const std::string test_path = get_str(kv, "test");
    const int label = get_num<int>(kv, "label", 0);
    const bool header = get_num<int>(kv, "header", 0) != 0;
    reject_unknown(kv, spec);
    bundle.train = load_csv(train_path, label, header);
    bundle.test = load_csv(test_path, label, header);
    bundle.test.split = Split::test;
    if (bundle.train.dim() != bundle.test.dim()) {
      throw ValidationError("train and test CSV have different feature counts");
    }
    const int classes = std::max(bundle.train.num_classes, bundle.test.num_classes);
    bundle.train.num_classes = bundle.test.num_classes = classes;
    bundle.standardize = fit_standardization(bundle.train);
    Mat z(bundle.train.dim(), bundle.train.size());
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      z.col(i) = bundle.standardize->apply(bundle.train.x.col(i));
    }
    bundle.domain = Box::padded(z);
  } else {
    throw ValidationError("unknown data spec kind '" + kind + "' (expected blobs, idx or csv)");
  }
  bundle.train.validate();
  bundle.test.validate();
  return bundle;
}

// ---- canonical CSV -------------------------------------------------------

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

} // namespace

void save_canonical_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::string text = "label";
  for (Eigen::Index j = 0; j < data.dim(); ++j) {
    text += ",f" + std::to_string(j);
  }
  text += '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    text += std::to_string(data.y[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      text += ',';
      append_double(text, data.x(j, i));
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write " + path.string());
  }
  out << text;
}

Dataset load_canonical_csv(const std::filesystem::path& path, Split split) {
  Dataset d = load_csv(path, 0, true);
  d.split = split;
  return d;
}

} // namespace pwu
