#include "pwu/model_io.hpp"

#include "pwu/errors.hpp"
#include "pwu/geometry.hpp"

#include <fstream>
#include <sstream>

namespace pwu {

using nlohmann::json;

std::string pack_bits(const std::vector<std::uint8_t>& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out((bits.size() + 3) / 4, '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) {
      const std::size_t nibble = i / 4;
      const int value = (out[nibble] >= 'a' ? out[nibble] - 'a' + 10 : out[nibble] - '0') |
                        (8 >> (i % 4));
      out[nibble] = digits[value];
    }
  }
  return out;
}

std::vector<std::uint8_t> unpack_bits(const std::string& hex, std::size_t count) {
  if (hex.size() != (count + 3) / 4) {
    throw ParseError("bit string has " + std::to_string(hex.size()) + " hex digits, expected " +
                     std::to_string((count + 3) / 4));
  }
  std::vector<std::uint8_t> bits(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const char c = hex[i / 4];
    int v = 0;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else {
      throw ParseError(std::string("invalid hex digit '") + c + "' in bit string");
    }
    bits[i] = (v & (8 >> (i % 4))) != 0 ? 1 : 0;
  }
  return bits;
}

namespace {

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

template <typename M>
json mat_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r[static_cast<std::size_t>(j)] = m(i, j);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

Vec json_vec(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw ParseError(what + " must be an array of numbers");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(what + "[" + std::to_string(i) + "] is not a number");
    }
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

RowMat json_mat(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw ParseError(what + " must be an array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  RowMat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(what + " row " + std::to_string(i) + " is ragged");
    }
    m.row(static_cast<Eigen::Index>(i)) = json_vec(j[i], what).transpose();
  }
  return m;
}

json net_json(const MlpNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"weight", mat_json(l.weight)}, {"bias", vec_json(l.bias)}});
  }
  return layers;
}

MlpNetwork json_net(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(what + " must be a non-empty array of layers");
  }
  std::vector<AffineLayer> layers;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string name = what + "[" + std::to_string(k) + "]";
    layers.push_back(AffineLayer{Mat(json_mat(j[k].at("weight"), name + ".weight")),
                                 json_vec(j[k].at("bias"), name + ".bias")});
  }
  return MlpNetwork(std::move(layers));
}

json support_json(const SupportNetwork& s) {
  json j;
  j["lambda"] = s.lambda;
  if (s.provenance) {
    j["encoding"] = "pattern";
    j["bits"] = s.provenance->pattern.size();
    j["pattern"] = pack_bits(s.provenance->pattern);
    j["mask"] = s.provenance->mask.empty() ? json(nullptr) : json(pack_bits(s.provenance->mask));
  } else {
    j["encoding"] = "explicit";
    j["a"] = mat_json(s.a);
    j["b"] = vec_json(s.b);
  }
  return j;
}

SupportNetwork json_support(const json& j, const MlpNetwork& base, const Box& domain) {
  SupportNetwork s;
  s.lambda = j.at("lambda").get<double>();
  const std::string enc = j.at("encoding").get<std::string>();
  if (enc == "pattern") {
    const auto bits = j.at("bits").get<std::size_t>();
    RegionProvenance prov;
    prov.pattern = unpack_bits(j.at("pattern").get<std::string>(), bits);
    if (!j.at("mask").is_null()) {
      prov.mask = unpack_bits(j.at("mask").get<std::string>(), bits);
    }
    const LinearRegion r = region_from_pattern(base, prov, domain);
    s.a = r.a;
    s.b = r.b;
    s.provenance = std::move(prov);
  } else if (enc == "explicit") {
    s.a = json_mat(j.at("a"), "support.a");
    s.b = json_vec(j.at("b"), "support.b");
  } else {
    throw ParseError("unknown support encoding '" + enc + "'");
  }
  return s;
}

} // namespace

std::string model_to_json(const PatchedModel& model, const json& training) {
  model.validate();
  json j;
  j["format"] = "pwu-model";
  j["format_version"] = kModelFormatVersion;
  json fm;
  fm["kind"] = model.featuremap.kind == FeatureMap::Kind::identity ? "identity" : "frozen_network";
  fm["raw_dim"] = model.featuremap.raw_dim;
  fm["standardize"] = model.featuremap.standardize
                          ? json{{"mean", vec_json(model.featuremap.standardize->mean)},
                                 {"scale", vec_json(model.featuremap.standardize->scale)}}
                          : json(nullptr);
  fm["network"] = model.featuremap.network ? net_json(*model.featuremap.network) : json(nullptr);
  j["feature_map"] = std::move(fm);
  j["domain_box"] = {{"lo", vec_json(model.domain.lo)}, {"hi", vec_json(model.domain.hi)}};
  j["layers"] = net_json(model.base);
  json patches = json::array();
  for (const auto& p : model.patches) {
    json pj;
    pj["source_label"] = p.confusion.source_label;
    pj["target_label"] = p.confusion.target_label;
    pj["H"] = p.h;
    pj["confusion"] = {{"C", p.confusion.c ? mat_json(*p.confusion.c) : json(nullptr)},
                       {"d", vec_json(p.confusion.d)}};
    json sj = json::array();
    for (const auto& s : p.supports) {
      sj.push_back(support_json(s));
    }
    pj["supports"] = std::move(sj);
    patches.push_back(std::move(pj));
  }
  j["patches"] = std::move(patches);
  j["training"] = training.is_null() ? json::object() : training;
  return j.dump(1) + "\n";
}

PatchedModel model_from_json(const std::string& text, json* training) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "pwu-model") {
      throw ParseError("not a pwu model file (missing format tag)");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw UnsupportedVersionError("model format_version " + std::to_string(version) +
                                    " is not supported (expected " +
                                    std::to_string(kModelFormatVersion) + ")");
    }
    PatchedModel m;
    m.base = json_net(j.at("layers"), "layers");
    const json& fm = j.at("feature_map");
    const std::string kind = fm.at("kind").get<std::string>();
    if (kind == "identity") {
      m.featuremap = FeatureMap::identity(fm.at("raw_dim").get<Eigen::Index>());
    } else if (kind == "frozen_network") {
      m.featuremap = FeatureMap::frozen(json_net(fm.at("network"), "feature_map.network"));
    } else {
      throw ParseError("unknown feature map kind '" + kind + "'");
    }
    if (!fm.at("standardize").is_null()) {
      m.featuremap.standardize =
          Standardization{json_vec(fm["standardize"].at("mean"), "standardize.mean"),
                          json_vec(fm["standardize"].at("scale"), "standardize.scale")};
    }
    m.domain = Box{json_vec(j.at("domain_box").at("lo"), "domain_box.lo"),
                   json_vec(j.at("domain_box").at("hi"), "domain_box.hi")};
    for (const auto& pj : j.at("patches")) {
      PatchNetwork p;
      p.h = pj.at("H").get<double>();
      p.confusion.source_label = pj.at("source_label").get<int>();
      p.confusion.target_label = pj.at("target_label").get<int>();
      const json& cj = pj.at("confusion");
      if (!cj.at("C").is_null()) {
        p.confusion.c = Mat(json_mat(cj["C"], "confusion.C"));
      }
      p.confusion.d = json_vec(cj.at("d"), "confusion.d");
      for (const auto& sj : pj.at("supports")) {
        p.supports.push_back(json_support(sj, m.base, m.domain));
      }
      m.patches.push_back(std::move(p));
    }
    m.validate();
    if (training != nullptr) {
      *training = j.value("training", json::object());
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const PatchedModel& model, const std::filesystem::path& path,
                const json& training) {
  const std::string text = model_to_json(model, training);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write model file " + path.string());
  }
  out << text;
}

PatchedModel load_model(const std::filesystem::path& path, json* training) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open model file " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str(), training);
}

} // namespace pwu
