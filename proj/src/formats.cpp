#include "scorealign/formats.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>

namespace scorealign {
namespace {

// Runs a JSON field extraction, turning library and validation exceptions
// into FormatError with some context.
template <typename Fn>
auto guarded(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

void require_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected a JSON array");
}

void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw FormatError(what + ": expected a JSON object");
}

// nlohmann converts 1.5 to 1 silently; indices and counts must be integral.
int as_int(const Json& j) {
  if (!j.is_number_integer()) throw FormatError("expected an integer, got " + j.dump());
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw FormatError("integer out of range: " + j.dump());
  }
  return static_cast<int>(v);
}

std::size_t as_count(const Json& j) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw FormatError("expected a non-negative integer, got " + j.dump());
  }
  return j.get<std::size_t>();
}

std::vector<int> as_int_array(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array of integers");
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_int(v));
  return out;
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b]))
         << (8 * b);
  }
  return v;
}

std::uint16_t get_u16(const std::string& in, std::size_t at) {
  return static_cast<std::uint16_t>(
      static_cast<unsigned char>(in[at]) |
      (static_cast<unsigned char>(in[at + 1]) << 8));
}

constexpr std::size_t kJltrHeaderSize = 4 + 2 + 4 + 4 + 4;

std::uint32_t big_endian_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v = (v << 8) | static_cast<unsigned char>(in[at + b]);
  }
  return v;
}

}  // namespace

std::string to_text(const Json& j) { return j.dump(2) + "\n"; }

Json parse_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Json measures_to_json(const std::vector<MeasureRecord>& measures) {
  Json out = Json::array();
  for (const auto& m : measures) {
    Json e = {{"page", m.box.page}, {"x", m.box.x}, {"y", m.box.y},
              {"w", m.box.w},       {"h", m.box.h}};
    if (m.staves) e["staves"] = *m.staves;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<MeasureRecord> measures_from_json(const Json& j) {
  require_array(j, "measures.json");
  std::vector<MeasureRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(guarded("measures.json[" + std::to_string(i) + "]", [&] {
      const auto& e = j[i];
      MeasureRecord m;
      m.box = {as_int(e.at("page")), e.at("y").get<double>(),
               e.at("h").get<double>(), e.at("x").get<double>(),
               e.at("w").get<double>()};
      validate_box(m.box);
      if (e.contains("staves")) {
        m.staves = as_int(e.at("staves"));
        if (*m.staves < 1) throw FormatError("staves must be >= 1");
      }
      return m;
    }));
  }
  if (out.empty()) throw FormatError("measures.json: no measures");
  return out;
}

Json jumps_to_json(const std::vector<JumpLabel>& jumps) {
  Json out = Json::array();
  for (const auto& jl : jumps) {
    out.push_back(
        {{"from", jl.from_index}, {"to", jl.to_index}, {"order", jl.order}});
  }
  return out;
}

std::vector<JumpLabel> jumps_from_json(const Json& j) {
  require_array(j, "jumps");
  std::vector<JumpLabel> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(guarded("jumps[" + std::to_string(i) + "]", [&] {
      const auto& e = j[i];
      JumpLabel jl;
      jl.from_index = as_int(e.at("from"));
      jl.to_index = as_int(e.at("to"));
      jl.order = e.contains("order") ? as_int(e.at("order"))
                                     : static_cast<int>(i);
      return jl;
    }));
  }
  return out;
}

Json logical_order_to_json(const LogicalOrder& order) {
  return Json(order.entries());
}

LogicalOrder logical_order_from_json(const Json& j) {
  require_array(j, "logical_order.json");
  return guarded("logical_order.json",
                 [&] { return LogicalOrder(as_int_array(j)); });
}

Json noteheads_to_json(const std::vector<NoteheadEvent>& events) {
  Json out = Json::array();
  for (const auto& e : events) {
    out.push_back({{"measure", e.measure_index},
                   {"staff", e.staff_index},
                   {"staff_pos", e.staff_pos},
                   {"x_rel", e.x_rel}});
  }
  return out;
}

std::vector<NoteheadEvent> noteheads_from_json(const Json& j) {
  require_array(j, "noteheads.json");
  std::vector<NoteheadEvent> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(guarded("noteheads.json[" + std::to_string(i) + "]", [&] {
      const auto& e = j[i];
      return NoteheadEvent{as_int(e.at("measure")), as_int(e.at("staff")),
                           as_int(e.at("staff_pos")),
                           e.at("x_rel").get<double>()};
    }));
  }
  return out;
}

Json staff_meta_to_json(const StaffMetadata& meta) {
  Json out = Json::array();
  for (const auto& m : meta) {
    Json clefs = Json::array();
    for (auto c : m.clefs) clefs.push_back(to_string(c));
    out.push_back({{"clefs", std::move(clefs)}, {"key", m.key_signature}});
  }
  return out;
}

StaffMetadata staff_meta_from_json(const Json& j) {
  require_array(j, "staff_meta.json");
  StaffMetadata out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(guarded("staff_meta.json[" + std::to_string(i) + "]", [&] {
      const auto& e = j[i];
      MeasureStaffInfo info;
      for (const auto& c : e.at("clefs")) {
        info.clefs.push_back(parse_clef(c.get<std::string>()));
      }
      info.key_signature = as_int(e.at("key"));
      if (info.key_signature < -7 || info.key_signature > 7) {
        throw FormatError("key must be in [-7, 7]");
      }
      return info;
    }));
  }
  return out;
}

Json ground_truth_to_json(const GroundTruthRecord& gt) {
  return {{"duration_T", gt.duration},
          {"logical_order", gt.logical_order},
          {"measure_onsets", gt.measure_onsets}};
}

GroundTruthRecord ground_truth_from_json(const Json& j) {
  require_object(j, "gt.json");
  return guarded("gt.json", [&] {
    GroundTruthRecord gt;
    gt.duration = j.at("duration_T").get<double>();
    gt.logical_order = as_int_array(j.at("logical_order"));
    gt.measure_onsets = j.at("measure_onsets").get<std::vector<double>>();
    if (gt.logical_order.size() != gt.measure_onsets.size()) {
      throw FormatError("logical_order and measure_onsets differ in length");
    }
    return gt;
  });
}

Json notes_to_json(const NotesRecord& notes) {
  Json list = Json::array();
  for (const auto& n : notes.notes) {
    list.push_back({{"onset", n.onset}, {"offset", n.offset}, {"pitch", n.pitch}});
  }
  Json out = Json::object();
  if (notes.duration) out["duration"] = *notes.duration;
  out["notes"] = std::move(list);
  return out;
}

NotesRecord notes_from_json(const Json& j) {
  require_object(j, "notes.json");
  return guarded("notes.json", [&] {
    NotesRecord out;
    if (j.contains("duration")) out.duration = j.at("duration").get<double>();
    for (const auto& e : j.at("notes")) {
      out.notes.push_back({e.at("onset").get<double>(),
                           e.at("offset").get<double>(),
                           as_int(e.at("pitch"))});
    }
    return out;
  });
}

Json alignment_to_json(const AlignmentRecord& a) {
  Json playheads = Json::array();
  for (const auto& p : a.playheads) {
    playheads.push_back({{"page", p.page}, {"y", p.y}, {"h", p.h}, {"x", p.x}});
  }
  Json digests = Json::object();
  for (const auto& [name, digest] : a.provenance.input_digests) {
    digests[name] = digest;
  }
  return {{"duration_T", a.duration},
          {"M", a.measure_count},
          {"sample_rate", Alignment::kSampleRate},
          {"logical_order", a.logical_order},
          {"dtw_cost", a.dtw_cost},
          {"dropped_noteheads", a.dropped_noteheads},
          {"provenance",
           {{"variant", a.provenance.variant},
            {"threshold", a.provenance.threshold},
            {"inputs", std::move(digests)}}},
          {"samples", a.samples},
          {"playheads", std::move(playheads)}};
}

AlignmentRecord alignment_from_json(const Json& j) {
  require_object(j, "alignment.json");
  return guarded("alignment.json", [&] {
    AlignmentRecord a;
    a.duration = j.at("duration_T").get<double>();
    a.measure_count = as_int(j.at("M"));
    if (j.at("sample_rate").get<double>() != Alignment::kSampleRate) {
      throw FormatError("unsupported sample_rate");
    }
    a.logical_order = as_int_array(j.at("logical_order"));
    a.dtw_cost = j.at("dtw_cost").get<double>();
    a.dropped_noteheads = as_count(j.at("dropped_noteheads"));
    const auto& prov = j.at("provenance");
    a.provenance.variant = prov.at("variant").get<std::string>();
    a.provenance.threshold = prov.at("threshold").get<double>();
    for (const auto& [name, digest] : prov.at("inputs").items()) {
      a.provenance.input_digests[name] = digest.get<std::string>();
    }
    a.samples = j.at("samples").get<std::vector<double>>();
    for (const auto& p : j.at("playheads")) {
      a.playheads.push_back({as_int(p.at("page")), p.at("y").get<double>(),
                             p.at("h").get<double>(), p.at("x").get<double>()});
    }
    if (static_cast<int>(a.logical_order.size()) != a.measure_count) {
      throw FormatError("logical_order length differs from M");
    }
    return a;
  });
}

Json metrics_to_json(const Metrics& m) {
  return {{"MAcc", m.macc}, {"MErr", m.merr}, {"MDev", m.mdev}, {"N", m.samples}};
}

Metrics metrics_from_json(const Json& j) {
  require_object(j, "eval.json");
  return guarded("eval.json", [&] {
    Metrics m;
    m.macc = j.at("MAcc").get<double>();
    m.merr = j.at("MErr").get<double>();
    m.mdev = j.at("MDev").get<double>();
    m.samples = as_count(j.at("N"));
    return m;
  });
}

std::string encode_jltr(const FeatureFile& file) {
  std::string out;
  out.reserve(kJltrHeaderSize + file.values.data().size() * 4);
  out.append("JLTR", 4);
  put_u16(out, kJltrVersion);
  put_u32(out, file.frame_rate);
  put_u32(out, static_cast<std::uint32_t>(file.values.rows()));
  put_u32(out, static_cast<std::uint32_t>(file.values.cols()));
  for (float v : file.values.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureFile decode_jltr(const std::string& bytes) {
  if (bytes.size() < kJltrHeaderSize || bytes.compare(0, 4, "JLTR") != 0) {
    throw FormatError("not a JLTR feature file");
  }
  const auto version = get_u16(bytes, 4);
  if (version != kJltrVersion) {
    throw FormatError("unsupported JLTR version " + std::to_string(version));
  }
  FeatureFile file;
  file.frame_rate = get_u32(bytes, 6);
  const std::size_t rows = get_u32(bytes, 10);
  const std::size_t cols = get_u32(bytes, 14);
  const std::size_t expected = kJltrHeaderSize + rows * cols * 4;
  if (bytes.size() != expected) {
    throw FormatError("JLTR payload is " + std::to_string(bytes.size()) +
                      " bytes, header implies " + std::to_string(expected));
  }
  std::vector<float> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kJltrHeaderSize + 4 * i));
  }
  file.values = Matrix<float>(rows, cols, std::move(values));
  return file;
}

FeatureFile read_jltr(const std::filesystem::path& path) {
  try {
    return decode_jltr(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.filename().string() + ": " + e.what());
  }
}

void write_jltr(const std::filesystem::path& path, const FeatureFile& file) {
  write_file(path, encode_jltr(file));
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

PageSize png_size(const std::string& bytes) {
  static constexpr unsigned char kSignature[8] = {0x89, 'P',  'N',  'G',
                                                  '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kSignature, 8) != 0 ||
      bytes.compare(12, 4, "IHDR") != 0) {
    throw FormatError("not a PNG image");
  }
  return {static_cast<int>(big_endian_u32(bytes, 16)),
          static_cast<int>(big_endian_u32(bytes, 20))};
}

}  // namespace scorealign
