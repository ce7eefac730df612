#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "shapecode/typeclass.hpp"

// Cache file format (version 1, little-endian), see README:
//   magic "SHPCTBL1", u32 version,
//   u8 mode, u8 reserved, u16 m, u32 length,
//   u32 num_probs, num_probs x u64 (double bit patterns),
//   u64 num_classes, u64 num_groups,
//   num_classes*m x u16 class counts (global order),
//   num_classes x u32 enum->group ids,
//   per group: u64 first_class, u64 num_classes, u32 nbytes, size bytes (LSB first),
//   u64 FNV-1a checksum of everything above.
// Cumulative offsets, info values and walk tables are recomputed on load;
// the load path re-validates that group sizes sum to m^N.

namespace shapecode {

namespace {

constexpr char kMagic[8] = {'S', 'H', 'P', 'C', 'T', 'B', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}
template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  put_bytes(out, &v, sizeof(T));
}

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;
  void bytes(void* dst, std::size_t n) {
    if (static_cast<std::size_t>(end - p) < n) throw std::runtime_error("cache file truncated");
    std::memcpy(dst, p, n);
    p += n;
  }
  template <class T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
};

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string cache_path(const std::string& key) {
  const char* dir = std::getenv("SHAPECODE_CACHE_DIR");
  if (!dir || !*dir) return {};
  return std::string(dir) + "/" + key + ".sct";
}

}  // namespace

struct TableCacheIO {
  static std::vector<std::uint8_t> serialize(const ClassTable& t) {
    std::vector<std::uint8_t> out;
    put_bytes(out, kMagic, 8);
    put<std::uint32_t>(out, kVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.mode_));
    put<std::uint8_t>(out, 0);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.m_));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.length_));
    if (t.ensemble_) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.ensemble_->size()));
      for (double d : t.ensemble_->probs()) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put<std::uint64_t>(out, bits);
      }
    } else {
      put<std::uint32_t>(out, 0);
    }
    put<std::uint64_t>(out, t.num_classes_);
    put<std::uint64_t>(out, t.groups_.size());
    put_bytes(out, t.class_counts_.data(), t.class_counts_.size() * 2);
    put_bytes(out, t.gid_by_enum_.data(), t.gid_by_enum_.size() * 4);
    for (const auto& g : t.groups_) {
      put<std::uint64_t>(out, g.first_class);
      put<std::uint64_t>(out, g.num_classes);
      std::vector<std::uint8_t> blob;
      boost::multiprecision::export_bits(g.size, std::back_inserter(blob), 8, false);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
      put_bytes(out, blob.data(), blob.size());
    }
    put<std::uint64_t>(out, fnv1a(out.data(), out.size()));
    return out;
  }

  static std::shared_ptr<ClassTable> deserialize(const std::vector<std::uint8_t>& buf) {
    if (buf.size() < 8 + 4 + 8 + 8) throw std::runtime_error("cache file too small");
    const std::uint64_t want = fnv1a(buf.data(), buf.size() - 8);
    std::uint64_t got;
    std::memcpy(&got, buf.data() + buf.size() - 8, 8);
    if (want != got) throw std::runtime_error("cache file checksum mismatch");

    Reader r{buf.data(), buf.data() + buf.size() - 8};
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("bad cache magic");
    if (r.get<std::uint32_t>() != kVersion) throw std::runtime_error("unsupported cache version");

    auto table = std::shared_ptr<ClassTable>(new ClassTable());
    ClassTable& t = *table;
    t.mode_ = static_cast<KeyMode>(r.get<std::uint8_t>());
    r.get<std::uint8_t>();
    t.m_ = r.get<std::uint16_t>();
    t.length_ = static_cast<int>(r.get<std::uint32_t>());
    std::uint32_t np = r.get<std::uint32_t>();
    if (np) {
      std::vector<double> probs(np);
      for (auto& d : probs) {
        std::uint64_t bits = r.get<std::uint64_t>();
        std::memcpy(&d, &bits, 8);
      }
      t.ensemble_ = Ensemble(std::move(probs));
    }
    t.num_classes_ = r.get<std::uint64_t>();
    const std::uint64_t ngroups = r.get<std::uint64_t>();
    t.class_counts_.resize(t.num_classes_ * static_cast<std::size_t>(t.m_));
    r.bytes(t.class_counts_.data(), t.class_counts_.size() * 2);
    t.gid_by_enum_.resize(t.num_classes_);
    r.bytes(t.gid_by_enum_.data(), t.gid_by_enum_.size() * 4);
    t.groups_.resize(ngroups);
    for (auto& g : t.groups_) {
      g.first_class = r.get<std::uint64_t>();
      g.num_classes = r.get<std::uint64_t>();
      std::uint32_t nb = r.get<std::uint32_t>();
      std::vector<std::uint8_t> blob(nb);
      r.bytes(blob.data(), nb);
      if (!blob.empty()) boost::multiprecision::import_bits(g.size, blob.begin(), blob.end(), 8, false);
    }
    t.finalize();  // recomputes cums/infos/tables and validates the total
    return table;
  }
};

void ClassTable::save(const std::string& path) const {
  auto buf = TableCacheIO::serialize(*this);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<ClassTable> ClassTable::load_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return TableCacheIO::deserialize(buf);
}

std::shared_ptr<ClassTable> try_load_cached_table(const std::string& key, int m, int length,
                                                  KeyMode mode, const Ensemble* ensemble) {
  const std::string path = cache_path(key);
  if (path.empty() || !std::filesystem::exists(path)) return nullptr;
  try {
    auto t = ClassTable::load_file(path);
    if (t->alphabet_size() != m || t->length() != length || t->mode() != mode) return nullptr;
    if (mode == KeyMode::model) {
      if (!t->ensemble() || !ensemble || !(*t->ensemble() == *ensemble)) return nullptr;
    }
    return t;
  } catch (const std::exception&) {
    return nullptr;  // corrupt or stale cache entries are rebuilt
  }
}

void try_save_cached_table(const std::string& key, const ClassTable& t) {
  const std::string path = cache_path(key);
  if (path.empty()) return;
  try {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    t.save(path);
  } catch (const std::exception&) {
    // caching is best-effort
  }
}

}  // namespace shapecode
