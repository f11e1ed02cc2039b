#include "tgc/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tgc/errors.hpp"

namespace tgc {

namespace {

constexpr char kMagic[4] = {'T', 'G', 'F', '1'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw FormatError("snapshot truncated");
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos]) |
                                              (static_cast<unsigned char>(buf[pos + 1]) << 8));
    pos += 2;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string ascii(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void write_snapshot(const std::string& path,
                    const std::vector<std::pair<std::string, Field>>& fields) {
  if (fields.empty()) throw InvalidArgument("write_snapshot: no fields");
  const Domain& domain = fields.front().second.domain();
  for (const auto& [name, field] : fields) {
    if (!(field.domain() == domain)) throw DomainMismatch("snapshot fields");
    if (name.empty() || name.size() > 0xffff)
      throw InvalidArgument("write_snapshot: bad field name length");
  }
  if (fields.size() > 0xffff) throw InvalidArgument("write_snapshot: too many fields");

  std::string buf;
  buf.append(kMagic, 4);
  put_u16(buf, kVersion);
  put_u16(buf, static_cast<std::uint16_t>(domain.dim));
  for (int axis = 0; axis < domain.dim; ++axis)
    put_u64(buf, static_cast<std::uint64_t>(domain.cells[axis]));
  put_u16(buf, static_cast<std::uint16_t>(fields.size()));
  for (const auto& [name, field] : fields) {
    put_u16(buf, static_cast<std::uint16_t>(name.size()));
    buf.append(name);
  }
  for (const auto& [name, field] : fields)
    for (std::int64_t i = 0; i < field.size(); ++i) put_f64(buf, field[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Reader r{buf};
  r.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw FormatError("bad magic, expected \"TGF1\"");
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version));

  SnapshotData data;
  data.dim = r.u16();
  if (data.dim != 1 && data.dim != 2)
    throw FormatError("snapshot dim " + std::to_string(data.dim));
  for (int axis = 0; axis < data.dim; ++axis) data.cells.push_back(r.u64());

  const std::uint16_t count = r.u16();
  std::vector<std::string> names;
  for (std::uint16_t f = 0; f < count; ++f) {
    const std::uint16_t len = r.u16();
    names.push_back(r.ascii(len));
  }
  const std::uint64_t m = data.cell_count();
  for (std::uint16_t f = 0; f < count; ++f) {
    std::vector<double> values(m);
    for (std::uint64_t i = 0; i < m; ++i) values[i] = r.f64();
    data.fields.emplace_back(std::move(names[f]), std::move(values));
  }
  if (r.pos != buf.size()) throw FormatError("trailing bytes after snapshot payload");
  return data;
}

std::vector<std::pair<std::string, Field>> bind_snapshot(const SnapshotData& data,
                                                         const Domain& domain) {
  if (data.dim != domain.dim) throw FormatError("snapshot/domain dimension mismatch");
  for (int axis = 0; axis < domain.dim; ++axis)
    if (static_cast<std::int64_t>(data.cells[axis]) != domain.cells[axis])
      throw FormatError("snapshot/domain cell mismatch on axis " + std::to_string(axis));

  std::vector<std::pair<std::string, Field>> out;
  for (const auto& [name, values] : data.fields) {
    Field f(domain);
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] = values[static_cast<std::size_t>(i)];
    out.emplace_back(name, std::move(f));
  }
  return out;
}

}  // namespace tgc
