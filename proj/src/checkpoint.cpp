#include "biplink/checkpoint.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "serialize_impl.hpp"

namespace biplink {

namespace {

constexpr std::uint32_t kMagic = 0x4250434bu;  // "BPCK"
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  const std::string tmp = path + ".tmp";
  {
    serial::Writer w(tmp, "checkpoint");
    w.pod(kMagic);
    w.pod(kVersion);
    w.pod(static_cast<std::int64_t>(cp.next_iter));
    serial::write_state(w, cp.state);
    serial::write_output(w, cp.partial);
    w.os.flush();
    if (!w.os) throw std::runtime_error("checkpoint: write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

bool load_checkpoint(const std::string& path, Checkpoint& cp) {
  if (!std::filesystem::exists(path)) return false;
  serial::Reader r(path, "checkpoint");
  if (!r.is) r.fail("cannot open");
  std::uint32_t magic = 0, version = 0;
  r.pod(magic);
  r.pod(version);
  if (magic != kMagic) r.fail("not a checkpoint file");
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  std::int64_t next_iter = 0;
  r.pod(next_iter);
  cp.next_iter = static_cast<int>(next_iter);
  serial::read_state(r, cp.state);
  serial::read_output(r, cp.partial);
  return true;
}

}  // namespace biplink
