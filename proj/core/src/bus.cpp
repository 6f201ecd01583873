#include "f3b/bus.hpp"

namespace f3b {

namespace {

void write_header(ByteWriter& w, const Record& r) {
  w.u8(kRecordVersion);
  w.u8(static_cast<std::uint8_t>(r.type));
  w.u32(r.from);
  w.u32(r.to);
  w.u64(r.epoch);
  w.blob(r.payload);
}

}  // namespace

Bytes Record::signed_bytes() const {
  ByteWriter w;
  write_header(w, *this);
  return std::move(w).take();
}

Bytes Record::serialize() const {
  ByteWriter w;
  write_header(w, *this);
  w.raw(signature);
  return std::move(w).take();
}

Record Record::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() != kRecordVersion) throw DecodeError("unknown record version");
  Record rec;
  auto type = r.u8();
  if (type < 1 || type > static_cast<std::uint8_t>(MessageType::kKeyBatch)) throw DecodeError("unknown record type");
  rec.type = static_cast<MessageType>(type);
  rec.from = r.u32();
  rec.to = r.u32();
  rec.epoch = r.u64();
  rec.payload = r.blob();
  rec.signature = r.fixed<kSignatureBytes>();
  r.expect_done();
  return rec;
}

void Bus::send(const Record& record) {
  in_flight_.push_back(record.serialize());
  stats_.records++;
  stats_.bytes += in_flight_.back().size();
}

std::vector<Record> Bus::deliver() {
  now_ms_ += delay_ms_;
  stats_.hops++;
  std::vector<Record> out;
  out.reserve(in_flight_.size());
  for (const auto& wire : in_flight_) {
    Record rec;
    try {
      rec = Record::deserialize(wire);
    } catch (const DecodeError&) {
      stats_.rejected++;
      continue;
    }
    auto key = keys_.find(rec.from);
    if (key == keys_.end() || !verify_signature(key->second, rec.signed_bytes(), rec.signature)) {
      stats_.rejected++;
      continue;
    }
    out.push_back(std::move(rec));
  }
  in_flight_.clear();
  return out;
}

}  // namespace f3b
