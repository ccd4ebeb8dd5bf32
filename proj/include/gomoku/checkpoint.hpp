// Copyright 2026 The gomoku-zero Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Checkpoint container, little-endian throughout:
//
//   offset  size  field
//   0       8     magic "GZCKPT\0\0"
//   8       4     u32 format version (kCheckpointVersion)
//   12      8     u64 header length L
//   20      L     UTF-8 JSON header:
//                   {"board":{...}, "arch":{...},
//                    "tensors":[{"name","rows","cols","offset"}...],
//                    "optimizer":{"step","beta1","beta2","epsilon"} | null,
//                    "extra":{...}}
//   20+L    4*P   float32 parameters; tensor k starts at float index offset_k
//                 and is stored row-major. With optimizer state present, the
//                 Adam first and second moments follow, P floats each.
//   end-4   4     u32 CRC-32 (zlib) of every preceding byte

#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gomoku/network.hpp"

namespace gomoku {

inline constexpr std::array<char, 8> kCheckpointMagic = {'G', 'Z', 'C', 'K', 'P', 'T', '\0', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  BoardConfig board;
  PolicyValueNet<float> net;
  std::optional<AdamState<float>> optimizer;
  nlohmann::json extra = nlohmann::json::object();
};

namespace detail {

template <class U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xffu));
}

template <class U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

inline void put_floats(std::vector<unsigned char>& out, std::span<const float> values) {
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_le(out, bits);
  }
}

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const BoardConfig& board,
                            const PolicyValueNet<float>& net, const AdamState<float>* optimizer = nullptr,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  if (net.arch().height != board.height || net.arch().width != board.width) {
    throw DimensionError("network and board dimensions disagree");
  }
  nlohmann::json header;
  header["board"] = {{"height", board.height}, {"width", board.width}, {"n_in_row", board.n_in_row}};
  header["arch"] = net.arch().to_json();
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : net.layout()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
  }
  header["tensors"] = std::move(tensors);
  const bool with_opt = optimizer != nullptr && optimizer->m.size() == net.num_params();
  header["optimizer"] = with_opt ? nlohmann::json{{"step", optimizer->step},
                                                  {"beta1", optimizer->beta1},
                                                  {"beta2", optimizer->beta2},
                                                  {"epsilon", optimizer->epsilon}}
                                 : nlohmann::json(nullptr);
  header["extra"] = extra;
  const std::string text = header.dump();

  std::vector<unsigned char> buf(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_le<std::uint32_t>(buf, kCheckpointVersion);
  detail::put_le<std::uint64_t>(buf, text.size());
  buf.insert(buf.end(), text.begin(), text.end());
  detail::put_floats(buf, net.params());
  if (with_opt) {
    detail::put_floats(buf, optimizer->m);
    detail::put_floats(buf, optimizer->v);
  }
  detail::put_le<std::uint32_t>(buf, detail::crc32_of(buf.data(), buf.size()));

  // Write to a sibling temp file first so a crash never leaves a torn file.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// Reads a checkpoint. When `expected_board` is given, a checkpoint for a
// different board is rejected with Kind::ArchitectureMismatch.
inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  const std::optional<BoardConfig>& expected_board = std::nullopt) {
  using Kind = CheckpointError::Kind;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw CheckpointError(Kind::NotFound, "checkpoint not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::NotFound, "cannot open checkpoint: " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto corrupt = [&](const std::string& why) {
    return CheckpointError(Kind::Corrupt, "corrupt checkpoint " + path.string() + ": " + why);
  };
  constexpr std::size_t kFixed = 8 + 4 + 8;
  if (buf.size() < kFixed + 4) throw corrupt("file too short");
  if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), buf.begin())) throw corrupt("bad magic");
  const auto version = detail::get_le<std::uint32_t>(buf.data() + 8);
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::VersionMismatch, "checkpoint format version " + std::to_string(version) +
                                                     ", expected " + std::to_string(kCheckpointVersion));
  }
  const auto stored_crc = detail::get_le<std::uint32_t>(buf.data() + buf.size() - 4);
  if (detail::crc32_of(buf.data(), buf.size() - 4) != stored_crc) throw corrupt("checksum mismatch");
  const auto header_len = detail::get_le<std::uint64_t>(buf.data() + 12);
  if (header_len > buf.size() - kFixed - 4) throw corrupt("header length exceeds file");

  nlohmann::json header;
  BoardConfig board;
  NetworkArch arch;
  try {
    header = nlohmann::json::parse(buf.begin() + kFixed, buf.begin() + static_cast<std::ptrdiff_t>(kFixed + header_len));
    const auto& b = header.at("board");
    board = {b.at("height").get<int>(), b.at("width").get<int>(), b.at("n_in_row").get<int>()};
    arch = NetworkArch::from_json(header.at("arch"));
    board.validate();
    arch.validate();
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("bad header: ") + e.what());
  } catch (const ConfigError& e) {
    throw corrupt(std::string("bad header: ") + e.what());
  }
  if (expected_board && !(*expected_board == board)) {
    throw CheckpointError(Kind::ArchitectureMismatch, "checkpoint is for a " + board.to_string() +
                                                          " board, engine is configured for " +
                                                          expected_board->to_string());
  }

  Checkpoint ck{board, PolicyValueNet<float>(arch), std::nullopt, header.value("extra", nlohmann::json::object())};
  const auto& layout = ck.net.layout();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != layout.size()) throw corrupt("tensor table does not match architecture");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto& t = tensors[k];
    if (t.value("name", "") != layout[k].name || t.value("rows", -1) != layout[k].rows ||
        t.value("cols", -1) != layout[k].cols || t.value("offset", std::size_t{0}) != layout[k].offset) {
      throw corrupt("tensor " + layout[k].name + " does not match architecture");
    }
  }
  const std::size_t p = ck.net.num_params();
  const bool has_opt = header.contains("optimizer") && !header["optimizer"].is_null();
  const std::size_t expected_body = 4 * p * (has_opt ? 3 : 1);
  if (buf.size() - kFixed - header_len - 4 != expected_body) throw corrupt("payload size mismatch");

  const unsigned char* cursor = buf.data() + kFixed + header_len;
  const auto read_floats = [&](std::span<float> dst) {
    for (float& f : dst) {
      const auto bits = detail::get_le<std::uint32_t>(cursor);
      std::memcpy(&f, &bits, sizeof f);
      cursor += 4;
    }
  };
  read_floats(ck.net.params());
  if (has_opt) {
    AdamState<float> opt;
    const auto& o = header["optimizer"];
    opt.step = o.value("step", std::int64_t{0});
    opt.beta1 = o.value("beta1", 0.9);
    opt.beta2 = o.value("beta2", 0.999);
    opt.epsilon = o.value("epsilon", 1e-8);
    opt.m.resize(p);
    opt.v.resize(p);
    read_floats(opt.m);
    read_floats(opt.v);
    ck.optimizer = std::move(opt);
  }
  return ck;
}

}  // namespace gomoku
