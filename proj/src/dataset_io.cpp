// Copyright (c) 2026 The ERFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "erfc/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "erfc/error.hpp"

namespace emo {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_or_throw(std::string_view s, const std::string &where) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: cannot parse \"{}\"", where, s));
  return v;
}

std::ifstream open_in(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(ErrorKind::kIo, "cannot open " + p.string());
  return in;
}

}  // namespace

void write_dataset(const std::filesystem::path &dir, const Dataset &ds) {
  std::filesystem::create_directories(dir);
  const std::size_t n = example_dim(ds.cfg, ds.dims);

  nlohmann::json meta;
  meta["format"] = "erfc-dataset/1";
  meta["window"] = to_json(ds.cfg);
  meta["dims"] = {{"text", ds.dims.text}, {"audio", ds.dims.audio}, {"speaker", ds.dims.speaker}};
  meta["x_dim"] = n;
  meta["class_order"] = class_names(ds.cfg.scheme);
  meta["n_examples"] = ds.examples.size();
  std::ofstream(dir / "meta.json", std::ios::binary) << meta.dump(2) << '\n';

  std::ofstream ex(dir / "examples.csv", std::ios::binary);
  ex << "conv_id,t";
  for (std::size_t j = 0; j < n; ++j) ex << ",x" << j;
  ex << '\n';
  std::ofstream tg(dir / "targets.csv", std::ios::binary);
  tg << "conv_id,t,slot,horizon,label\n";
  const auto names = class_names(ds.cfg.scheme);
  for (const auto &e : ds.examples) {
    std::string row = fmt::format("{},{}", e.conv_id, e.t);
    for (double v : e.x) fmt::format_to(std::back_inserter(row), ",{:.17g}", v);
    row.push_back('\n');
    ex << row;
    for (int slot = 0; slot < 2; ++slot)
      for (int h = 0; h <= ds.cfg.k; ++h) {
        const auto &target = e.targets[static_cast<std::size_t>(target_index(slot, h, ds.cfg.k))];
        tg << fmt::format("{},{},{},{},{}\n", e.conv_id, e.t, slot, h,
                          target ? names[static_cast<std::size_t>(*target)] : "MASK");
      }
  }
  if (!ex || !tg) throw ValidationError(ErrorKind::kIo, "failed writing dataset to " + dir.string());
}

Dataset read_dataset(const std::filesystem::path &dir) {
  Dataset ds;
  {
    auto in = open_in(dir / "meta.json");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
      if (meta.value("format", "") != "erfc-dataset/1")
        throw ValidationError(ErrorKind::kMalformedLine,
                              (dir / "meta.json").string() + ": not an erfc-dataset/1 document");
      ds.cfg = window_from_json(meta.at("window"));
      ds.dims.text = meta.at("dims").at("text").get<std::size_t>();
      ds.dims.audio = meta.at("dims").at("audio").get<std::size_t>();
      ds.dims.speaker = meta.at("dims").at("speaker").get<std::size_t>();
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}: {}", (dir / "meta.json").string(), e.what()));
    }
  }
  const std::size_t n = example_dim(ds.cfg, ds.dims);

  std::map<std::pair<std::string, int>, std::size_t> index;
  {
    auto in = open_in(dir / "examples.csv");
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::string where = fmt::format("{}:{}", (dir / "examples.csv").string(), line_no);
      auto fields = split(line);
      if (fields.size() != n + 2)
        throw ValidationError(ErrorKind::kDimensionMismatch,
                              fmt::format("{}: {} inputs, meta.json says {}", where,
                                          fields.size() - 2, n));
      Example e;
      e.conv_id = std::string(fields[0]);
      e.t = parse_or_throw<int>(fields[1], where);
      e.x.resize(n);
      for (std::size_t j = 0; j < n; ++j) e.x[j] = parse_or_throw<double>(fields[2 + j], where);
      e.targets.resize(static_cast<std::size_t>(ds.cfg.n_targets()));
      if (!index.emplace(std::make_pair(e.conv_id, e.t), ds.examples.size()).second)
        throw ValidationError(ErrorKind::kDuplicateKey, where + ": duplicate example key");
      ds.examples.push_back(std::move(e));
    }
  }
  {
    auto in = open_in(dir / "targets.csv");
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::string where = fmt::format("{}:{}", (dir / "targets.csv").string(), line_no);
      auto fields = split(line);
      if (fields.size() != 5)
        throw ValidationError(ErrorKind::kMalformedLine, where + ": expected 5 columns");
      auto it = index.find({std::string(fields[0]), parse_or_throw<int>(fields[1], where)});
      if (it == index.end())
        throw ValidationError(ErrorKind::kDanglingKey, where + ": target without example");
      const int slot = parse_or_throw<int>(fields[2], where);
      const int h = parse_or_throw<int>(fields[3], where);
      if (slot < 0 || slot > 1 || h < 0 || h > ds.cfg.k)
        throw ValidationError(ErrorKind::kMalformedLine, where + ": slot/horizon out of range");
      auto &target = ds.examples[it->second].targets[static_cast<std::size_t>(
          target_index(slot, h, ds.cfg.k))];
      if (fields[4] == "MASK") {
        target.reset();
        continue;
      }
      auto emotion = parse_emotion(fields[4]);
      if (!emotion || !valid_in(*emotion, ds.cfg.scheme))
        throw ValidationError(ErrorKind::kUnknownEmotion,
                              fmt::format("{}: label \"{}\" not in scheme", where, fields[4]));
      target = encode_emotion(*emotion, ds.cfg.scheme);
    }
  }
  return ds;
}

}  // namespace emo
