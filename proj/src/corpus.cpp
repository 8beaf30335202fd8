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

#include "erfc/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "erfc/error.hpp"

namespace emo {
namespace {

using nlohmann::json;

std::string where(std::string_view source, std::size_t line) {
  return fmt::format("{}:{}", source, line);
}

const json &require(const json &obj, const char *field, std::string_view source,
                    std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: missing field \"{}\"",
                                      where(source, line), field));
  return *it;
}

std::string require_string(const json &obj, const char *field,
                           std::string_view source, std::size_t line) {
  const json &v = require(obj, field, source, line);
  if (!v.is_string() || v.get_ref<const std::string &>().empty())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: field \"{}\" must be a non-empty string",
                                      where(source, line), field));
  return v.get<std::string>();
}

double require_number(const json &obj, const char *field, std::string_view source,
                      std::size_t line) {
  const json &v = require(obj, field, source, line);
  if (!v.is_number())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: field \"{}\" must be a number",
                                      where(source, line), field));
  return v.get<double>();
}

UtteranceRecord parse_record(const std::string &text, std::string_view source,
                             std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: invalid JSON ({})", where(source, line),
                                      e.what()));
  }
  if (!obj.is_object())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: expected a JSON object", where(source, line)));

  UtteranceRecord r;
  r.conv_id = require_string(obj, "conv_id", source, line);
  r.utt_id = require_string(obj, "utt_id", source, line);
  r.speaker = require_string(obj, "speaker", source, line);
  r.t_start = require_number(obj, "t_start", source, line);
  r.t_end = require_number(obj, "t_end", source, line);
  if (!std::isfinite(r.t_start) || !std::isfinite(r.t_end) || !(r.t_start < r.t_end))
    throw ValidationError(ErrorKind::kBadTimes,
                          fmt::format("{}: utterance {} needs t_start < t_end",
                                      where(source, line), r.utt_id));

  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string())
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}: field \"text\" must be a string or null",
                                        where(source, line)));
    r.text = it->get<std::string>();
  }

  const json &emo = require(obj, "emotion", source, line);
  if (!emo.is_string())
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}: field \"emotion\" must be a string",
                                      where(source, line)));
  auto parsed = parse_emotion(emo.get_ref<const std::string &>());
  if (!parsed)
    throw ValidationError(ErrorKind::kUnknownEmotion,
                          fmt::format("{}: unknown emotion label \"{}\"",
                                      where(source, line),
                                      emo.get_ref<const std::string &>()));
  r.emotion = *parsed;

  if (auto it = obj.find("avd"); it != obj.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3 ||
        !std::all_of(it->begin(), it->end(), [](const json &v) { return v.is_number(); }))
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}: field \"avd\" must be [a,v,d] or null",
                                        where(source, line)));
    AvdTriple avd{(*it)[0].get<double>(), (*it)[1].get<double>(),
                  (*it)[2].get<double>()};
    if (!avd.in_range())
      throw ValidationError(ErrorKind::kAvdOutOfRange,
                            fmt::format("{}: AVD of utterance {} outside [1,5]",
                                        where(source, line), r.utt_id));
    r.avd = avd;
  }
  return r;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_field(std::string_view s, T &out) {
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<Conversation> group_conversations(std::vector<UtteranceRecord> records) {
  std::map<std::string, std::vector<UtteranceRecord>> by_conv;
  for (auto &r : records) by_conv[r.conv_id].push_back(std::move(r));

  std::vector<Conversation> convs;
  convs.reserve(by_conv.size());
  for (auto &[conv_id, utts] : by_conv) {
    std::stable_sort(utts.begin(), utts.end(),
                     [](const UtteranceRecord &a, const UtteranceRecord &b) {
                       return a.t_start < b.t_start;
                     });
    std::set<std::string> ids;
    std::set<std::string> speakers;
    for (const auto &u : utts) {
      if (!ids.insert(u.utt_id).second)
        throw ValidationError(ErrorKind::kDuplicateUttId,
                              fmt::format("conversation {}: duplicate utt_id {}",
                                          conv_id, u.utt_id));
      speakers.insert(u.speaker);
    }
    if (speakers.size() != 2)
      throw ValidationError(ErrorKind::kNonDyadic,
                            fmt::format("conversation {}: non-dyadic conversation "
                                        "({} distinct speakers)",
                                        conv_id, speakers.size()));
    convs.push_back(Conversation{conv_id, std::move(utts)});
  }
  return convs;
}

std::vector<Conversation> parse_utterances(std::istream &in, std::string_view source) {
  std::vector<UtteranceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    records.push_back(parse_record(line, source, line_no));
  }
  if (records.empty())
    throw ValidationError(ErrorKind::kEmptyInput,
                          fmt::format("{}: no utterances", source));
  return group_conversations(std::move(records));
}

std::vector<Conversation> load_utterances(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError(ErrorKind::kIo,
                          fmt::format("cannot open utterance file {}", path.string()));
  return parse_utterances(in, path.string());
}

void write_utterances(std::ostream &out, const std::vector<Conversation> &convs) {
  for (const auto &conv : convs) {
    for (const auto &u : conv.utterances) {
      json obj;
      obj["conv_id"] = u.conv_id;
      obj["utt_id"] = u.utt_id;
      obj["speaker"] = u.speaker;
      obj["t_start"] = u.t_start;
      obj["t_end"] = u.t_end;
      obj["text"] = u.text ? json(*u.text) : json(nullptr);
      obj["emotion"] = std::string(emotion_name(u.emotion));
      if (u.avd)
        obj["avd"] = {u.avd->activation, u.avd->valence, u.avd->dominance};
      else
        obj["avd"] = nullptr;
      out << obj.dump() << '\n';
    }
  }
}

void save_utterances(const std::filesystem::path &path,
                     const std::vector<Conversation> &convs) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  write_utterances(out, convs);
}

std::size_t record_count(const std::vector<Conversation> &convs) {
  std::size_t n = 0;
  for (const auto &c : convs) n += c.utterances.size();
  return n;
}

int session_of(const std::string &conv_id, const std::map<std::string, int> &overrides) {
  if (auto it = overrides.find(conv_id); it != overrides.end()) return it->second;
  // SesNN followed by '_' or end.
  if (conv_id.size() >= 5 && conv_id.compare(0, 3, "Ses") == 0) {
    std::size_t end = 3;
    while (end < conv_id.size() && std::isdigit(static_cast<unsigned char>(conv_id[end])))
      ++end;
    if (end > 3 && (end == conv_id.size() || conv_id[end] == '_')) {
      int session = 0;
      if (parse_field(std::string_view(conv_id).substr(3, end - 3), session))
        return session;
    }
  }
  throw ValidationError(ErrorKind::kUnknownSession,
                        fmt::format("cannot derive session for conversation {}", conv_id));
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kText: return "text";
    case Modality::kAudio: return "audio";
    case Modality::kSpeaker: return "speaker";
  }
  return "?";
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "text") return Modality::kText;
  if (s == "audio") return Modality::kAudio;
  if (s == "speaker") return Modality::kSpeaker;
  return std::nullopt;
}

std::string to_string(const FeatureKey &key) {
  return fmt::format("({}, turn {}, slot {})", key.conv_id, key.turn, key.slot);
}

void FeatureStore::insert(const FeatureKey &key, std::span<const double> values) {
  if (values.size() != dim_)
    throw ValidationError(ErrorKind::kDimensionMismatch,
                          fmt::format("{} feature {} has {} values, expected {}",
                                      modality_name(modality_), to_string(key),
                                      values.size(), dim_));
  const std::size_t row = index_.size();
  if (!index_.emplace(key, row).second)
    throw ValidationError(ErrorKind::kDuplicateKey,
                          fmt::format("duplicate {} feature key {}",
                                      modality_name(modality_), to_string(key)));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::optional<std::span<const double>> FeatureStore::find(const FeatureKey &key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  if (dim_ == 0) return std::span<const double>();
  return std::span<const double>(values_.data() + it->second * dim_, dim_);
}

std::vector<FeatureKey> FeatureStore::keys() const {
  std::vector<FeatureKey> out;
  out.reserve(index_.size());
  for (const auto &[k, _] : index_) out.push_back(k);
  return out;
}

FeatureStore parse_features(std::istream &in, Modality modality, std::string_view source,
                            const std::set<FeatureKey> *known) {
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(ErrorKind::kEmptyInput,
                          fmt::format("{}: missing header", source));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "conv_id" || header[1] != "turn" ||
      header[2] != "slot")
    throw ValidationError(ErrorKind::kMalformedLine,
                          fmt::format("{}:1: header must start with conv_id,turn,slot",
                                      source));
  const std::size_t dim = header.size() - 3;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[3 + j] != fmt::format("f{}", j))
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}:1: expected column f{} but found \"{}\"",
                                        source, j, header[3 + j]));
  }

  FeatureStore store(modality, dim);
  std::vector<double> row(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() < 3)
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}: too few columns", where(source, line_no)));
    if (fields.size() != dim + 3)
      throw ValidationError(ErrorKind::kDimensionMismatch,
                            fmt::format("{}: {} features, expected {}",
                                        where(source, line_no), fields.size() - 3, dim));
    FeatureKey key{std::string(fields[0]), 0, 0};
    if (key.conv_id.empty() || !parse_field(fields[1], key.turn) ||
        !parse_field(fields[2], key.slot) || key.turn < 0 || key.slot < 0 || key.slot > 1)
      throw ValidationError(ErrorKind::kMalformedLine,
                            fmt::format("{}: bad key columns", where(source, line_no)));
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_field(fields[3 + j], row[j]))
        throw ValidationError(ErrorKind::kMalformedLine,
                              fmt::format("{}: column f{} is not a number",
                                          where(source, line_no), j));
      if (!std::isfinite(row[j]))
        throw ValidationError(ErrorKind::kNonFinite,
                              fmt::format("{}: column f{} is not finite",
                                          where(source, line_no), j));
    }
    if (known && !known->count(key))
      throw ValidationError(ErrorKind::kDanglingKey,
                            fmt::format("{}: feature row {} has no matching turn",
                                        where(source, line_no), to_string(key)));
    try {
      store.insert(key, row);
    } catch (const ValidationError &e) {
      throw ValidationError(e.kind(), fmt::format("{}: {}", where(source, line_no), e.what()));
    }
  }
  return store;
}

FeatureStore load_features(const std::filesystem::path &path, Modality modality,
                           const std::set<FeatureKey> *known) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError(ErrorKind::kIo,
                          fmt::format("cannot open feature file {}", path.string()));
  return parse_features(in, modality, path.string(), known);
}

void validate_keys(const FeatureStore &store, const std::set<FeatureKey> &known) {
  for (const auto &key : store.keys()) {
    if (!known.count(key))
      throw ValidationError(ErrorKind::kDanglingKey,
                            fmt::format("{} feature row {} has no matching turn",
                                        modality_name(store.modality()), to_string(key)));
  }
}

void write_features(std::ostream &out, const FeatureStore &store) {
  out << "conv_id,turn,slot";
  for (std::size_t j = 0; j < store.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (const auto &key : store.keys()) {
    auto values = *store.find(key);
    std::string row = fmt::format("{},{},{}", key.conv_id, key.turn, key.slot);
    for (double v : values) fmt::format_to(std::back_inserter(row), ",{:.9g}", v);
    row.push_back('\n');
    out << row;
  }
}

void save_features(const std::filesystem::path &path, const FeatureStore &store) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  write_features(out, store);
}

}  // namespace emo
