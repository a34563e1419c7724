#include "styleforge/pipeline/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "styleforge/error.hpp"

namespace styleforge::pipeline {

namespace {

void check_record(const Record& r) {
  if (r.id.empty()) throw InvalidArgument("manifest record without id");
  if (r.path.empty()) throw InvalidArgument("manifest record '" + r.id + "' without path");
  if (r.source == Source::Real) {
    if (!r.label) throw InvalidArgument("real record '" + r.id + "' needs a class label");
    if (r.provenance || r.pseudo_label || r.score) {
      throw InvalidArgument("real record '" + r.id + "' cannot carry provenance or a pseudo-label");
    }
  } else {
    if (!r.provenance) throw InvalidArgument("synthetic record '" + r.id + "' needs provenance");
    if (r.label) throw InvalidArgument("synthetic record '" + r.id + "' cannot carry a real class label");
    if (r.pseudo_label.has_value() != r.score.has_value()) {
      throw InvalidArgument("synthetic record '" + r.id + "' needs pseudo_label and score together");
    }
  }
}

nlohmann::ordered_json record_json(const Record& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["path"] = r.path;
  j["source"] = r.source == Source::Real ? "real" : "synthetic";
  if (r.label) j["label"] = label_name(*r.label);
  if (r.pseudo_label) j["pseudo_label"] = label_name(*r.pseudo_label);
  if (r.score) j["score"] = *r.score;
  if (r.provenance) {
    j["provenance"] = {{"content_id", r.provenance->content_id},
                       {"style_id", r.provenance->style_id},
                       {"seed", r.provenance->seed}};
  }
  return j;
}

Label label_from(const nlohmann::json& j, const char* key) {
  const auto name = j.at(key).get<std::string>();
  const auto label = parse_label(name);
  if (!label) throw InvalidArgument("unknown label '" + name + "'");
  return *label;
}

Record record_from(const nlohmann::json& j) {
  Record r;
  r.id = j.at("id").get<std::string>();
  r.path = j.at("path").get<std::string>();
  const auto source = j.at("source").get<std::string>();
  if (source == "real") {
    r.source = Source::Real;
  } else if (source == "synthetic") {
    r.source = Source::Synthetic;
  } else {
    throw InvalidArgument("unknown source '" + source + "' in record '" + r.id + "'");
  }
  if (j.contains("label")) r.label = label_from(j, "label");
  if (j.contains("pseudo_label")) r.pseudo_label = label_from(j, "pseudo_label");
  if (j.contains("score")) r.score = j.at("score").get<double>();
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    r.provenance = SourcePair{p.at("content_id").get<std::string>(), p.at("style_id").get<std::string>(),
                              p.at("seed").get<std::uint64_t>()};
  }
  return r;
}

}  // namespace

void DatasetManifest::append(Record record) {
  check_record(record);
  if (contains(record.id)) throw InvalidArgument("duplicate manifest id '" + record.id + "'");
  index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

void DatasetManifest::set_pseudo_label(std::string_view id, Label label, double score) {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidArgument("unknown manifest id '" + std::string(id) + "'");
  Record& r = records_[it->second];
  if (r.source == Source::Real) throw InvalidArgument("real record '" + r.id + "' is immutable");
  r.pseudo_label = label;
  r.score = score;
}

bool DatasetManifest::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const Record& DatasetManifest::at(std::string_view id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidArgument("unknown manifest id '" + std::string(id) + "'");
  return records_[it->second];
}

std::vector<const Record*> DatasetManifest::with_source(Source source) const {
  std::vector<const Record*> out;
  for (const auto& r : records_) {
    if (r.source == source) out.push_back(&r);
  }
  return out;
}

std::vector<const Record*> DatasetManifest::real_with_label(Label label) const {
  std::vector<const Record*> out;
  for (const auto& r : records_) {
    if (r.source == Source::Real && r.label == label) out.push_back(&r);
  }
  return out;
}

std::string DatasetManifest::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) out += record_json(r).dump() + "\n";
  return out;
}

DatasetManifest DatasetManifest::from_jsonl(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      m.append(record_from(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_jsonl();
  if (!out) throw IoError("short write to " + path.string());
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

std::vector<Sample> load_samples(const std::filesystem::path& root, const std::vector<const Record*>& records) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const Record* r : records) {
    const auto label = r->training_label();
    if (!label) throw InvalidArgument("record '" + r->id + "' has no label to train on");
    out.push_back({r->id, read_png(root / r->path), *label});
  }
  return out;
}

}  // namespace styleforge::pipeline
