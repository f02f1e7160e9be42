#include "driftwatch/registry.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "driftwatch/errors.hpp"
#include "driftwatch/sha256.hpp"

namespace driftwatch {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t ClassifierStore::put(ClassifierRecord record) {
  record.id = next_id_++;
  key_norms_.push_back(record.key.norm());
  records_.push_back(std::move(record));
  return records_.back().id;
}

std::vector<const ClassifierRecord*> ClassifierStore::recent(
    std::size_t n) const {
  std::vector<const ClassifierRecord*> out;
  const std::size_t take = std::min(n, records_.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(&records_[records_.size() - 1 - i]);
  }
  return out;
}

std::vector<const ClassifierRecord*> ClassifierStore::relevant(
    const SparseVector& query, std::size_t k) const {
  const double qn = query.norm();
  std::vector<double> dist(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (qn == 0.0 || key_norms_[i] == 0.0) {
      dist[i] = 1.0;
    } else {
      const double c =
          std::clamp(query.dot(records_[i].key) / (qn * key_norms_[i]), -1.0, 1.0);
      dist[i] = 1.0 - c;
    }
  }
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dist[a] != dist[b]) return dist[a] < dist[b];
                      return records_[a].id > records_[b].id;
                    });
  std::vector<const ClassifierRecord*> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(&records_[order[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Persistence. Every floating-point value is written as C99 hex-float text,
// which round-trips bit-exactly.

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kChecksums = "SHA256SUMS";

std::string hexf(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hexf(const std::string& s, const std::string& file) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError(file + ": bad number '" + s + "'");
  }
  return v;
}

std::string weights_file_name(std::uint64_t id) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "weights_%06llu.txt",
                static_cast<unsigned long long>(id));
  return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << bytes;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.filename().string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json hyper_to_json(const Hyper& h) {
  return json{{"lr", hexf(h.lr)},
              {"l2", hexf(h.l2)},
              {"epochs", h.epochs},
              {"update_epochs", h.update_epochs},
              {"update_lr", hexf(h.update_lr)},
              {"seed", h.seed},
              {"holdout_fraction", hexf(h.holdout_fraction)}};
}

Hyper hyper_from_json(const json& j) {
  Hyper h;
  h.lr = parse_hexf(j.at("lr").get<std::string>(), kManifest);
  h.l2 = parse_hexf(j.at("l2").get<std::string>(), kManifest);
  h.epochs = j.at("epochs").get<int>();
  h.update_epochs = j.at("update_epochs").get<int>();
  h.update_lr = parse_hexf(j.at("update_lr").get<std::string>(), kManifest);
  h.seed = j.at("seed").get<std::uint64_t>();
  h.holdout_fraction =
      parse_hexf(j.at("holdout_fraction").get<std::string>(), kManifest);
  return h;
}

}  // namespace

void ClassifierStore::save(const fs::path& dir) const {
  fs::create_directories(dir);
  std::map<std::string, std::string> files;  // name -> bytes

  json manifest;
  manifest["format"] = "driftwatch-classifier-store";
  manifest["version"] = 1;
  manifest["next_id"] = next_id_;
  manifest["records"] = json::array();
  for (const auto& r : records_) {
    const std::string wf = weights_file_name(r.id);
    json key_entries = json::array();
    for (const auto& [i, w] : r.key.entries) key_entries.push_back({i, hexf(w)});
    json val = json::array();
    for (const auto& [w, f] : r.model.val_history) val.push_back({w, hexf(f)});
    manifest["records"].push_back(
        {{"id", r.id},
         {"kind", std::string(to_string(r.model.kind))},
         {"dim", r.model.dim()},
         {"bias", hexf(r.model.bias)},
         {"trained_window", r.model.trained_window},
         {"created_window", r.created_window},
         {"created_at", r.created_at},
         {"hyper", hyper_to_json(r.model.hyper)},
         {"val_history", std::move(val)},
         {"key", {{"dim", r.key.dim}, {"entries", std::move(key_entries)}}},
         {"weights_file", wf}});

    // Sparse: "<index> <hex-float>" for every weight that is not +0.0.
    std::string body;
    for (std::size_t i = 0; i < r.model.weights.size(); ++i) {
      const double w = r.model.weights[i];
      if (w == 0.0 && !std::signbit(w)) continue;
      body += std::to_string(i);
      body += ' ';
      body += hexf(w);
      body += '\n';
    }
    files.emplace(wf, std::move(body));
  }
  files.emplace(kManifest, manifest.dump(1) + "\n");

  std::string sums;
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    sums += sha256_hex(bytes) + "  " + name + "\n";
  }
  write_file(dir / kChecksums, sums);
}

ClassifierStore ClassifierStore::load(const fs::path& dir) {
  if (!fs::exists(dir / kChecksums)) {
    throw DataError(std::string(kChecksums) + " missing in " + dir.string());
  }
  std::map<std::string, std::string> expected;
  {
    std::istringstream in(read_file(dir / kChecksums));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto sep = line.find("  ");
      if (sep != 64 || line.size() <= sep + 2) {
        throw DataError(std::string(kChecksums) + ": malformed line");
      }
      expected[line.substr(sep + 2)] = line.substr(0, sep);
    }
  }

  auto verified = [&](const std::string& name) {
    auto it = expected.find(name);
    if (it == expected.end()) {
      throw DataError(name + ": not listed in " + kChecksums);
    }
    if (!fs::exists(dir / name)) throw DataError(name + ": missing");
    std::string bytes = read_file(dir / name);
    if (sha256_hex(bytes) != it->second) {
      throw DataError(name + ": checksum mismatch");
    }
    return bytes;
  };

  json manifest;
  try {
    manifest = json::parse(verified(kManifest));
  } catch (const json::exception& e) {
    throw DataError(std::string(kManifest) + ": " + e.what());
  }

  ClassifierStore store;
  try {
    if (manifest.at("format") != "driftwatch-classifier-store" ||
        manifest.at("version") != 1) {
      throw DataError(std::string(kManifest) + ": unsupported format");
    }
    std::uint64_t prev_id = 0;
    bool first = true;
    for (const auto& jr : manifest.at("records")) {
      ClassifierRecord r;
      r.id = jr.at("id").get<std::uint64_t>();
      if (!first && r.id <= prev_id) {
        throw DataError(std::string(kManifest) + ": ids not increasing");
      }
      first = false;
      prev_id = r.id;
      r.model.kind = learner_kind_from_string(jr.at("kind").get<std::string>());
      const auto dim = jr.at("dim").get<std::uint32_t>();
      r.model.bias = parse_hexf(jr.at("bias").get<std::string>(), kManifest);
      r.model.trained_window = jr.at("trained_window").get<int>();
      r.model.hyper = hyper_from_json(jr.at("hyper"));
      for (const auto& v : jr.at("val_history")) {
        r.model.val_history.emplace_back(
            v.at(0).get<int>(), parse_hexf(v.at(1).get<std::string>(), kManifest));
      }
      r.created_window = jr.at("created_window").get<int>();
      r.created_at = jr.at("created_at").get<Timestamp>();
      r.key.dim = jr.at("key").at("dim").get<std::uint32_t>();
      for (const auto& e : jr.at("key").at("entries")) {
        r.key.entries.emplace_back(
            e.at(0).get<std::uint32_t>(),
            parse_hexf(e.at(1).get<std::string>(), kManifest));
      }

      const auto wf = jr.at("weights_file").get<std::string>();
      std::istringstream in(verified(wf));
      std::string line;
      r.model.weights.assign(dim, 0.0);
      std::size_t prev = 0;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw DataError(wf + ": bad line '" + line + "'");
        std::size_t idx = 0;
        const auto head = line.substr(0, sp);
        const auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc{} || p != head.data() + head.size() || idx >= dim ||
            (!first && idx <= prev)) {
          throw DataError(wf + ": bad weight index '" + head + "'");
        }
        r.model.weights[idx] = parse_hexf(line.substr(sp + 1), wf);
        prev = idx;
        first = false;
      }
      store.key_norms_.push_back(r.key.norm());
      store.records_.push_back(std::move(r));
    }
    store.next_id_ = manifest.at("next_id").get<std::uint64_t>();
    if (!store.records_.empty() && store.next_id_ <= store.records_.back().id) {
      throw DataError(std::string(kManifest) + ": next_id too small");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string(kManifest) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string(kManifest) + ": " + e.what());
  }
  return store;
}

}  // namespace driftwatch
