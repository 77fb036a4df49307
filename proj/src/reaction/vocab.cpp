//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/reaction/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "retrograph/chem/element.hpp"
#include "retrograph/error.hpp"

namespace retro::rxn {

SubstructureVocab::SubstructureVocab(std::vector<VocabEntry> entries): entries_(std::move(entries)) {
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(entries_[i].encoding, i).second)
      throw SyntaxError("duplicate vocabulary entry " + entries_[i].encoding);
    units_.push_back(make_unit(entries_[i].encoding));
  }
}

int SubstructureVocab::find(const std::string &encoding) const {
  auto it = index_.find(encoding);
  return it == index_.end() ? -1 : it->second;
}

void SubstructureVocab::write_tsv(const std::string &path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << "encoding\tanchor\tfrequency\n";
  for (const VocabEntry &e: entries_)
    out << e.encoding << '\t' << e.anchor << '\t' << e.frequency << '\n';
}

SubstructureVocab SubstructureVocab::read_tsv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<VocabEntry> entries;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (header) {
      header = false;
      if (line.rfind("encoding\t", 0) == 0)
        continue;
    }
    std::istringstream fields(line);
    VocabEntry e;
    std::string freq;
    if (!std::getline(fields, e.encoding, '\t') || !std::getline(fields, e.anchor, '\t')
        || !std::getline(fields, freq))
      throw SyntaxError("bad vocabulary line: " + line);
    e.frequency = std::stol(freq);
    entries.push_back(std::move(e));
  }
  return SubstructureVocab(std::move(entries));
}

std::vector<LabeledReaction> label_reactions(const std::vector<ReactionRecord> &records, ExtractionStats *stats) {
  ExtractionStats local;
  std::vector<LabeledReaction> out;
  for (const ReactionRecord &r: records) {
    CenterLabel label = extract_center_label(r);
    switch (label.kind) {
    case CenterKind::kBF:
      ++local.coverage.bf;
      break;
    case CenterKind::kBC:
      ++local.coverage.bc;
      break;
    case CenterKind::kA:
      ++local.coverage.a;
      break;
    case CenterKind::kUnsupported:
      ++local.coverage.unsupported;
      continue;
    }
    try {
      Trace trace = extract_trace(r, label);
      out.push_back({ r, std::move(label), std::move(trace) });
    } catch (const DecompositionError &) {
      ++local.decomposition_errors;
    } catch (const Error &) {
      ++local.other_errors;
    }
  }
  if (stats != nullptr)
    *stats = local;
  return out;
}

SubstructureVocab build_vocab(const std::vector<LabeledReaction> &labeled) {
  std::map<std::string, long> counts;
  for (const LabeledReaction &lr: labeled) {
    for (const TraceStep &s: lr.trace.steps) {
      if (s.attach)
        ++counts[s.encoding];
    }
  }
  std::vector<VocabEntry> entries;
  for (const auto &[enc, n]: counts) {
    Unit u = make_unit(enc);
    entries.push_back({ enc, std::string(chem::element_symbol(u.graph.atom(u.anchor).element)), n });
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const VocabEntry &a, const VocabEntry &b) { return a.frequency > b.frequency; });
  return SubstructureVocab(std::move(entries));
}

}  // namespace retro::rxn
