//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_REACTION_VOCAB_HPP_
#define RETROGRAPH_REACTION_VOCAB_HPP_

#include <map>
#include <string>
#include <vector>

#include "retrograph/reaction/reaction.hpp"
#include "retrograph/reaction/trace.hpp"

namespace retro::rxn {

struct VocabEntry {
  std::string encoding;
  std::string anchor;  // element symbol of the anchor atom
  long frequency = 0;
};

class SubstructureVocab {
public:
  SubstructureVocab() = default;
  explicit SubstructureVocab(std::vector<VocabEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const VocabEntry &entry(int id) const { return entries_[id]; }
  const std::vector<VocabEntry> &entries() const { return entries_; }
  const Unit &unit(int id) const { return units_[id]; }
  // -1 when absent.
  int find(const std::string &encoding) const;

  void write_tsv(const std::string &path) const;
  static SubstructureVocab read_tsv(const std::string &path);

private:
  std::vector<VocabEntry> entries_;
  std::vector<Unit> units_;
  std::map<std::string, int> index_;
};

// A record ready for training: label, trace and the record itself.
struct LabeledReaction {
  ReactionRecord record;
  CenterLabel label;
  Trace trace;
};

struct ExtractionStats {
  CoverageStats coverage;
  int decomposition_errors = 0;
  int other_errors = 0;
};

// Labels and traces for every supported record that decomposes cleanly.
std::vector<LabeledReaction> label_reactions(const std::vector<ReactionRecord> &records,
                                             ExtractionStats *stats = nullptr);

// Entries ordered by decreasing frequency, then encoding.
SubstructureVocab build_vocab(const std::vector<LabeledReaction> &labeled);

}  // namespace retro::rxn

#endif  // RETROGRAPH_REACTION_VOCAB_HPP_
