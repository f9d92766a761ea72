#pragma once

#include <stdexcept>
#include <string>

#include "synth/models.hpp"
#include "synth/search.hpp"
#include "synth/spec.hpp"

namespace synth {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Specs serialize with the signature in declaration form and every example's
// buffer contents inline, so a run can be reproduced without the oracle.
std::string spec_to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const std::string& text);

// Both models travel in one file; training always produces the pair.
std::string models_to_json(const IidModel& iid, const MarkovModel& markov);
void models_from_json(const std::string& text, IidModel& iid, MarkovModel& markov);

// Reports keep the solution's sequence notation and printed forms, not the
// function object; a reloaded report answers "was it solved, at what cost".
std::string report_to_json(const SynthesisReport& rep, const Signature& sig);
SynthesisReport report_from_json(const std::string& text, const Signature& sig);

// One record per line: "<signature> ⊢ <fragment sequence>".
std::string corpus_to_text(const TrainingCorpus& corpus);
TrainingCorpus corpus_from_text(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

}  // namespace synth
