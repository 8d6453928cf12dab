#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jreal/calculus.hpp"
#include "jreal/realiser.hpp"

namespace jreal {

// Proof search, decomposition, annotation and realisation of one formula,
// with every output re-validated.
struct PipelineResult {
    enum Status { Ok, Unknown, Failed } status = Failed;
    std::optional<Derivation> proof;      // as found by search
    std::optional<Derivation> annotated;  // decomposed and annotated
    std::optional<Realised> realised;
    bool cert_ok = false;
    bool roundtrip_ok = false;
    bool normal_ok = false;
    std::string error;
    double ms = 0;
};

struct PipelineOptions {
    int depth = 12;
    int glue_budget = 2000;
    int seed = 0;
};

PipelineResult run_pipeline(const Fm& f, Logic l, const PipelineOptions& o = {});
// From an existing unannotated (or annotated) proof.
PipelineResult realise_derivation(const Derivation& d, const PipelineOptions& o = {});

// Corpus files: one formula per line, optionally prefixed by "LOGIC:".
// Blank lines and lines starting with '%' are skipped.
struct CorpusEntry {
    int line;
    Logic logic;
    std::string text;
};
std::vector<CorpusEntry> read_corpus(std::istream& in, Logic dflt);

// JREAL_SEED, or 0.
int env_seed();

}  // namespace jreal
