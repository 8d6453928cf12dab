#include "jreal/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <istream>

#include "jreal/parser.hpp"

namespace jreal {

PipelineResult realise_derivation(const Derivation& d, const PipelineOptions& o) {
    PipelineResult res;
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&]() -> PipelineResult& {
        res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };
    res.proof = d;
    try {
        Derivation a = is_annotated(d.conclusion) && !contains_rule(d, Rule::ImpL)
                           ? d
                           : annotate_proof(decompose_impL(erase(d)), o.seed);
        res.annotated = a;
        if (auto cr = check_proof(a, d.logic); !cr) {
            res.error = "annotated proof rejected: " + cr.error;
            return done();
        }
        Realised r = realise_proof(a, d.logic, o.glue_budget);
        Fm target = fm(a.conclusion);
        res.cert_ok = equal(check(r.certificate), r.formula);
        res.roundtrip_ok = compare(forget(r.formula), erase(target)) == 0;
        res.normal_ok = normal_realisation(r.r, target, &res.error);
        res.realised = std::move(r);
        res.status = res.cert_ok && res.roundtrip_ok && res.normal_ok ? PipelineResult::Ok : PipelineResult::Failed;
        if (res.status == PipelineResult::Failed && res.error.empty()) res.error = "validation failed";
    } catch (const GlueBudgetExceeded& e) {
        res.status = PipelineResult::Unknown;
        res.error = e.what();
    } catch (const std::exception& e) {
        res.status = PipelineResult::Failed;
        res.error = e.what();
    }
    return done();
}

PipelineResult run_pipeline(const Fm& f, Logic l, const PipelineOptions& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto d = search(erase(f), l, o.depth);
    PipelineResult res;
    if (!d) {
        res.status = PipelineResult::Unknown;
        res.error = "no proof within depth " + std::to_string(o.depth);
    } else {
        res = realise_derivation(*d, o);
    }
    res.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<CorpusEntry> read_corpus(std::istream& in, Logic dflt) {
    std::vector<CorpusEntry> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '%') continue;
        line = line.substr(b);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        CorpusEntry e{n, dflt, line};
        size_t c = line.find(':');
        if (c != std::string::npos) {
            std::string head = line.substr(0, c);
            try {
                e.logic = logic_from_name(head);
                e.text = line.substr(line.find_first_not_of(' ', c + 1));
            } catch (const std::exception&) {
                throw ParseError("unknown logic '" + head + "'", n, 1);
            }
        }
        out.push_back(e);
    }
    return out;
}

int env_seed() {
    const char* s = std::getenv("JREAL_SEED");
    if (!s || !*s) return 0;
    return std::atoi(s);
}

}  // namespace jreal
