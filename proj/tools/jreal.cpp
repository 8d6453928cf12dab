#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "jreal/calculus.hpp"
#include "jreal/jl_hilbert.hpp"
#include "jreal/parser.hpp"
#include "jreal/pipeline.hpp"
#include "jreal/realiser.hpp"

using namespace jreal;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUnknown = 2, kInternal = 3 };

struct Unknown : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Invalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Opts {
    std::string logic = "ik";
    bool logic_set = false;
    int depth = 12;
    int glue_budget = 2000;
    std::string emit;
    std::string format = "text";
    std::string arg;
};

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw Invalid("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    std::string text = slurp(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line/column
        int line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(std::string("malformed JSON (") + e.what() + ")", line, col);
    }
}

void emit(const Opts& o, const json& j) {
    if (o.emit.empty()) return;
    std::ofstream out(o.emit);
    if (!out) throw Invalid("cannot write " + o.emit);
    out << j.dump(2) << "\n";
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

Logic logic_of(const Opts& o) { return logic_from_name(o.logic); }

int cmd_parse(const Opts& o) {
    bool justified = o.arg.find(':') != std::string::npos;
    if (justified) {
        JFm f = parse_jformula(o.arg);
        if (o.format == "json")
            print_json({{"kind", "jformula"}, {"formula", to_string(f)}});
        else
            std::cout << to_string(f) << "\n";
        return kOk;
    }
    Fm f = parse_formula(o.arg);
    if (o.format == "json")
        print_json({{"kind", "formula"}, {"formula", to_string(f)}});
    else
        std::cout << to_string(f) << "\n";
    return kOk;
}

int cmd_prove(const Opts& o) {
    Fm f = parse_formula(o.arg);
    auto d = search(erase(f), logic_of(o), o.depth);
    if (!d) throw Unknown("no proof found within depth " + std::to_string(o.depth));
    if (auto cr = check_proof(*d, d->logic); !cr) throw std::logic_error("search produced an invalid proof: " + cr.error);
    json j = to_json(*d);
    emit(o, j);
    if (o.format == "json")
        print_json(j);
    else
        std::cout << to_text(*d) << "nodes: " << count_nodes(*d) << "\n";
    return kOk;
}

Derivation load_proof(const Opts& o) {
    Derivation d = derivation_from_json(read_json(o.arg));
    if (o.logic_set) d.logic = logic_of(o);
    return d;
}

int cmd_check_proof(const Opts& o) {
    Derivation d = load_proof(o);
    auto cr = check_proof(d, d.logic);
    if (!cr) {
        std::string where;
        for (int k : cr.node) where += "/" + std::to_string(k);
        std::cout << "invalid at node " << (where.empty() ? "/" : where) << ": " << cr.error << "\n";
        return kInvalid;
    }
    std::cout << "ok: " << count_nodes(d) << " nodes, " << logic_name(d.logic) << ", proves "
              << to_string(fm(d.conclusion)) << "\n";
    return kOk;
}

int cmd_annotate(const Opts& o) {
    std::ifstream probe(o.arg);
    if (!probe) {
        // a formula
        Fm f = properly_annotate(erase(parse_formula(o.arg)), env_seed());
        if (o.format == "json")
            print_json({{"formula", to_string(f)}});
        else
            std::cout << to_string(f) << "\n";
        return kOk;
    }
    Derivation d = load_proof(o);
    if (auto cr = check_proof(d, d.logic); !cr) throw Invalid("proof rejected: " + cr.error);
    Derivation a = annotate_proof(decompose_impL(erase(d)), env_seed());
    if (auto cr = check_proof(a, a.logic); !cr) throw std::logic_error("annotation broke the proof: " + cr.error);
    json j = to_json(a);
    emit(o, j);
    if (o.format == "json")
        print_json(j);
    else
        std::cout << to_text(a);
    return kOk;
}

void report_realised(const Opts& o, const PipelineResult& r) {
    const Realised& z = *r.realised;
    json j = to_json(z);
    emit(o, j);
    if (o.format == "json") {
        print_json(j);
        return;
    }
    std::cout << "formula: " << to_string(z.formula) << "\n";
    for (auto& [k, t] : z.r) std::cout << "  " << std::setw(4) << k << " -> " << to_string(t) << "\n";
    std::cout << "certificate: " << z.certificate.steps.size() << " steps, " << jlogic_name(z.certificate.logic)
              << ", checked\n";
}

int finish_pipeline(const Opts& o, const PipelineResult& r) {
    if (r.status == PipelineResult::Unknown) throw Unknown(r.error);
    if (r.status == PipelineResult::Failed) throw std::logic_error(r.error);
    // re-validate what is about to leave the process
    JLProof again = jlproof_from_json(to_json(r.realised->certificate));
    if (!equal(check(again), r.realised->formula)) throw std::logic_error("certificate does not re-check");
    report_realised(o, r);
    return kOk;
}

int cmd_realise(const Opts& o) {
    Derivation d = load_proof(o);
    if (auto cr = check_proof(d, d.logic); !cr) throw Invalid("proof rejected: " + cr.error);
    return finish_pipeline(o, realise_derivation(d, {o.depth, o.glue_budget, env_seed()}));
}

int cmd_check_jl(const Opts& o) {
    json j = read_json(o.arg);
    if (j.is_object() && j.contains("certificate")) j = j["certificate"];
    JLProof p = jlproof_from_json(j);
    try {
        JFm f = check(p);
        if (o.format == "json")
            print_json({{"ok", true}, {"theorem", to_string(f)}, {"steps", p.steps.size()}});
        else
            std::cout << "ok: " << to_string(f) << "\n";
        return kOk;
    } catch (const JLCheckError& e) {
        if (o.format == "json")
            print_json({{"ok", false}, {"step", e.step}, {"error", e.what()}});
        else
            std::cout << "invalid: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_forget(const Opts& o) {
    Fm f = forget(parse_jformula(o.arg));
    std::cout << to_string(f) << "\n";
    return kOk;
}

int cmd_corpus(const Opts& o) {
    std::ifstream in(o.arg);
    if (!in) throw Invalid("cannot open " + o.arg);
    auto entries = read_corpus(in, logic_of(o));
    PipelineOptions po{o.depth, o.glue_budget, env_seed()};
    int fails = 0, unknown = 0;
    json rows = json::array();
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    if (o.format != "json")
        std::printf("%-44s %-5s %-6s %-8s %-5s %-10s %9s\n", "formula", "logic", "proof", "realised", "cert",
                    "round-trip", "ms");
    for (auto& e : entries) {
        PipelineResult r;
        try {
            r = run_pipeline(parse_formula(e.text), e.logic, po);
        } catch (const ParseError& pe) {
            throw ParseError(pe.what(), e.line, pe.col);
        }
        bool proof = r.proof.has_value();
        bool realised = r.realised.has_value();
        if (r.status == PipelineResult::Unknown) ++unknown;
        if (r.status == PipelineResult::Failed) ++fails;
        if (o.format == "json") {
            json row = {{"formula", e.text},       {"logic", logic_name(e.logic)}, {"proof", proof},
                        {"realised", realised},    {"cert", r.cert_ok},          {"roundtrip", r.roundtrip_ok},
                        {"normal", r.normal_ok},   {"ms", r.ms}};
            if (realised) row["jformula"] = to_string(r.realised->formula);
            if (!r.error.empty()) row["error"] = r.error;
            rows.push_back(row);
        } else {
            std::printf("%-44s %-5s %-6s %-8s %-5s %-10s %9.1f\n", e.text.c_str(), logic_name(e.logic).c_str(),
                        yn(proof), yn(realised), yn(r.cert_ok), yn(r.roundtrip_ok), r.ms);
            if (!r.error.empty()) std::printf("    %s\n", r.error.c_str());
        }
    }
    if (o.format == "json") print_json(rows);
    emit(o, rows);
    if (fails) return kInternal;
    if (unknown) return kUnknown;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested sequent proof search and justification realisation"};
    app.require_subcommand(1);
    Opts o;
    auto* lg = app.add_option("--logic", o.logic, "ik | ikt | ik4 | is4")
                   ->check(CLI::IsMember({"ik", "ikt", "ik4", "is4"}))
                   ->capture_default_str();
    app.add_option("--depth", o.depth, "search depth budget")->capture_default_str();
    app.add_option("--glue-budget", o.glue_budget, "propositional search nodes per glue step")->capture_default_str();
    app.add_option("--emit", o.emit, "write the JSON artifact to FILE");
    app.add_option("--format", o.format, "text | json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

    std::map<std::string, std::function<int(const Opts&)>> cmds = {
        {"parse", cmd_parse},     {"prove", cmd_prove},       {"check-proof", cmd_check_proof},
        {"annotate", cmd_annotate}, {"realise", cmd_realise}, {"check-jl", cmd_check_jl},
        {"forget", cmd_forget},   {"corpus", cmd_corpus},
    };
    const std::map<std::string, std::string> help = {
        {"parse", "parse and print a formula (modal or justification)"},
        {"prove", "search for a nested proof of F"},
        {"check-proof", "check a proof JSON"},
        {"annotate", "annotate a formula, or decompose and annotate a proof JSON"},
        {"realise", "realise a proof JSON"},
        {"check-jl", "check a certificate JSON (or realise output)"},
        {"forget", "forgetful projection of a justification formula"},
        {"corpus", "run the pipeline on every formula of FILE"},
    };
    std::string chosen;
    for (auto& [name, fn] : cmds) {
        auto* sc = app.add_subcommand(name, help.at(name));
        sc->fallthrough();
        sc->add_option("input", o.arg)->required();
        sc->callback([&chosen, n = name] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }
    o.logic_set = lg->count() > 0;
    try {
        return cmds.at(chosen)(o);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kInvalid;
    } catch (const Invalid& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    } catch (const Unknown& e) {
        std::cerr << "unknown: " << e.what() << "\n";
        return kUnknown;
    } catch (const GlueBudgetExceeded& e) {
        std::cerr << "unknown: " << e.what() << "\n";
        return kUnknown;
    } catch (const JLCheckError& e) {
        std::cerr << "invalid certificate: " << e.what() << "\n";
        return kInvalid;
    } catch (const RuleError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    } catch (const RealiserError& e) {
        std::cerr << (e.kind == RealiserError::Internal ? "internal: " : "invalid: ") << e.what() << "\n";
        return e.kind == RealiserError::Internal ? kInternal : kInvalid;
    } catch (const json::exception& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return kInternal;
    }
}
