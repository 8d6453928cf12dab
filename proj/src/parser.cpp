#include "jreal/parser.hpp"

#include <cctype>
#include <cstring>
#include <optional>

namespace jreal {

namespace {

class Parser {
   public:
    explicit Parser(const std::string& s) : s_(s) {}

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        int line = 1, col = 1;
        for (size_t i = 0; i < at && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(msg, line, col);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

    void ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        ws();
        return pos_ >= s_.size();
    }
    bool peek(const char* lit) {
        ws();
        return s_.compare(pos_, std::strlen(lit), lit) == 0;
    }
    bool eat(const char* lit) {
        if (!peek(lit)) return false;
        pos_ += std::strlen(lit);
        return true;
    }
    void expect(const char* lit) {
        if (!eat(lit)) fail(std::string("expected '") + lit + "'");
    }
    std::optional<std::string> ident() {
        ws();
        if (pos_ >= s_.size() || !std::islower(static_cast<unsigned char>(s_[pos_]))) return std::nullopt;
        size_t b = pos_;
        while (pos_ < s_.size() && (std::islower(static_cast<unsigned char>(s_[pos_])) ||
                                    std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return s_.substr(b, pos_ - b);
    }
    int number() {
        ws();
        size_t b = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (b == pos_) fail("expected a number");
        if (pos_ - b > 9) fail("number too large", b);
        return std::stoi(s_.substr(b, pos_ - b));
    }

    Fm formula() {
        Fm f = imp();
        if (!at_end()) fail("unexpected input");
        return f;
    }
    JFm jformula() {
        JFm f = jimp_();
        if (!at_end()) fail("unexpected input");
        return f;
    }
    Tm term_all() {
        Tm t = term();
        if (!at_end()) fail("unexpected input");
        return t;
    }

   private:
    Fm imp() {
        Fm l = disj();
        if (eat("->")) return mk_imp(l, imp());
        return l;
    }
    Fm disj() {
        Fm l = conj();
        while (!peek("|>") && eat("|")) l = mk_or(l, conj());
        return l;
    }
    Fm conj() {
        Fm l = unary();
        while (eat("&")) l = mk_and(l, unary());
        return l;
    }
    Fm unary() {
        ws();
        size_t at = pos_;
        if (eat("#")) return mk_bot();
        if (eat("(")) {
            Fm f = imp();
            expect(")");
            return f;
        }
        if (eat("[]")) return mk_box(unary());
        if (eat("<>")) return mk_dia(unary());
        if (eat("[")) {
            int n = number();
            expect("]");
            if (n % 4 > 1) fail("box index must be 0 or 1 mod 4", at);
            return mk_box(unary(), n);
        }
        if (eat("<")) {
            int n = number();
            expect(">");
            if (n % 4 < 2) fail("diamond index must be 2 or 3 mod 4", at);
            return mk_dia(unary(), n);
        }
        if (auto id = ident()) {
            if (*id == "box") return mk_box(unary());
            if (*id == "dia") return mk_dia(unary());
            return mk_atom(*id);
        }
        fail("expected a formula");
    }

    JFm jimp_() {
        JFm l = jdisj();
        if (eat("->")) return jimp(l, jimp_());
        return l;
    }
    JFm jdisj() {
        JFm l = jconj();
        while (!peek("|>") && eat("|")) l = jor(l, jconj());
        return l;
    }
    JFm jconj() {
        JFm l = junary();
        while (eat("&")) l = jand(l, junary());
        return l;
    }
    JFm junary() {
        ws();
        size_t save = pos_;
        // Try TERM ':' first; fall back to a plain formula.
        Tm t;
        try {
            t = term();
            if (!eat(":")) t = nullptr;
        } catch (const ParseError&) {
            t = nullptr;
        }
        if (t) {
            JFm body = junary();
            return t->is_sat() ? sat(t, body) : just(t, body);
        }
        pos_ = save;
        if (eat("#")) return jbot();
        if (eat("(")) {
            JFm f = jimp_();
            expect(")");
            return f;
        }
        if (auto id = ident()) {
            if (*id == "box" || *id == "dia") fail("modalities are not allowed in justification formulas", save);
            return jatom(*id);
        }
        fail("expected a justification formula");
    }

    // ---- terms ----
    static bool is_sat(const Tm& t) { return t->is_sat(); }

    Tm term() {
        size_t at = pos_;
        Tm l = term_upd();
        for (;;) {
            ws();
            at = pos_;
            if (eat("+")) {
                Tm r = term_upd();
                if (is_sat(l) || is_sat(r)) fail("'+' needs proof terms", at);
                l = sum(l, r);
            } else if (eat("U")) {
                Tm r = term_upd();
                if (!is_sat(l) || !is_sat(r)) fail("'U' needs satisfiers", at);
                l = uni(l, r);
            } else {
                return l;
            }
        }
    }
    Tm term_upd() {
        Tm l = term_mul();
        ws();
        size_t at = pos_;
        if (eat("|>")) {
            Tm r = term_upd();
            if (!is_sat(l) || is_sat(r)) fail("'|>' needs a satisfier and a proof term", at);
            return update(l, r);
        }
        return l;
    }
    Tm term_mul() {
        Tm l = term_primary();
        for (;;) {
            ws();
            size_t at = pos_;
            if (eat("*")) {
                Tm r = term_primary();
                if (is_sat(l) || is_sat(r)) fail("'*' needs proof terms", at);
                l = app(l, r);
            } else if (eat("@")) {
                Tm r = term_primary();
                if (is_sat(l) || !is_sat(r)) fail("'@' needs a proof term and a satisfier", at);
                l = prop(l, r);
            } else {
                return l;
            }
        }
    }
    Tm term_primary() {
        ws();
        size_t at = pos_;
        if (eat("!")) {
            Tm t = term_primary();
            if (is_sat(t)) fail("'!' needs a proof term", at);
            return bang(t);
        }
        if (eat("(")) {
            Tm t = term();
            expect(")");
            return t;
        }
        if (pos_ < s_.size()) {
            char c = s_[pos_];
            auto digits_at = [&](size_t p) {
                return p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]));
            };
            auto ends_word = [&]() {
                return pos_ >= s_.size() ||
                       !(std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_');
            };
            if ((c == 'y' || c == 'a') && pos_ + 1 < s_.size() && s_[pos_ + 1] == '^') {
                pos_ += 2;
                if (!digits_at(pos_)) fail("expected an index");
                int n = number();
                return c == 'y' ? rpvar(n) : rsvar(n);
            }
            if ((c == 'x' || c == 'c' || c == 'a') && digits_at(pos_ + 1)) {
                ++pos_;
                int n = number();
                if (!ends_word()) fail("malformed term variable", at);
                return c == 'x' ? pvar(n) : c == 'c' ? cnst(n) : svar(n);
            }
        }
        fail("expected a term");
    }

    const std::string& s_;
    size_t pos_ = 0;
};

}  // namespace

Fm parse_formula(const std::string& src) { return Parser(src).formula(); }
JFm parse_jformula(const std::string& src) { return Parser(src).jformula(); }
Tm parse_term(const std::string& src) { return Parser(src).term_all(); }

}  // namespace jreal
