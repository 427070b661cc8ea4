#include "ebff/expr.hpp"

#include "ebff/errors.hpp"
#include "ebff/qseries.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace ebff::expr {

struct Expr::Node {
    enum Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

NodeP make(Expr::Node::Kind k, std::vector<NodeP> args = {}, std::string name = {}, double value = 0.0)
{
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->args = std::move(args);
    n->name = std::move(name);
    n->value = value;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodeP parse()
    {
        NodeP e = sum();
        skip();
        if (pos_ != s_.size()) error("unexpected trailing input");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void error(const std::string& what)
    {
        fail(Errc::ConfigError, "expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodeP sum()
    {
        NodeP l = product();
        for (;;) {
            if (eat('+')) l = make(Expr::Node::Add, {l, product()});
            else if (eat('-')) l = make(Expr::Node::Sub, {l, product()});
            else return l;
        }
    }
    NodeP product()
    {
        NodeP l = unary();
        for (;;) {
            if (eat('*')) l = make(Expr::Node::Mul, {l, unary()});
            else if (eat('/')) l = make(Expr::Node::Div, {l, unary()});
            else return l;
        }
    }
    NodeP unary()
    {
        if (eat('-')) return make(Expr::Node::Neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }
    NodeP power()
    {
        NodeP b = atom();
        if (eat('^')) return make(Expr::Node::Pow, {b, unary()});
        return b;
    }
    NodeP atom()
    {
        skip();
        if (pos_ >= s_.size()) error("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodeP e = sum();
            if (!eat(')')) error("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return make(Expr::Node::Num, {}, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t st = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id = s_.substr(st, pos_ - st);
            if (eat('(')) {
                std::vector<NodeP> args{sum()};
                while (eat(',')) args.push_back(sum());
                if (!eat(')')) error("missing ')' after arguments");
                return make(Expr::Node::Call, std::move(args), id);
            }
            return make(Expr::Node::Var, {}, id);
        }
        error(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Expr::Node& n, const std::map<std::string, double>& vars)
{
    auto a = [&](int i) { return eval_node(*n.args[i], vars); };
    switch (n.kind) {
    case Expr::Node::Num: return n.value;
    case Expr::Node::Var: {
        auto it = vars.find(n.name);
        if (it == vars.end()) fail(Errc::ConfigError, "unknown variable '" + n.name + "'");
        return it->second;
    }
    case Expr::Node::Neg: return -a(0);
    case Expr::Node::Add: return a(0) + a(1);
    case Expr::Node::Sub: return a(0) - a(1);
    case Expr::Node::Mul: return a(0) * a(1);
    case Expr::Node::Div: return a(0) / a(1);
    case Expr::Node::Pow: return std::pow(a(0), a(1));
    case Expr::Node::Call: {
        const auto& f = n.name;
        auto arity = [&](std::size_t k) {
            if (n.args.size() != k) fail(Errc::ConfigError, "function '" + f + "' takes " + std::to_string(k) + " argument(s)");
        };
        if (f == "xn") {
            arity(1);
            auto it = vars.find("x");
            if (it == vars.end()) fail(Errc::ConfigError, "xn() needs variable x");
            return qseries::x_number(a(0), it->second);
        }
        if (f == "delta") {
            arity(2);
            return a(0) == a(1) ? 1.0 : 0.0;
        }
        if (f == "sgn") {
            arity(1);
            double v = a(0);
            return double((v > 0) - (v < 0));
        }
        if (f == "sqrt") {
            arity(1);
            return std::sqrt(a(0));
        }
        if (f == "abs") {
            arity(1);
            return std::abs(a(0));
        }
        fail(Errc::ConfigError, "unknown function '" + f + "'");
    }
    }
    return 0.0;
}

} // namespace

Expr Expr::parse(const std::string& src)
{
    Expr e;
    e.src_ = src;
    Parser p(e.src_);
    e.root_ = p.parse();
    return e;
}

double Expr::eval(const std::map<std::string, double>& vars) const { return eval_node(*root_, vars); }

} // namespace ebff::expr
