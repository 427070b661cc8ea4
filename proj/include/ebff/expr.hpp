#pragma once

#include <map>
#include <memory>
#include <string>

namespace ebff::expr {

// Tiny arithmetic language: numbers, variables, + - * / ^, parentheses and
// the functions xn(a) (symmetric x-number), delta(a,b), sgn(a), sqrt(a), abs(a).
class Expr {
public:
    struct Node;
    static Expr parse(const std::string& src);
    double eval(const std::map<std::string, double>& vars) const;
    const std::string& source() const { return src_; }

private:
    std::string src_;
    std::shared_ptr<const Node> root_;
};

} // namespace ebff::expr
