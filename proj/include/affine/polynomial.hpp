#pragma once

#include <complex>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace affine {

/// Sparse multivariate polynomial with complex coefficients, indexed by
/// exponent multi-indices in N^k. Zero coefficients are never stored.
class SparsePolynomial {
public:
    using Exponents = std::vector<int>;
    using Coeff = std::complex<double>;

    explicit SparsePolynomial(std::size_t vars) : vars_(vars) {}

    std::size_t vars() const noexcept { return vars_; }
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    const std::map<Exponents, Coeff>& terms() const noexcept { return terms_; }

    void add_term(const Exponents& exps, Coeff c) {
        if (exps.size() != vars_)
            throw std::invalid_argument("SparsePolynomial: exponent arity mismatch");
        for (int e : exps)
            if (e < 0) throw std::invalid_argument("SparsePolynomial: negative exponent");
        auto it = terms_.find(exps);
        if (it == terms_.end()) {
            if (c != Coeff(0.0)) terms_.emplace(exps, c);
            return;
        }
        it->second += c;
        if (it->second == Coeff(0.0)) terms_.erase(it);
    }

    Coeff coeff(const Exponents& exps) const {
        auto it = terms_.find(exps);
        return it == terms_.end() ? Coeff(0.0) : it->second;
    }

    Coeff eval(const std::vector<Coeff>& point) const {
        Coeff sum(0.0);
        for (const auto& [exps, c] : terms_) {
            Coeff mono = c;
            for (std::size_t j = 0; j < vars_; ++j)
                for (int e = 0; e < exps[j]; ++e) mono *= point[j];
            sum += mono;
        }
        return sum;
    }

    friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
        return a.vars_ == b.vars_ && a.terms_ == b.terms_;
    }

    std::string to_string(const std::string& var = "P") const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [exps, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.real();
            if (c.imag() != 0) os << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
            os << ")";
            for (std::size_t j = 0; j < vars_; ++j) {
                if (exps[j] == 0) continue;
                os << "*" << var << (j + 1);
                if (exps[j] > 1) os << "^" << exps[j];
            }
        }
        return os.str();
    }

private:
    std::size_t vars_;
    std::map<Exponents, Coeff> terms_;
};

} // namespace affine
