#include "cid/factor.hpp"

#include "cid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cid {

Factor::Factor(std::vector<Variable> scope, std::vector<double> values)
    : scope_(std::move(scope)), values_(std::move(values)) {
    if (values_.size() != instance_count(cardinalities())) {
        throw std::invalid_argument("factor table size does not match its scope");
    }
}

bool Factor::has(std::string_view name) const {
    return std::any_of(scope_.begin(), scope_.end(),
                       [&](const Variable& v) { return v.name == name; });
}

std::vector<std::string> Factor::names() const {
    std::vector<std::string> out;
    for (const auto& v : scope_) out.push_back(v.name);
    return out;
}

std::vector<std::size_t> Factor::cardinalities() const {
    std::vector<std::size_t> out;
    for (const auto& v : scope_) out.push_back(v.cardinality());
    return out;
}

std::size_t Factor::position(std::string_view name) const {
    for (std::size_t i = 0; i < scope_.size(); ++i) {
        if (scope_[i].name == name) return i;
    }
    throw UnknownVariable("variable '" + std::string(name) + "' is not in the factor scope");
}

double Factor::at(const Assignment& a) const {
    std::size_t index = 0;
    for (const auto& v : scope_) {
        auto it = a.find(v.name);
        if (it == a.end()) throw QueryError("no state bound for '" + v.name + "'");
        index = index * v.cardinality() + v.require_state(it->second);
    }
    return values_[index];
}

double Factor::probability(const Assignment& partial) const {
    Factor f = *this;
    for (const auto& [name, state] : partial) {
        if (!f.has(name)) continue;
        f = f.reduce(name, f.scope_[f.position(name)].require_state(state));
    }
    return f.sum();
}

double Factor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Factor Factor::normalized() const {
    const double total = sum();
    Factor f = *this;
    if (total > 0) {
        for (double& v : f.values_) v /= total;
    }
    return f;
}

Factor Factor::marginalize(std::string_view name) const {
    const std::size_t k = position(name);
    auto cards = cardinalities();
    std::size_t inner = 1;
    for (std::size_t i = k + 1; i < cards.size(); ++i) inner *= cards[i];
    const std::size_t outer = values_.size() / (inner * cards[k]);
    std::vector<double> out(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < cards[k]; ++s) {
            const double* src = &values_[(o * cards[k] + s) * inner];
            double* dst = &out[o * inner];
            for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    }
    auto scope = scope_;
    scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(k));
    return Factor(std::move(scope), std::move(out));
}

Factor Factor::marginal(std::span<const std::string> keep) const {
    Factor f = *this;
    for (const auto& v : scope_) {
        if (std::find(keep.begin(), keep.end(), v.name) == keep.end()) f = f.marginalize(v.name);
    }
    return f.reordered(keep);
}

Factor Factor::reduce(std::string_view name, std::size_t state) const {
    const std::size_t k = position(name);
    auto cards = cardinalities();
    std::size_t inner = 1;
    for (std::size_t i = k + 1; i < cards.size(); ++i) inner *= cards[i];
    const std::size_t outer = values_.size() / (inner * cards[k]);
    std::vector<double> out(outer * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        std::copy_n(&values_[(o * cards[k] + state) * inner], inner, &out[o * inner]);
    }
    auto scope = scope_;
    scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(k));
    return Factor(std::move(scope), std::move(out));
}

Factor Factor::reordered(std::span<const std::string> order) const {
    if (order.size() != scope_.size()) {
        throw std::invalid_argument("reorder must list every scope variable");
    }
    std::vector<std::size_t> perm;
    std::vector<Variable> scope;
    for (const auto& name : order) {
        perm.push_back(position(name));
        scope.push_back(scope_[perm.back()]);
    }
    auto cards = cardinalities();
    std::vector<std::size_t> old_stride(cards.size(), 1);
    for (std::size_t i = cards.size(); i-- > 1;) old_stride[i - 1] = old_stride[i] * cards[i];

    std::vector<double> out(values_.size());
    std::vector<std::size_t> digits(order.size(), 0);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        std::size_t src = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) src += digits[i] * old_stride[perm[i]];
        out[idx] = values_[src];
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < scope[i].cardinality()) break;
            digits[i] = 0;
        }
    }
    return Factor(std::move(scope), std::move(out));
}

Factor product(const Factor& a, const Factor& b) {
    std::vector<Variable> scope = a.scope();
    for (const auto& v : b.scope()) {
        if (!a.has(v.name)) scope.push_back(v);
    }
    std::vector<std::size_t> cards;
    for (const auto& v : scope) cards.push_back(v.cardinality());

    // Strides of a and b along the result scope.
    auto strides_for = [&](const Factor& f) {
        std::vector<std::size_t> own(f.scope().size(), 1);
        for (std::size_t i = own.size(); i-- > 1;) {
            own[i - 1] = own[i] * f.scope()[i].cardinality();
        }
        std::vector<std::size_t> out(scope.size(), 0);
        for (std::size_t i = 0; i < scope.size(); ++i) {
            for (std::size_t j = 0; j < f.scope().size(); ++j) {
                if (f.scope()[j].name == scope[i].name) out[i] = own[j];
            }
        }
        return out;
    };
    const auto sa = strides_for(a);
    const auto sb = strides_for(b);

    const std::size_t total = instance_count(cards);
    std::vector<double> out(total);
    std::vector<std::size_t> digits(scope.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        out[idx] = a.values()[ia] * b.values()[ib];
        for (std::size_t i = digits.size(); i-- > 0;) {
            if (++digits[i] < cards[i]) {
                ia += sa[i];
                ib += sb[i];
                break;
            }
            ia -= sa[i] * (cards[i] - 1);
            ib -= sb[i] * (cards[i] - 1);
            digits[i] = 0;
        }
    }
    return Factor(std::move(scope), std::move(out));
}

double max_abs_difference(const Factor& a, const Factor& b) {
    auto names = a.names();
    Factor aligned = b.reordered(names);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - aligned.values()[i]));
    }
    return worst;
}

}  // namespace cid
