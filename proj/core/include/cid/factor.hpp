#pragma once

#include "cid/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace cid {

/// Nonnegative table over an ordered scope. Entries are indexed
/// lexicographically over the scope (first variable most significant), the
/// same convention as enumerate_instances.
class Factor {
public:
    /// The unit factor: empty scope, single entry 1.
    Factor() : values_{1.0} {}
    Factor(std::vector<Variable> scope, std::vector<double> values);

    const std::vector<Variable>& scope() const { return scope_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    std::size_t size() const { return values_.size(); }

    bool has(std::string_view name) const;
    std::vector<std::string> names() const;
    std::vector<std::size_t> cardinalities() const;

    /// Entry for a full assignment of the scope (extra bindings ignored).
    double at(const Assignment& a) const;
    /// Sum of entries consistent with a partial assignment.
    double probability(const Assignment& partial) const;
    double sum() const;

    Factor normalized() const;
    Factor marginalize(std::string_view name) const;
    /// Keeps only `keep`, in the given order.
    Factor marginal(std::span<const std::string> keep) const;
    /// Drops `name` from the scope, keeping entries where it equals `state`.
    Factor reduce(std::string_view name, std::size_t state) const;
    /// Same entries, scope permuted to `order` (which must list the scope).
    Factor reordered(std::span<const std::string> order) const;

private:
    std::size_t position(std::string_view name) const;

    std::vector<Variable> scope_;
    std::vector<double> values_;
};

Factor product(const Factor& a, const Factor& b);

/// Largest absolute entry difference after aligning b's scope to a's.
double max_abs_difference(const Factor& a, const Factor& b);

}  // namespace cid
