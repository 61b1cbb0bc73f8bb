#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "maxgrent/util.hpp"

namespace maxgrent {

enum class PriorKind { CountLike, Density, General };

std::string to_string(PriorKind k);

/// The bin-array shape mu: a positive vector, kept both as doubles and as
/// exact rationals (recovered from the document's decimal literals).
struct Prior {
    VectorXd values;
    PriorKind kind = PriorKind::General;
    double r = 0.0;  // cached sum
    std::vector<BigRat> exact;

    int size() const { return static_cast<int>(values.size()); }
    /// True when every entry is an integer (enables the exact counting path).
    bool integral() const;
    void validate() const;
    static Prior make(VectorXd values, PriorKind kind);
};

enum class Sense { Eq, Le };

/// One row of Ax = b or Cx <= d. Parse-time normalization turns >= rows into
/// <= with negated coefficients, so Le is the only inequality sense here.
struct LinearConstraint {
    std::map<int, double> coeffs;
    double rhs = 0.0;
    Sense sense = Sense::Le;
    std::map<int, BigRat> exact_coeffs;
    BigRat exact_rhs;
};

struct ToleranceConfig {
    double delta = 0.0;
    double zero_replacement = 1.0;
};

/// Count vector nu with cached sum n.
struct CountVector {
    std::vector<long long> entries;
    long long n = 0;

    static CountVector of(std::vector<long long> e);
    int size() const { return static_cast<int>(entries.size()); }
    VectorXd as_vector() const;
    bool operator==(const CountVector&) const = default;
};

/// A full problem instance: variables, prior, constraint polytope, tolerances.
struct ProblemSpec {
    std::vector<std::string> variable_names;
    Prior prior;
    std::vector<LinearConstraint> equalities;
    std::vector<LinearConstraint> inequalities;
    ToleranceConfig tolerance;

    int dim() const { return static_cast<int>(variable_names.size()); }

    MatrixXd eq_matrix() const;
    VectorXd eq_rhs() const;
    MatrixXd ineq_matrix() const;
    VectorXd ineq_rhs() const;

    void validate() const;
};

/// Parse a UTF-8 JSON problem document.
ProblemSpec parse_spec(const std::string& text);

/// Inverse of parse_spec (modulo normalization already applied).
std::string serialize(const ProblemSpec& spec);

/// Error vectors (b~, d~) of the tolerance machinery: |rhs|, with zeros
/// replaced by the configured positive constant.
std::pair<VectorXd, VectorXd> error_vectors(const ProblemSpec& spec);

/// Membership of x in C(delta), with 1e-9 absolute slack per row.
bool in_region(const VectorXd& x, const ProblemSpec& spec, double delta);

/// Scale the constraint values b, d by c >= 1; structure and prior unchanged.
ProblemSpec scale_spec(const ProblemSpec& spec, double c);

}  // namespace maxgrent
