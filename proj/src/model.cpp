#include "maxgrent/model.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace maxgrent {

using nlohmann::json;

std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::CountLike: return "count";
        case PriorKind::Density: return "density";
        case PriorKind::General: return "general";
    }
    return "?";
}

bool Prior::integral() const {
    for (const auto& q : exact)
        if (boost::multiprecision::denominator(q) != 1) return false;
    return !exact.empty();
}

void Prior::validate() const {
    if (values.size() == 0) throw SpecError("empty prior");
    for (int i = 0; i < values.size(); ++i)
        if (!(values[i] > 0.0)) throw SpecError("nonpositive prior");
    if (kind == PriorKind::CountLike) {
        for (int i = 0; i < values.size(); ++i)
            if (values[i] < 1.0 - 1e-12) throw SpecError("count prior entry below 1");
    }
    if (kind == PriorKind::Density && std::abs(r - 1.0) > 1e-12)
        throw SpecError("density prior does not sum to 1");
}

Prior Prior::make(VectorXd v, PriorKind kind) {
    Prior p;
    p.values = std::move(v);
    p.kind = kind;
    p.r = p.values.sum();
    p.exact.reserve(p.values.size());
    for (int i = 0; i < p.values.size(); ++i) p.exact.push_back(rational_from_double(p.values[i]));
    p.validate();
    return p;
}

CountVector CountVector::of(std::vector<long long> e) {
    CountVector v;
    v.entries = std::move(e);
    v.n = std::accumulate(v.entries.begin(), v.entries.end(), 0ll);
    return v;
}

VectorXd CountVector::as_vector() const {
    VectorXd x(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) x[i] = double(entries[i]);
    return x;
}

namespace {

MatrixXd dense_matrix(const std::vector<LinearConstraint>& rows, int m) {
    MatrixXd out = MatrixXd::Zero(static_cast<int>(rows.size()), m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [j, c] : rows[i].coeffs) out(static_cast<int>(i), j) = c;
    return out;
}

VectorXd dense_rhs(const std::vector<LinearConstraint>& rows) {
    VectorXd out(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<int>(i)] = rows[i].rhs;
    return out;
}

void validate_row(const LinearConstraint& c, int m) {
    if (c.coeffs.empty()) throw SpecError("constraint with no coefficients");
    bool nonzero = false;
    for (const auto& [j, v] : c.coeffs) {
        if (j < 0 || j >= m) throw SpecError("constraint index out of range");
        if (v != 0.0) nonzero = true;
    }
    if (!nonzero) throw SpecError("constraint with all-zero coefficients");
}

LinearConstraint parse_row(const json& jrow, const std::map<std::string, int>& index,
                           Sense sense, bool allow_ge) {
    LinearConstraint out;
    out.sense = sense;
    if (!jrow.contains("coeffs") || !jrow["coeffs"].is_object())
        throw SpecError("constraint missing coeffs object");
    bool flip = false;
    if (jrow.contains("sense")) {
        std::string s = jrow["sense"].get<std::string>();
        if (s == "ge" && allow_ge)
            flip = true;
        else if (s != (allow_ge ? "le" : "eq"))
            throw SpecError("bad constraint sense: " + s);
    }
    for (auto it = jrow["coeffs"].begin(); it != jrow["coeffs"].end(); ++it) {
        auto found = index.find(it.key());
        if (found == index.end()) throw SpecError("unknown variable in constraint: " + it.key());
        double c = it.value().get<double>();
        if (flip) c = -c;
        out.coeffs[found->second] = c;
        out.exact_coeffs[found->second] = rational_from_double(c);
    }
    double rhs = jrow.at("rhs").get<double>();
    if (flip) rhs = -rhs;
    out.rhs = rhs;
    out.exact_rhs = rational_from_double(rhs);
    return out;
}

}  // namespace

MatrixXd ProblemSpec::eq_matrix() const { return dense_matrix(equalities, dim()); }
VectorXd ProblemSpec::eq_rhs() const { return dense_rhs(equalities); }
MatrixXd ProblemSpec::ineq_matrix() const { return dense_matrix(inequalities, dim()); }
VectorXd ProblemSpec::ineq_rhs() const { return dense_rhs(inequalities); }

void ProblemSpec::validate() const {
    const int m = dim();
    if (m < 2) throw SpecError("need at least 2 variables");
    std::set<std::string> names(variable_names.begin(), variable_names.end());
    if (static_cast<int>(names.size()) != m) throw SpecError("duplicate variable name");
    if (prior.size() != m) throw SpecError("prior length does not match variable count");
    prior.validate();
    for (const auto& c : equalities) {
        if (c.sense != Sense::Eq) throw SpecError("equality row with wrong sense");
        validate_row(c, m);
    }
    for (const auto& c : inequalities) {
        if (c.sense != Sense::Le) throw SpecError("inequality row not normalized to le");
        validate_row(c, m);
    }
    if (!(tolerance.delta >= 0.0)) throw SpecError("delta must be nonnegative");
    if (!(tolerance.zero_replacement > 0.0)) throw SpecError("zero_replacement must be positive");
}

ProblemSpec parse_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw SpecError("document root must be an object");

    ProblemSpec spec;
    try {
        spec.variable_names = doc.at("variables").get<std::vector<std::string>>();
        std::map<std::string, int> index;
        for (int i = 0; i < static_cast<int>(spec.variable_names.size()); ++i)
            index[spec.variable_names[i]] = i;

        const json& jp = doc.at("prior");
        auto values = jp.at("values").get<std::vector<double>>();
        std::string kind_s = jp.value("kind", "general");
        PriorKind kind;
        if (kind_s == "count")
            kind = PriorKind::CountLike;
        else if (kind_s == "density")
            kind = PriorKind::Density;
        else if (kind_s == "general")
            kind = PriorKind::General;
        else
            throw SpecError("unknown prior kind: " + kind_s);
        spec.prior = Prior::make(Eigen::Map<VectorXd>(values.data(), values.size()), kind);

        if (doc.contains("equalities"))
            for (const auto& row : doc["equalities"])
                spec.equalities.push_back(parse_row(row, index, Sense::Eq, false));
        if (doc.contains("inequalities"))
            for (const auto& row : doc["inequalities"])
                spec.inequalities.push_back(parse_row(row, index, Sense::Le, true));

        if (doc.contains("tolerance")) {
            spec.tolerance.delta = doc["tolerance"].value("delta", 0.0);
            spec.tolerance.zero_replacement = doc["tolerance"].value("zero_replacement", 1.0);
        }
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed document: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string serialize(const ProblemSpec& spec) {
    json doc;
    doc["variables"] = spec.variable_names;
    doc["prior"]["values"] = std::vector<double>(spec.prior.values.data(),
                                                 spec.prior.values.data() + spec.prior.size());
    doc["prior"]["kind"] = to_string(spec.prior.kind);
    auto rows_json = [&](const std::vector<LinearConstraint>& rows) {
        json arr = json::array();
        for (const auto& c : rows) {
            json row;
            for (const auto& [j, v] : c.coeffs) row["coeffs"][spec.variable_names[j]] = v;
            row["rhs"] = c.rhs;
            arr.push_back(row);
        }
        return arr;
    };
    doc["equalities"] = rows_json(spec.equalities);
    doc["inequalities"] = rows_json(spec.inequalities);
    doc["tolerance"]["delta"] = spec.tolerance.delta;
    doc["tolerance"]["zero_replacement"] = spec.tolerance.zero_replacement;
    return doc.dump(2);
}

std::pair<VectorXd, VectorXd> error_vectors(const ProblemSpec& spec) {
    auto fill = [&](const std::vector<LinearConstraint>& rows) {
        VectorXd out(static_cast<int>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double b = rows[i].rhs;
            out[static_cast<int>(i)] = b != 0.0 ? std::abs(b) : spec.tolerance.zero_replacement;
        }
        return out;
    };
    return {fill(spec.equalities), fill(spec.inequalities)};
}

bool in_region(const VectorXd& x, const ProblemSpec& spec, double delta) {
    constexpr double slack = 1e-9;
    if (x.size() != spec.dim()) throw SpecError("dimension mismatch");
    for (int i = 0; i < x.size(); ++i)
        if (x[i] < -slack) return false;
    auto [bt, dt] = error_vectors(spec);
    for (std::size_t i = 0; i < spec.equalities.size(); ++i) {
        double lhs = 0.0;
        for (const auto& [j, c] : spec.equalities[i].coeffs) lhs += c * x[j];
        double b = spec.equalities[i].rhs, w = delta * bt[static_cast<int>(i)];
        if (lhs < b - w - slack || lhs > b + w + slack) return false;
    }
    for (std::size_t i = 0; i < spec.inequalities.size(); ++i) {
        double lhs = 0.0;
        for (const auto& [j, c] : spec.inequalities[i].coeffs) lhs += c * x[j];
        if (lhs > spec.inequalities[i].rhs + delta * dt[static_cast<int>(i)] + slack) return false;
    }
    return true;
}

ProblemSpec scale_spec(const ProblemSpec& spec, double c) {
    if (!(c >= 1.0)) throw SpecError("scale factor must be >= 1");
    ProblemSpec out = spec;
    BigRat cq = rational_from_double(c);
    for (auto& row : out.equalities) {
        row.rhs *= c;
        row.exact_rhs *= cq;
    }
    for (auto& row : out.inequalities) {
        row.rhs *= c;
        row.exact_rhs *= cq;
    }
    return out;
}

}  // namespace maxgrent
