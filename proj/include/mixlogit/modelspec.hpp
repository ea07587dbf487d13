#pragma once

// Declarative utility specification.
//
// Spec file grammar (line oriented, '#' starts a comment):
//
//   model = CMNL | ECMNL | MMNL1 | MMNL2
//   [coefficients]
//   <name>: attribute=<h_*|m_*> applies=housing|modes|mode:<l>[,<l>...]
//           [kind=fixed|random] [transform=identity|exp|neg_exp]
//           [scale=<real>] [divide_by=income] [interact=<cov>[,<cov>...]]
//   [error_components]
//   <name>: mode=<l>
//   [blocks]
//   <name>: members=<coef>,<coef>,...
//   [intercepts]
//   <name>: mode=<2|3> [covariates=<cov>,...]
//
// The effective attribute entering utility is
//   value * scale * (1/income if divide_by) * prod(interact covariates).

#include "mixlogit/dataset.hpp"
#include "mixlogit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mixlogit {

enum class Transform { Identity, Exponential, NegativeExponential };
enum class CoefficientKind { Fixed, Random };
enum class ModelClass { CMNL, ECMNL, MMNL1, MMNL2 };

inline std::string_view to_string(Transform t)
{
    switch (t) {
    case Transform::Identity: return "identity";
    case Transform::Exponential: return "exp";
    case Transform::NegativeExponential: return "neg_exp";
    }
    return "?";
}

inline std::string_view to_string(ModelClass m)
{
    switch (m) {
    case ModelClass::CMNL: return "CMNL";
    case ModelClass::ECMNL: return "ECMNL";
    case ModelClass::MMNL1: return "MMNL1";
    case ModelClass::MMNL2: return "MMNL2";
    }
    return "?";
}

struct AttributeBinding {
    std::string attribute;
    bool housing = true;
    std::vector<int> modes; ///< for mode attributes; empty means every mode
    double scale = 1.0;
    bool divide_by_income = false;
    std::vector<std::string> interactions;

    [[nodiscard]] bool applies_to(int mode) const
    {
        if (housing || modes.empty()) return true;
        return std::find(modes.begin(), modes.end(), mode) != modes.end();
    }
};

struct CoefficientDecl {
    std::string name;
    AttributeBinding binding;
    CoefficientKind kind = CoefficientKind::Fixed;
    Transform transform = Transform::Identity;
    std::optional<std::size_t> block; ///< index into ModelSpec::blocks

    [[nodiscard]] bool is_random() const { return kind == CoefficientKind::Random; }
};

struct ErrorComponentDecl {
    std::string name;
    int mode = 1;
};

struct CorrelationBlock {
    std::string name;
    std::vector<std::size_t> members; ///< coefficient indices, in declared order
};

struct InterceptDecl {
    std::string name;
    int mode = 2;
    std::vector<std::string> covariates;
};

struct ModelSpec {
    std::string name;
    ModelClass model = ModelClass::CMNL;
    std::vector<CoefficientDecl> coefficients;
    std::vector<ErrorComponentDecl> error_components;
    std::vector<CorrelationBlock> blocks;
    std::vector<InterceptDecl> intercepts;
    std::string source_text;

    [[nodiscard]] std::optional<std::size_t> coefficient_index(std::string_view n) const
    {
        for (std::size_t i = 0; i < coefficients.size(); ++i)
            if (coefficients[i].name == n) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::vector<std::size_t> random_coefficients() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < coefficients.size(); ++i)
            if (coefficients[i].is_random()) out.push_back(i);
        return out;
    }

    /// Number of standard-normal draw dimensions: random coefficients plus error components.
    [[nodiscard]] std::size_t draw_dimension() const
    {
        return random_coefficients().size() + error_components.size();
    }

    /// Draw dimension labels in allocation order.
    [[nodiscard]] std::vector<std::string> draw_labels() const
    {
        std::vector<std::string> out;
        for (auto i : random_coefficients()) out.push_back(coefficients[i].name);
        for (const auto& e : error_components) out.push_back(e.name);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

enum class ParamRole { FixedValue, Mean, DiagonalScale, Cholesky, InterceptBaseline, InterceptShift, ErrorScale };

struct ParamInfo {
    std::string name;
    ParamRole role;
    std::size_t owner = 0; ///< coefficient, block, intercept or error-component index
    std::size_t row = 0;   ///< Cholesky row / intercept covariate index
    std::size_t col = 0;   ///< Cholesky column
};

/// Flat parameter vector layout: coefficient values (fixed value or mean) in
/// declaration order, then diagonal scales, Cholesky entries (row-major lower
/// triangle per block), intercept terms, and error-component scales.
class ParameterLayout {
public:
    explicit ParameterLayout(const ModelSpec& spec)
    {
        const auto n_coef = spec.coefficients.size();
        value_index_.assign(n_coef, 0);
        scale_index_.assign(n_coef, npos);
        for (std::size_t c = 0; c < n_coef; ++c) {
            const auto& d = spec.coefficients[c];
            value_index_[c] = add({d.name, d.is_random() ? ParamRole::Mean : ParamRole::FixedValue, c});
        }
        for (std::size_t c = 0; c < n_coef; ++c) {
            const auto& d = spec.coefficients[c];
            if (d.is_random() && !d.block) scale_index_[c] = add({d.name + ".sd", ParamRole::DiagonalScale, c});
        }
        for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
            const auto m = spec.blocks[b].members.size();
            block_offset_.push_back(params_.size());
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j <= i; ++j)
                    add({spec.blocks[b].name + ".L[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
                         ParamRole::Cholesky, b, i, j});
        }
        for (std::size_t a = 0; a < spec.intercepts.size(); ++a) {
            const auto& d = spec.intercepts[a];
            intercept_offset_.push_back(add({d.name + ".baseline", ParamRole::InterceptBaseline, a}));
            for (std::size_t k = 0; k < d.covariates.size(); ++k)
                add({d.name + "." + d.covariates[k], ParamRole::InterceptShift, a, k});
        }
        for (std::size_t e = 0; e < spec.error_components.size(); ++e)
            tau_index_.push_back(add({spec.error_components[e].name + ".tau", ParamRole::ErrorScale, e}));
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    [[nodiscard]] std::size_t size() const { return params_.size(); }
    [[nodiscard]] const std::vector<ParamInfo>& params() const { return params_; }
    [[nodiscard]] const ParamInfo& operator[](std::size_t i) const { return params_[i]; }

    [[nodiscard]] std::size_t value_index(std::size_t coef) const { return value_index_[coef]; }
    [[nodiscard]] std::size_t scale_index(std::size_t coef) const { return scale_index_[coef]; }
    /// Index of L[i,j] (0-based, i >= j) of block b.
    [[nodiscard]] std::size_t cholesky_index(std::size_t b, std::size_t i, std::size_t j) const
    {
        return block_offset_[b] + i * (i + 1) / 2 + j;
    }
    [[nodiscard]] std::size_t intercept_index(std::size_t a) const { return intercept_offset_[a]; }
    [[nodiscard]] std::size_t tau_index(std::size_t e) const { return tau_index_[e]; }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view n) const
    {
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i].name == n) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (const auto& p : params_) out.push_back(p.name);
        return out;
    }

private:
    std::size_t add(ParamInfo p)
    {
        params_.push_back(std::move(p));
        return params_.size() - 1;
    }

    std::vector<ParamInfo> params_;
    std::vector<std::size_t> value_index_, scale_index_, block_offset_, intercept_offset_, tau_index_;
};

inline std::size_t count_parameters(const ModelSpec& spec) { return ParameterLayout(spec).size(); }

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// beta = psi(alpha). exp overflow saturates to the largest finite value and
/// raises *saturated when given.
inline double transform_param(Transform psi, double alpha, bool* saturated = nullptr)
{
    if (psi == Transform::Identity) return alpha;
    double e = std::exp(alpha);
    if (!std::isfinite(e)) {
        e = std::numeric_limits<double>::max();
        if (saturated) *saturated = true;
    }
    // Keep the sign strict when exp underflows.
    if (e == 0.0) e = std::numeric_limits<double>::denorm_min();
    return psi == Transform::Exponential ? e : -e;
}

/// d psi / d alpha, expressed through beta = psi(alpha).
inline double transform_slope(Transform psi, double beta) { return psi == Transform::Identity ? 1.0 : beta; }

struct RealizedCoefficients {
    std::vector<double> alpha; ///< per coefficient
    std::vector<double> beta;  ///< per coefficient, psi(alpha)
    std::vector<double> eta;   ///< per error component
    bool saturated = false;
};

/// z holds one standard normal per draw dimension in spec.draw_labels() order.
inline RealizedCoefficients realize_coefficients(const ModelSpec& spec, std::span<const double> theta,
                                                 std::span<const double> z)
{
    const ParameterLayout layout(spec);
    if (theta.size() != layout.size())
        throw Error(ErrorCode::DimensionMismatch, "theta has " + std::to_string(theta.size()) + " entries, spec needs " +
                                                      std::to_string(layout.size()));
    if (z.size() != spec.draw_dimension())
        throw Error(ErrorCode::DimensionMismatch, "draw vector has " + std::to_string(z.size()) + " entries, spec needs " +
                                                      std::to_string(spec.draw_dimension()));

    const auto n_coef = spec.coefficients.size();
    std::vector<std::size_t> dim_of(n_coef, ParameterLayout::npos);
    std::size_t d = 0;
    for (std::size_t c = 0; c < n_coef; ++c)
        if (spec.coefficients[c].is_random()) dim_of[c] = d++;

    RealizedCoefficients out;
    out.alpha.resize(n_coef);
    out.beta.resize(n_coef);
    for (std::size_t c = 0; c < n_coef; ++c) {
        const auto& decl = spec.coefficients[c];
        double a = theta[layout.value_index(c)];
        if (decl.is_random() && !decl.block) a += theta[layout.scale_index(c)] * z[dim_of[c]];
        out.alpha[c] = a;
    }
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const auto& members = spec.blocks[b].members;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j)
                out.alpha[members[i]] += theta[layout.cholesky_index(b, i, j)] * z[dim_of[members[j]]];
    }
    for (std::size_t c = 0; c < n_coef; ++c)
        out.beta[c] = transform_param(spec.coefficients[c].transform, out.alpha[c], &out.saturated);
    for (std::size_t e = 0; e < spec.error_components.size(); ++e)
        out.eta.push_back(theta[layout.tau_index(e)] * z[d + e]);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool valid_identifier(std::string_view s)
{
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

class SpecParser {
public:
    explicit SpecParser(std::string text) : text_(std::move(text)) {}

    ModelSpec parse()
    {
        spec_.source_text = text_;
        std::istringstream in(text_);
        std::string raw;
        std::string section;
        bool have_model = false;
        std::vector<std::pair<std::string, std::vector<std::string>>> pending_blocks;
        while (std::getline(in, raw)) {
            ++line_;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail("unterminated section header");
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                if (section != "coefficients" && section != "error_components" && section != "blocks" &&
                    section != "intercepts")
                    fail("unknown section [" + section + "]");
                continue;
            }
            if (section.empty()) {
                const auto eq = line.find('=');
                if (eq == std::string::npos) fail("expected key = value");
                const auto key = trim(std::string_view(line).substr(0, eq));
                const auto value = trim(std::string_view(line).substr(eq + 1));
                if (key == "model") {
                    spec_.model = parse_model(value);
                    have_model = true;
                } else if (key == "name") {
                    spec_.name = value;
                } else {
                    fail("unknown key '" + key + "'");
                }
                continue;
            }
            const auto colon = line.find(':');
            if (colon == std::string::npos) fail("expected '<name>: key=value ...'");
            const auto name = trim(std::string_view(line).substr(0, colon));
            if (!valid_identifier(name)) fail("invalid name '" + name + "'");
            if (!names_.insert(name).second) fail("duplicate name '" + name + "'");
            auto kv = parse_pairs(std::string_view(line).substr(colon + 1));
            if (section == "coefficients") add_coefficient(name, kv);
            else if (section == "error_components") add_error_component(name, kv);
            else if (section == "blocks") pending_blocks.emplace_back(name, take_list(kv, "members", true));
            else add_intercept(name, kv);
            if (!kv.empty()) fail("unknown key '" + kv.front().first + "'");
        }
        if (!have_model) fail("missing 'model = ...'");
        if (spec_.coefficients.empty()) fail("no coefficients declared");
        for (auto& [name, members] : pending_blocks) add_block(name, members);
        validate_model_class();
        return spec_;
    }

private:
    using Pairs = std::vector<std::pair<std::string, std::string>>;

    [[noreturn]] void fail(const std::string& msg, ErrorCode code = ErrorCode::SyntaxError) const
    {
        throw Error(code, "line " + std::to_string(line_) + ": " + msg);
    }

    ModelClass parse_model(const std::string& v) const
    {
        if (v == "CMNL") return ModelClass::CMNL;
        if (v == "ECMNL") return ModelClass::ECMNL;
        if (v == "MMNL1") return ModelClass::MMNL1;
        if (v == "MMNL2") return ModelClass::MMNL2;
        fail("unknown model class '" + v + "'");
    }

    Pairs parse_pairs(std::string_view s) const
    {
        Pairs out;
        std::istringstream in{std::string(s)};
        std::string tok;
        while (in >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size()) fail("malformed token '" + tok + "'");
            out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
        }
        return out;
    }

    static std::optional<std::string> take(Pairs& kv, std::string_view key)
    {
        for (auto it = kv.begin(); it != kv.end(); ++it)
            if (it->first == key) {
                auto v = it->second;
                kv.erase(it);
                return v;
            }
        return std::nullopt;
    }

    std::vector<std::string> take_list(Pairs& kv, std::string_view key, bool required) const
    {
        auto v = take(kv, key);
        if (!v) {
            if (required) fail("missing '" + std::string(key) + "'");
            return {};
        }
        auto items = split(*v, ',');
        for (const auto& i : items)
            if (i.empty()) fail("empty item in '" + std::string(key) + "'");
        return items;
    }

    int parse_mode(const std::string& s) const
    {
        if (s == "1" || s == "2" || s == "3") return s[0] - '0';
        fail("mode '" + s + "' is not 1, 2 or 3");
    }

    void add_coefficient(const std::string& name, Pairs& kv)
    {
        CoefficientDecl d;
        d.name = name;
        auto attr = take(kv, "attribute");
        if (!attr) fail("coefficient '" + name + "' has no attribute");
        d.binding.attribute = *attr;
        auto applies = take(kv, "applies");
        if (!applies) fail("coefficient '" + name + "' has no 'applies'");
        if (*applies == "housing") {
            d.binding.housing = true;
        } else if (*applies == "modes") {
            d.binding.housing = false;
        } else if (starts_with(*applies, "mode:")) {
            d.binding.housing = false;
            for (const auto& m : split(std::string_view(*applies).substr(5), ',')) d.binding.modes.push_back(parse_mode(m));
            std::sort(d.binding.modes.begin(), d.binding.modes.end());
            if (std::adjacent_find(d.binding.modes.begin(), d.binding.modes.end()) != d.binding.modes.end())
                fail("repeated mode in 'applies'");
        } else {
            fail("applies must be housing, modes or mode:<l,...>");
        }
        const std::string_view prefix = d.binding.housing ? "h_" : "m_";
        if (!starts_with(d.binding.attribute, prefix) || d.binding.attribute.size() == 2)
            fail("attribute '" + d.binding.attribute + "' is not a " + (d.binding.housing ? "housing (h_)" : "mode (m_)") +
                     " attribute",
                 ErrorCode::UnknownAttribute);

        if (auto kind = take(kv, "kind")) {
            if (*kind == "fixed") d.kind = CoefficientKind::Fixed;
            else if (*kind == "random") d.kind = CoefficientKind::Random;
            else fail("kind must be fixed or random");
        }
        if (auto tr = take(kv, "transform")) {
            if (*tr == "identity") d.transform = Transform::Identity;
            else if (*tr == "exp") d.transform = Transform::Exponential;
            else if (*tr == "neg_exp") d.transform = Transform::NegativeExponential;
            else fail("transform must be identity, exp or neg_exp");
        }
        if (auto sc = take(kv, "scale")) {
            try {
                std::size_t used = 0;
                d.binding.scale = std::stod(*sc, &used);
                if (used != sc->size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                fail("scale '" + *sc + "' is not a number");
            }
        }
        if (auto div = take(kv, "divide_by")) {
            if (*div != "income") fail("divide_by '" + *div + "' is not a known covariate", ErrorCode::UnknownAttribute);
            d.binding.divide_by_income = true;
        }
        d.binding.interactions = take_list(kv, "interact", false);
        for (const auto& cov : d.binding.interactions)
            if (!is_known_covariate(cov)) fail("unknown covariate '" + cov + "'", ErrorCode::UnknownAttribute);
        std::sort(d.binding.interactions.begin(), d.binding.interactions.end());

        for (const auto& other : spec_.coefficients) {
            const auto& a = other.binding;
            const auto& b = d.binding;
            if (a.attribute != b.attribute || a.interactions != b.interactions) continue;
            bool overlap = a.housing || b.housing || a.modes.empty() || b.modes.empty();
            for (int m : b.modes) overlap = overlap || a.applies_to(m);
            if (overlap)
                fail("attribute '" + b.attribute + "' already bound by '" + other.name + "' in the same context",
                     ErrorCode::DuplicateBinding);
        }
        spec_.coefficients.push_back(std::move(d));
    }

    void add_error_component(const std::string& name, Pairs& kv)
    {
        auto m = take(kv, "mode");
        if (!m) fail("error component '" + name + "' has no mode");
        ErrorComponentDecl e{name, parse_mode(*m)};
        for (const auto& other : spec_.error_components)
            if (other.mode == e.mode)
                fail("mode " + *m + " already has error component '" + other.name + "'", ErrorCode::DuplicateBinding);
        spec_.error_components.push_back(std::move(e));
    }

    void add_intercept(const std::string& name, Pairs& kv)
    {
        auto m = take(kv, "mode");
        if (!m) fail("intercept '" + name + "' has no mode");
        InterceptDecl d{name, parse_mode(*m), take_list(kv, "covariates", false)};
        if (d.mode == static_cast<int>(Mode::ConventionalCar)) fail("mode 1 is the intercept reference");
        for (const auto& cov : d.covariates)
            if (!is_known_covariate(cov)) fail("unknown covariate '" + cov + "'", ErrorCode::UnknownAttribute);
        for (const auto& other : spec_.intercepts)
            if (other.mode == d.mode)
                fail("mode " + *m + " already has intercept '" + other.name + "'", ErrorCode::DuplicateBinding);
        spec_.intercepts.push_back(std::move(d));
    }

    void add_block(const std::string& name, const std::vector<std::string>& members)
    {
        CorrelationBlock b{name, {}};
        for (const auto& m : members) {
            auto idx = spec_.coefficient_index(m);
            if (!idx) throw Error(ErrorCode::SyntaxError, "block '" + name + "': unknown member '" + m + "'");
            auto& decl = spec_.coefficients[*idx];
            if (!decl.is_random())
                throw Error(ErrorCode::BlockMemberNotRandom, "block '" + name + "': member '" + m + "' is fixed");
            if (decl.block)
                throw Error(ErrorCode::DuplicateBinding, "block '" + name + "': member '" + m + "' already in a block");
            decl.block = spec_.blocks.size();
            b.members.push_back(*idx);
        }
        spec_.blocks.push_back(std::move(b));
    }

    void validate_model_class() const
    {
        const bool any_random = !spec_.random_coefficients().empty();
        const bool any_ec = !spec_.error_components.empty();
        const bool any_block = !spec_.blocks.empty();
        auto bad = [&](const std::string& why) {
            throw Error(ErrorCode::SyntaxError,
                        "model " + std::string(to_string(spec_.model)) + " " + why);
        };
        switch (spec_.model) {
        case ModelClass::CMNL:
            if (any_random || any_ec) bad("admits no random coefficients or error components");
            break;
        case ModelClass::ECMNL:
            if (any_random) bad("admits no random coefficients");
            if (!any_ec) bad("needs at least one error component");
            break;
        case ModelClass::MMNL1:
            if (!any_random) bad("needs random coefficients");
            if (any_block) bad("admits no correlation blocks");
            break;
        case ModelClass::MMNL2:
            if (!any_block) bad("needs a correlation block");
            break;
        }
    }

    std::string text_;
    ModelSpec spec_;
    std::set<std::string> names_;
    std::size_t line_ = 0;
};

} // namespace detail

inline ModelSpec parse_spec_text(std::string text, std::string name = {})
{
    auto spec = detail::SpecParser(std::move(text)).parse();
    if (spec.name.empty()) spec.name = std::move(name);
    return spec;
}

inline ModelSpec parse_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    auto stem = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.resize(dot);
    return parse_spec_text(ss.str(), stem);
}

/// Nested restriction of a spec: CMNL turns random coefficients fixed and drops
/// error components; ECMNL keeps the error components; MMNL1 drops blocks.
inline ModelSpec restrict_spec(const ModelSpec& spec, ModelClass target)
{
    ModelSpec out = spec;
    out.model = target;
    out.name = spec.name + "/" + std::string(to_string(target));
    out.source_text.clear();
    if (target == ModelClass::MMNL2) return out;
    out.blocks.clear();
    for (auto& c : out.coefficients) {
        c.block.reset();
        if (target == ModelClass::CMNL || target == ModelClass::ECMNL) c.kind = CoefficientKind::Fixed;
    }
    if (target == ModelClass::CMNL) out.error_components.clear();
    return out;
}

/// Serializes a spec back to the documented grammar.
inline std::string to_spec_text(const ModelSpec& spec)
{
    std::ostringstream out;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    };
    out << "model = " << to_string(spec.model) << "\n";
    if (!spec.name.empty() && spec.name.find_first_of("/ ") == std::string::npos) out << "name = " << spec.name << "\n";
    out << "\n[coefficients]\n";
    for (const auto& c : spec.coefficients) {
        const auto& b = c.binding;
        out << c.name << ": attribute=" << b.attribute << " applies=";
        if (b.housing) out << "housing";
        else if (b.modes.empty()) out << "modes";
        else {
            out << "mode:";
            for (std::size_t i = 0; i < b.modes.size(); ++i) out << (i ? "," : "") << b.modes[i];
        }
        out << " kind=" << (c.is_random() ? "random" : "fixed") << " transform=" << to_string(c.transform);
        if (b.scale != 1.0) {
            std::ostringstream s;
            s.precision(17);
            s << b.scale;
            out << " scale=" << s.str();
        }
        if (b.divide_by_income) out << " divide_by=income";
        if (!b.interactions.empty()) out << " interact=" << join(b.interactions);
        out << "\n";
    }
    if (!spec.error_components.empty()) {
        out << "\n[error_components]\n";
        for (const auto& e : spec.error_components) out << e.name << ": mode=" << e.mode << "\n";
    }
    if (!spec.blocks.empty()) {
        out << "\n[blocks]\n";
        for (const auto& b : spec.blocks) {
            std::vector<std::string> names;
            for (auto m : b.members) names.push_back(spec.coefficients[m].name);
            out << b.name << ": members=" << join(names) << "\n";
        }
    }
    if (!spec.intercepts.empty()) {
        out << "\n[intercepts]\n";
        for (const auto& a : spec.intercepts) {
            out << a.name << ": mode=" << a.mode;
            if (!a.covariates.empty()) out << " covariates=" << join(a.covariates);
            out << "\n";
        }
    }
    return out.str();
}

} // namespace mixlogit
