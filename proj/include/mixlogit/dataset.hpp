#pragma once

// Long-format panel choice data: one CSV row per (respondent, task,
// alternative). Alternatives are (housing k, mode l) tuples.

#include "mixlogit/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mixlogit {

inline constexpr int kHousingOptions = 2;
inline constexpr int kModes = 3;

enum class Mode : int { ConventionalCar = 1, SelfDrivingCar = 2, PublicTransit = 3 };

enum class AgeBand : int { Age18To29 = 0, Age30To49 = 1, Age50Plus = 2 };

inline std::string_view to_string(AgeBand band)
{
    switch (band) {
    case AgeBand::Age18To29: return "18-29";
    case AgeBand::Age30To49: return "30-49";
    case AgeBand::Age50Plus: return "50+";
    }
    return "?";
}

inline std::optional<AgeBand> parse_age_band(std::string_view s)
{
    if (s == "18-29") return AgeBand::Age18To29;
    if (s == "30-49") return AgeBand::Age30To49;
    if (s == "50+") return AgeBand::Age50Plus;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Income encoding
// ---------------------------------------------------------------------------

/// Weekly household income band [lower, upper) in AUD/week. An open upper
/// bound marks the top-coded band.
struct IncomeBand {
    double lower = 0.0;
    std::optional<double> upper;
};

inline constexpr double kTopCodeFactor = 1.3;

/// Twelve survey bands. Only the grouping boundaries (800, 1600, 2500) and
/// the 4000+ top band are fixed by the survey; the remaining edges are a
/// documented choice (see README).
inline const std::array<IncomeBand, 12>& income_band_table()
{
    static const std::array<IncomeBand, 12> bands = {{
        {0.0, 200.0},
        {200.0, 300.0},
        {300.0, 400.0},
        {400.0, 600.0},
        {600.0, 800.0},
        {800.0, 1600.0},
        {1600.0, 2000.0},
        {2000.0, 2500.0},
        {2500.0, 3000.0},
        {3000.0, 3500.0},
        {3500.0, 4000.0},
        {4000.0, std::nullopt},
    }};
    return bands;
}

/// Midpoint of the band; the open top band is top-coded at 1.3 x lower.
inline double encode_income(const IncomeBand& band)
{
    if (!band.upper) return kTopCodeFactor * band.lower;
    return 0.5 * (band.lower + *band.upper);
}

/// `code` is the 1-based band index into income_band_table().
inline double encode_income(int code)
{
    const auto& table = income_band_table();
    if (code < 1 || code > static_cast<int>(table.size()))
        throw Error(ErrorCode::UnknownBand, "income band " + std::to_string(code) + " is not in 1..12");
    return encode_income(table[static_cast<std::size_t>(code - 1)]);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Respondent {
    std::string id;
    int income_band = 1;
    double weekly_household_income = 0.0;
    bool is_owner = false;
    bool has_license = true;
    bool female = false;
    AgeBand age_band = AgeBand::Age30To49;
    bool children_present = false;
    bool degree_holder = false;
    bool ridehail_user = false;

    friend bool operator==(const Respondent&, const Respondent&) = default;
};

/// Respondent-level covariates addressable by name from model specs.
inline constexpr std::array<std::string_view, 10> kCovariateNames = {
    "owner", "renter", "license", "female", "age_18_29", "age_30_49", "age_50_plus",
    "children", "degree", "ridehail",
};

inline bool is_known_covariate(std::string_view name)
{
    return std::find(kCovariateNames.begin(), kCovariateNames.end(), name) != kCovariateNames.end();
}

inline double covariate_value(const Respondent& r, std::string_view name)
{
    auto b = [](bool v) { return v ? 1.0 : 0.0; };
    if (name == "owner") return b(r.is_owner);
    if (name == "renter") return b(!r.is_owner);
    if (name == "license") return b(r.has_license);
    if (name == "female") return b(r.female);
    if (name == "age_18_29") return b(r.age_band == AgeBand::Age18To29);
    if (name == "age_30_49") return b(r.age_band == AgeBand::Age30To49);
    if (name == "age_50_plus") return b(r.age_band == AgeBand::Age50Plus);
    if (name == "children") return b(r.children_present);
    if (name == "degree") return b(r.degree_holder);
    if (name == "ridehail") return b(r.ridehail_user);
    throw Error(ErrorCode::UnknownAttribute, "unknown respondent covariate '" + std::string(name) + "'");
}

struct Alternative {
    int housing = 1; ///< k in {1, 2}
    int mode = 1;    ///< l in {1, 2, 3}
    /// Indexed by ChoiceDataset::attribute_names; NaN marks an absent value.
    std::vector<double> values;

    friend bool operator==(const Alternative& a, const Alternative& b)
    {
        if (a.housing != b.housing || a.mode != b.mode || a.values.size() != b.values.size()) return false;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double x = a.values[i], y = b.values[i];
            if (std::isnan(x) != std::isnan(y)) return false;
            if (!std::isnan(x) && x != y) return false;
        }
        return true;
    }
};

struct ChoiceTask {
    std::size_t respondent = 0; ///< index into ChoiceDataset::respondents
    int task_index = 1;
    std::vector<Alternative> alternatives; ///< available alternatives only
    int chosen = -1;                       ///< index into alternatives; -1 for design skeletons

    friend bool operator==(const ChoiceTask&, const ChoiceTask&) = default;
};

struct ChoiceDataset {
    std::vector<Respondent> respondents;
    std::vector<ChoiceTask> tasks; ///< grouped by respondent, ordered by task index
    std::vector<std::string> attribute_names;
    std::string provenance;

    /// tasks[task_begin[n] .. task_begin[n+1]) belong to respondent n.
    std::vector<std::size_t> task_begin;

    [[nodiscard]] std::size_t num_respondents() const { return respondents.size(); }
    [[nodiscard]] std::size_t num_tasks() const { return tasks.size(); }

    [[nodiscard]] std::optional<std::size_t> attribute_index(std::string_view name) const
    {
        for (std::size_t i = 0; i < attribute_names.size(); ++i)
            if (attribute_names[i] == name) return i;
        return std::nullopt;
    }

    /// Rebuilds task_begin from tasks. Tasks must already be grouped.
    void index_tasks()
    {
        task_begin.assign(respondents.size() + 1, 0);
        std::vector<std::size_t> counts(respondents.size(), 0);
        for (const auto& t : tasks) ++counts[t.respondent];
        for (std::size_t n = 0; n < respondents.size(); ++n) task_begin[n + 1] = task_begin[n] + counts[n];
    }

    friend bool operator==(const ChoiceDataset& a, const ChoiceDataset& b)
    {
        return a.respondents == b.respondents && a.tasks == b.tasks && a.attribute_names == b.attribute_names;
    }
};

/// (k, l) tuples in k-major order; mode 1 is dropped without a driving licence.
inline std::vector<std::pair<int, int>> build_alternative_universe(const Respondent& respondent)
{
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= kHousingOptions; ++k)
        for (int l = 1; l <= kModes; ++l) {
            if (l == static_cast<int>(Mode::ConventionalCar) && !respondent.has_license) continue;
            out.emplace_back(k, l);
        }
    return out;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

/// Column mapping for load_choice_data. Defaults are the canonical names.
struct CsvSchema {
    std::string resp_id = "resp_id";
    std::string task = "task";
    std::string alt_k = "alt_k";
    std::string alt_l = "alt_l";
    std::string available = "available";
    std::string chosen = "chosen";
    std::string income_band = "income_band";
    std::string owner = "owner";
    std::string license = "license";
    std::string female = "female";
    std::string age_band = "age_band";
    std::string children = "children";
    std::string degree = "degree";
    std::string ridehail = "ridehail";
    std::string housing_prefix = "h_";
    std::string mode_prefix = "m_";
    /// When false a missing or empty chosen column yields a design skeleton.
    bool require_chosen = true;
    /// Optional separate respondent file carrying the respondent-level columns.
    std::optional<std::string> respondents_path;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string row_tag(std::size_t line_no) { return "row " + std::to_string(line_no); }

inline double parse_real(const std::string& s, std::size_t line_no, std::string_view column)
{
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorCode::InvalidValue,
                    row_tag(line_no) + ": column '" + std::string(column) + "' value '" + s + "' is not a number");
    return v;
}

inline long parse_int(const std::string& s, std::size_t line_no, std::string_view column)
{
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidValue,
                    row_tag(line_no) + ": column '" + std::string(column) + "' value '" + s + "' is not an integer");
    return v;
}

inline bool parse_flag(const std::string& s, std::size_t line_no, std::string_view column)
{
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw Error(ErrorCode::InvalidValue,
                row_tag(line_no) + ": column '" + std::string(column) + "' value '" + s + "' is not 0/1");
}

class CsvTable {
public:
    explicit CsvTable(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
        std::string line;
        if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "'" + path + "' has no header row");
        if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // UTF-8 BOM
        header_ = split_csv_line(line);
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            auto fields = split_csv_line(line);
            if (fields.size() != header_.size())
                throw Error(ErrorCode::InvalidValue, row_tag(line_no) + ": expected " + std::to_string(header_.size()) +
                                                         " fields, found " + std::to_string(fields.size()));
            rows_.push_back(std::move(fields));
            line_numbers_.push_back(line_no);
        }
    }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const
    {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::size_t require(std::string_view name) const
    {
        auto idx = find(name);
        if (!idx) throw Error(ErrorCode::MissingColumn, "required column '" + std::string(name) + "' not found");
        return *idx;
    }

    [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
    [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    [[nodiscard]] std::size_t line_number(std::size_t row) const { return line_numbers_[row]; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> line_numbers_;
};

struct RespondentColumns {
    std::size_t income_band, owner, license, female, age_band, children, degree, ridehail;

    static RespondentColumns resolve(const CsvTable& t, const CsvSchema& s)
    {
        return {t.require(s.income_band), t.require(s.owner),    t.require(s.license),  t.require(s.female),
                t.require(s.age_band),    t.require(s.children), t.require(s.degree),   t.require(s.ridehail)};
    }

    [[nodiscard]] Respondent parse(const std::vector<std::string>& row, std::size_t line_no, const CsvSchema& s,
                                   std::string id) const
    {
        Respondent r;
        r.id = std::move(id);
        r.income_band = static_cast<int>(parse_int(row[income_band], line_no, s.income_band));
        try {
            r.weekly_household_income = encode_income(r.income_band);
        } catch (const Error& e) {
            throw Error(ErrorCode::UnknownBand, row_tag(line_no) + ": " + e.what());
        }
        r.is_owner = parse_flag(row[owner], line_no, s.owner);
        r.has_license = parse_flag(row[license], line_no, s.license);
        r.female = parse_flag(row[female], line_no, s.female);
        auto band = parse_age_band(row[age_band]);
        if (!band)
            throw Error(ErrorCode::InvalidValue, row_tag(line_no) + ": age_band '" + row[age_band] +
                                                     "' is not one of 18-29, 30-49, 50+");
        r.age_band = *band;
        r.children_present = parse_flag(row[children], line_no, s.children);
        r.degree_holder = parse_flag(row[degree], line_no, s.degree);
        r.ridehail_user = parse_flag(row[ridehail], line_no, s.ridehail);
        return r;
    }
};

inline bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

} // namespace detail

/// Loads and validates a long-format choice file. Errors name the offending
/// row by its 1-based line number in the file.
inline ChoiceDataset load_choice_data(const std::string& path, const CsvSchema& schema = {})
{
    using detail::row_tag;
    detail::CsvTable table(path);

    const std::size_t c_resp = table.require(schema.resp_id);
    const std::size_t c_task = table.require(schema.task);
    const std::size_t c_k = table.require(schema.alt_k);
    const std::size_t c_l = table.require(schema.alt_l);
    const std::size_t c_avail = table.require(schema.available);
    const auto c_chosen = schema.require_chosen ? std::optional(table.require(schema.chosen)) : table.find(schema.chosen);

    ChoiceDataset ds;
    ds.provenance = "loaded from " + path;
    std::vector<std::size_t> attr_cols;
    for (std::size_t i = 0; i < table.header().size(); ++i) {
        const auto& name = table.header()[i];
        if (detail::starts_with(name, schema.housing_prefix) || detail::starts_with(name, schema.mode_prefix)) {
            ds.attribute_names.push_back(name);
            attr_cols.push_back(i);
        }
    }

    // Respondent-level columns live inline unless a separate file is given.
    std::unordered_map<std::string, Respondent> external;
    std::optional<detail::RespondentColumns> inline_cols;
    if (schema.respondents_path) {
        detail::CsvTable rt(*schema.respondents_path);
        const auto cols = detail::RespondentColumns::resolve(rt, schema);
        const std::size_t rid = rt.require(schema.resp_id);
        for (std::size_t i = 0; i < rt.rows().size(); ++i) {
            const auto& row = rt.rows()[i];
            external.emplace(row[rid], cols.parse(row, rt.line_number(i), schema, row[rid]));
        }
    } else {
        inline_cols = detail::RespondentColumns::resolve(table, schema);
    }

    std::unordered_map<std::string, std::size_t> seen_resp;
    std::optional<std::string> cur_resp;
    int cur_task = 0;
    ChoiceTask* task = nullptr;
    // Per-task availability signature used to enforce respondent-level availability.
    std::vector<std::pair<int, int>> cur_signature;
    std::vector<std::pair<int, int>> resp_signature;
    int chosen_count = 0;
    std::size_t task_first_line = 0;

    auto close_task = [&]() {
        if (!task) return;
        if (c_chosen && schema.require_chosen && chosen_count != 1)
            throw Error(ErrorCode::InvalidValue, row_tag(task_first_line) + ": task " + std::to_string(task->task_index) +
                                                     " has " + std::to_string(chosen_count) + " chosen rows");
        if (task->alternatives.empty())
            throw Error(ErrorCode::AvailabilityMismatch,
                        row_tag(task_first_line) + ": task has no available alternatives");
        if (cur_task == 1) {
            resp_signature = cur_signature;
        } else if (cur_signature != resp_signature) {
            throw Error(ErrorCode::AvailabilityMismatch,
                        row_tag(task_first_line) + ": availability differs from the respondent's first task");
        }
    };

    for (std::size_t i = 0; i < table.rows().size(); ++i) {
        const auto& row = table.rows()[i];
        const std::size_t line = table.line_number(i);
        const std::string& rid = row[c_resp];
        const int t = static_cast<int>(detail::parse_int(row[c_task], line, schema.task));

        if (!cur_resp || *cur_resp != rid) {
            close_task();
            task = nullptr;
            if (seen_resp.count(rid))
                throw Error(ErrorCode::NonContiguousTask, row_tag(line) + ": rows of respondent '" + rid +
                                                              "' are not contiguous");
            Respondent resp;
            if (inline_cols) {
                resp = inline_cols->parse(row, line, schema, rid);
            } else {
                auto it = external.find(rid);
                if (it == external.end())
                    throw Error(ErrorCode::DanglingRespondent,
                                row_tag(line) + ": respondent '" + rid + "' is not in the respondent file");
                resp = it->second;
            }
            seen_resp.emplace(rid, ds.respondents.size());
            ds.respondents.push_back(std::move(resp));
            cur_resp = rid;
            cur_task = 0;
        } else if (inline_cols) {
            const auto again = inline_cols->parse(row, line, schema, rid);
            if (!(again == ds.respondents.back()))
                throw Error(ErrorCode::DanglingRespondent, row_tag(line) + ": respondent-level columns of '" + rid +
                                                               "' disagree with earlier rows");
        }

        if (!task || t != cur_task) {
            if (t != cur_task + 1)
                throw Error(ErrorCode::NonContiguousTask, row_tag(line) + ": respondent '" + rid + "' task " +
                                                              std::to_string(t) + " follows task " +
                                                              std::to_string(cur_task));
            close_task();
            ds.tasks.push_back(ChoiceTask{ds.respondents.size() - 1, t, {}, -1});
            task = &ds.tasks.back();
            cur_task = t;
            cur_signature.clear();
            chosen_count = 0;
            task_first_line = line;
        }

        Alternative alt;
        alt.housing = static_cast<int>(detail::parse_int(row[c_k], line, schema.alt_k));
        alt.mode = static_cast<int>(detail::parse_int(row[c_l], line, schema.alt_l));
        if (alt.housing < 1 || alt.housing > kHousingOptions || alt.mode < 1 || alt.mode > kModes)
            throw Error(ErrorCode::InvalidValue, row_tag(line) + ": alternative (" + row[c_k] + "," + row[c_l] +
                                                     ") is outside k in {1,2}, l in {1,2,3}");
        const bool available = detail::parse_flag(row[c_avail], line, schema.available);
        bool chosen = false;
        if (c_chosen && !row[*c_chosen].empty()) chosen = detail::parse_flag(row[*c_chosen], line, schema.chosen);
        else if (c_chosen && schema.require_chosen)
            throw Error(ErrorCode::InvalidValue, row_tag(line) + ": empty chosen value");

        if (chosen && !available)
            throw Error(ErrorCode::ChosenUnavailable,
                        row_tag(line) + ": chosen alternative (" + row[c_k] + "," + row[c_l] + ") is unavailable");
        if (!available) continue;
        if (alt.mode == static_cast<int>(Mode::ConventionalCar) && !ds.respondents.back().has_license)
            throw Error(ErrorCode::AvailabilityMismatch,
                        row_tag(line) + ": conventional car available to a respondent without a licence");

        alt.values.reserve(attr_cols.size());
        for (std::size_t a = 0; a < attr_cols.size(); ++a)
            alt.values.push_back(detail::parse_real(row[attr_cols[a]], line, ds.attribute_names[a]));
        cur_signature.emplace_back(alt.housing, alt.mode);
        if (chosen) {
            ++chosen_count;
            task->chosen = static_cast<int>(task->alternatives.size());
        }
        task->alternatives.push_back(std::move(alt));
    }
    close_task();

    if (ds.respondents.empty()) throw Error(ErrorCode::InvalidValue, "'" + path + "' contains no choice rows");
    ds.index_tasks();
    return ds;
}

/// Writes the canonical long CSV. Doubles use shortest round-trip form so a
/// reload reproduces the dataset exactly.
inline void write_choice_data(const ChoiceDataset& ds, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << "resp_id,task,alt_k,alt_l,available,chosen,income_band,owner,license,female,age_band,children,degree,ridehail";
    for (const auto& name : ds.attribute_names) out << ',' << name;
    out << '\n';

    auto num = [](double v) -> std::string {
        if (std::isnan(v)) return {};
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    for (const auto& t : ds.tasks) {
        const auto& r = ds.respondents[t.respondent];
        for (std::size_t j = 0; j < t.alternatives.size(); ++j) {
            const auto& a = t.alternatives[j];
            out << r.id << ',' << t.task_index << ',' << a.housing << ',' << a.mode << ",1,";
            if (t.chosen >= 0) out << (static_cast<int>(j) == t.chosen ? 1 : 0);
            out << ',' << r.income_band << ',' << int(r.is_owner) << ',' << int(r.has_license) << ','
                << int(r.female) << ',' << to_string(r.age_band) << ',' << int(r.children_present) << ','
                << int(r.degree_holder) << ',' << int(r.ridehail_user);
            for (double v : a.values) out << ',' << num(v);
            out << '\n';
        }
    }
}

} // namespace mixlogit
