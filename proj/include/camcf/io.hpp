#pragma once

// Dataset ingestion and export: CSV with a header row, and ARFF (dense and
// sparse rows). In CSV, non-negative integer columns pass through as codes,
// other numeric feature columns are discretized by equal frequency and text
// columns become nominal codes in sorted order. In ARFF, nominal attributes
// keep their declared value order and numeric features are discretized.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "camcf/dataset.hpp"
#include "camcf/error.hpp"

namespace camcf::io {

/// Quantile cut points at i/bins (lower empirical quantile); values equal
/// to a cut go to the lower bin. Arity is the number of codes used.
inline DiscreteColumn discretize_equal_frequency(const std::vector<double>& values, std::size_t bins)
{
    if (bins == 0) throw Error("discretization needs at least one bin");
    const std::size_t n = values.size();
    if (n == 0) return DiscreteColumn({}, 1);
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (std::size_t i = 1; i < bins; ++i) {
        const auto pos = (i * n + bins - 1) / bins;  // ceil(i*n/bins)
        cuts.push_back(sorted[std::max<std::size_t>(pos, 1) - 1]);
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Code> codes(n);
    for (std::size_t i = 0; i < n; ++i) {
        codes[i] = static_cast<Code>(std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
    }
    return DiscreteColumn::from_codes(std::move(codes));
}

/// Which columns are labels. Exactly one way of naming them should be set.
struct LabelSelection {
    std::optional<std::size_t> last_n;  // the last N columns
    std::vector<std::string> names;
    std::string prefix;

    bool empty() const { return !last_n && names.empty() && prefix.empty(); }

    /// "3" selects the last three columns; anything else is a comma-separated name list.
    static LabelSelection parse(const std::string& text)
    {
        LabelSelection sel;
        if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
            sel.last_n = std::stoul(text);
            return sel;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) sel.names.push_back(item);
        }
        return sel;
    }
};

struct IngestOptions {
    std::size_t bins = 5;
};

struct Ingested {
    Dataset dataset;
    std::vector<std::size_t> discretized_features;  // feature indices that were binned
};

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s)
{
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Splits on `sep` outside single or double quotes and strips the quotes.
inline std::vector<std::string> split_quoted(std::string_view line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) {
                if (quote == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quote = 0;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline bool is_missing(const std::string& cell) { return cell.empty() || cell == "?" || lower(cell) == "na"; }

inline std::optional<long long> parse_int(const std::string& s)
{
    long long v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

inline std::optional<double> parse_real(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

/// A raw column of text cells turned into codes.
inline DiscreteColumn encode_cells(const std::vector<std::string>& cells, bool is_label, const std::string& name,
                                   std::size_t bins, bool* discretized, bool declared_numeric = false)
{
    *discretized = false;
    std::vector<long long> ints;
    ints.reserve(cells.size());
    bool all_int = !(declared_numeric && !is_label);
    for (const auto& c : cells) {
        auto v = parse_int(c);
        if (!v) {
            all_int = false;
            break;
        }
        ints.push_back(*v);
    }
    if (all_int) {
        const bool nonneg = std::all_of(ints.begin(), ints.end(), [](long long v) { return v >= 0; });
        if (nonneg) {
            std::vector<Code> codes;
            codes.reserve(ints.size());
            for (auto v : ints) {
                if (v > static_cast<long long>(UINT32_MAX - 1)) throw Error("column '" + name + "': code too large");
                codes.push_back(static_cast<Code>(v));
            }
            return DiscreteColumn::from_codes(std::move(codes));
        }
        std::vector<long long> distinct(ints);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::vector<Code> codes;
        for (auto v : ints) {
            codes.push_back(static_cast<Code>(std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin()));
        }
        return DiscreteColumn::from_codes(std::move(codes));
    }

    std::vector<double> reals;
    bool all_real = true;
    for (const auto& c : cells) {
        auto v = parse_real(c);
        if (!v) {
            all_real = false;
            break;
        }
        reals.push_back(*v);
    }
    if (all_real) {
        if (is_label) throw Error("label column '" + name + "' holds non-integer numbers");
        *discretized = true;
        return discretize_equal_frequency(reals, bins);
    }

    std::vector<std::string> distinct(cells);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<Code> codes;
    for (const auto& c : cells) {
        codes.push_back(static_cast<Code>(std::lower_bound(distinct.begin(), distinct.end(), c) - distinct.begin()));
    }
    return DiscreteColumn::from_codes(std::move(codes));
}

inline std::vector<bool> resolve_labels(const std::vector<std::string>& names, const LabelSelection& sel)
{
    const std::size_t n = names.size();
    std::vector<bool> is_label(n, false);
    if (sel.last_n) {
        if (*sel.last_n == 0) throw Error("at least one label column is required");
        if (*sel.last_n >= n) {
            throw Error("label count " + std::to_string(*sel.last_n) + " leaves no feature columns (have " +
                        std::to_string(n) + " columns)");
        }
        for (std::size_t j = n - *sel.last_n; j < n; ++j) is_label[j] = true;
    } else if (!sel.names.empty()) {
        for (const auto& want : sel.names) {
            auto it = std::find(names.begin(), names.end(), want);
            if (it == names.end()) throw Error("label column '" + want + "' not found");
            is_label[static_cast<std::size_t>(it - names.begin())] = true;
        }
    } else if (!sel.prefix.empty()) {
        for (std::size_t j = 0; j < n; ++j) is_label[j] = names[j].rfind(sel.prefix, 0) == 0;
    } else {
        throw Error("label columns not specified");
    }
    const auto count = static_cast<std::size_t>(std::count(is_label.begin(), is_label.end(), true));
    if (count == 0) throw Error("no column matched the label selection");
    if (count == n) throw Error("label selection leaves no feature columns");
    return is_label;
}

/// Splits raw text columns into features and labels and encodes them.
/// `declared_arity[j]`, when nonzero, fixes the arity of an already-coded
/// nominal column; a zero entry marks a declared-numeric column, whose
/// feature values are always discretized.
inline Ingested assemble(const std::vector<std::string>& names, const std::vector<std::vector<std::string>>& cols,
                         const LabelSelection& sel, const IngestOptions& opts,
                         const std::vector<Code>& declared_arity = {})
{
    const auto is_label = resolve_labels(names, sel);
    std::vector<DiscreteColumn> features, labels;
    std::vector<std::string> fnames, lnames;
    std::vector<std::size_t> binned;
    for (std::size_t j = 0; j < names.size(); ++j) {
        bool disc = false;
        const bool numeric = j < declared_arity.size() && declared_arity[j] == 0;
        auto col = encode_cells(cols[j], is_label[j], names[j], opts.bins, &disc, numeric);
        if (j < declared_arity.size() && declared_arity[j] != 0) col.arity = declared_arity[j];
        if (is_label[j]) {
            labels.push_back(std::move(col));
            lnames.push_back(names[j]);
        } else {
            if (disc) binned.push_back(features.size());
            features.push_back(std::move(col));
            fnames.push_back(names[j]);
        }
    }
    return Ingested{Dataset(std::move(features), std::move(labels), std::move(fnames), std::move(lnames)),
                    std::move(binned)};
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace detail

inline Ingested parse_csv(const std::string& text, const LabelSelection& labels, const IngestOptions& opts = {})
{
    auto lines = detail::lines_of(text);
    if (!lines.empty() && lines[0].rfind("\xEF\xBB\xBF", 0) == 0) lines[0].erase(0, 3);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw Error("CSV is empty");
    const auto header = detail::split_quoted(lines[first], ',');
    const std::size_t width = header.size();

    std::vector<std::vector<std::string>> cols(width);
    std::size_t rows = 0;
    for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
        if (detail::trim(lines[ln]).empty()) continue;
        auto cells = detail::split_quoted(lines[ln], ',');
        if (cells.size() != width) {
            throw Error("CSV line " + std::to_string(ln + 1) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(width));
        }
        for (std::size_t j = 0; j < width; ++j) {
            if (detail::is_missing(cells[j])) {
                throw Error("CSV line " + std::to_string(ln + 1) + ": missing value in column '" + header[j] + "'");
            }
            cols[j].push_back(std::move(cells[j]));
        }
        ++rows;
    }
    if (rows == 0) throw Error("CSV has a header but no data rows");
    return detail::assemble(header, cols, labels, opts);
}

inline Ingested load_csv(const std::string& path, const LabelSelection& labels, const IngestOptions& opts = {})
{
    return parse_csv(detail::read_file(path), labels, opts);
}

inline Ingested load_csv(const std::string& path, std::size_t n_label_columns, const IngestOptions& opts = {})
{
    LabelSelection sel;
    sel.last_n = n_label_columns;
    return load_csv(path, sel, opts);
}

namespace detail {

inline std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"'\n") == std::string::npos && trim(s) == s) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/// Header of feature names then label names; one row per sample of raw codes.
inline void write_csv(std::ostream& os, const Dataset& ds)
{
    bool first = true;
    for (const auto& n : ds.feature_names()) {
        os << (first ? "" : ",") << detail::csv_cell(n);
        first = false;
    }
    for (const auto& n : ds.label_names()) os << ',' << detail::csv_cell(n);
    os << '\n';
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        first = true;
        for (const auto& c : ds.features()) {
            os << (first ? "" : ",") << c.codes[i];
            first = false;
        }
        for (const auto& c : ds.labels()) os << ',' << c.codes[i];
        os << '\n';
    }
}

inline void save_csv(const std::string& path, const Dataset& ds)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write_csv(out, ds);
    if (!out) throw Error("failed writing '" + path + "'");
}

// --- ARFF -----------------------------------------------------------------

namespace detail {

struct ArffAttribute {
    std::string name;
    bool nominal = false;
    std::vector<std::string> values;  // nominal values in declaration order
};

/// Reads a possibly quoted token from the front of `s`.
inline std::string take_token(std::string& s)
{
    s = trim(s);
    if (s.empty()) return {};
    std::string tok;
    if (s[0] == '\'' || s[0] == '"') {
        const char q = s[0];
        std::size_t i = 1;
        while (i < s.size() && s[i] != q) {
            if (s[i] == '\\' && i + 1 < s.size()) ++i;
            tok += s[i++];
        }
        if (i >= s.size()) throw Error("unterminated quote in '" + s + "'");
        s = s.substr(i + 1);
        return tok;
    }
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
    tok = s.substr(0, i);
    s = s.substr(i);
    return tok;
}

/// MEKA-style "-C n" inside the relation name: n > 0 first n, n < 0 last |n|.
inline std::optional<long long> meka_label_count(const std::string& relation)
{
    const auto pos = relation.find("-C ");
    if (pos == std::string::npos) return std::nullopt;
    std::string rest = trim(relation.substr(pos + 3));
    std::size_t end = 0;
    while (end < rest.size() && (std::isdigit(static_cast<unsigned char>(rest[end])) || rest[end] == '-')) ++end;
    return parse_int(rest.substr(0, end));
}

} // namespace detail

inline Ingested parse_arff(const std::string& text, LabelSelection labels, const IngestOptions& opts = {})
{
    const auto lines = detail::lines_of(text);
    std::vector<detail::ArffAttribute> attrs;
    std::string relation;
    std::size_t ln = 0;
    bool in_data = false;
    for (; ln < lines.size(); ++ln) {
        std::string line = detail::trim(lines[ln]);
        if (line.empty() || line[0] == '%') continue;
        if (line[0] != '@') throw Error("ARFF line " + std::to_string(ln + 1) + ": expected a declaration");
        std::string rest = line;
        const std::string keyword = detail::lower(detail::take_token(rest));
        if (keyword == "@relation") {
            relation = detail::trim(rest);
        } else if (keyword == "@attribute") {
            detail::ArffAttribute a;
            a.name = detail::take_token(rest);
            rest = detail::trim(rest);
            if (a.name.empty() || rest.empty()) {
                throw Error("ARFF line " + std::to_string(ln + 1) + ": malformed @attribute declaration");
            }
            if (rest[0] == '{') {
                const auto close = rest.rfind('}');
                if (close == std::string::npos) {
                    throw Error("ARFF line " + std::to_string(ln + 1) + ": unterminated nominal value list");
                }
                a.nominal = true;
                a.values = detail::split_quoted(std::string_view(rest).substr(1, close - 1), ',');
                if (a.values.empty() || (a.values.size() == 1 && a.values[0].empty())) {
                    throw Error("ARFF line " + std::to_string(ln + 1) + ": empty nominal value list");
                }
            } else {
                const auto type = detail::lower(detail::take_token(rest));
                if (type != "numeric" && type != "real" && type != "integer") {
                    throw Error("ARFF line " + std::to_string(ln + 1) + ": unsupported attribute type '" + type + "'");
                }
            }
            attrs.push_back(std::move(a));
        } else if (keyword == "@data") {
            in_data = true;
            ++ln;
            break;
        } else {
            throw Error("ARFF line " + std::to_string(ln + 1) + ": unknown declaration '" + keyword + "'");
        }
    }
    if (!in_data) throw Error("ARFF has no @data section");
    if (attrs.empty()) throw Error("ARFF declares no attributes");

    const std::size_t width = attrs.size();
    std::vector<std::vector<std::string>> cols(width);
    std::size_t rows = 0;
    for (; ln < lines.size(); ++ln) {
        const std::string line = detail::trim(lines[ln]);
        if (line.empty() || line[0] == '%') continue;
        const std::string where = "ARFF line " + std::to_string(ln + 1);
        std::vector<std::string> cells(width);
        if (line[0] == '{') {
            const auto close = line.rfind('}');
            if (close == std::string::npos) throw Error(where + ": unterminated sparse row");
            for (std::size_t j = 0; j < width; ++j) cells[j] = attrs[j].nominal ? attrs[j].values[0] : "0";
            const auto body = detail::trim(std::string_view(line).substr(1, close - 1));
            if (!body.empty()) {
                for (const auto& entry : detail::split_quoted(body, ',')) {
                    std::string e = entry;
                    const auto idx_text = detail::take_token(e);
                    const auto idx = detail::parse_int(idx_text);
                    if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= width) {
                        throw Error(where + ": sparse index '" + idx_text + "' out of range");
                    }
                    cells[static_cast<std::size_t>(*idx)] = detail::trim(e);
                }
            }
        } else {
            cells = detail::split_quoted(line, ',');
            if (cells.size() != width) {
                throw Error(where + " has " + std::to_string(cells.size()) + " values, expected " +
                            std::to_string(width));
            }
        }
        for (std::size_t j = 0; j < width; ++j) {
            if (detail::is_missing(cells[j])) throw Error(where + ": missing value for '" + attrs[j].name + "'");
            if (attrs[j].nominal) {
                const auto& vals = attrs[j].values;
                auto it = std::find(vals.begin(), vals.end(), cells[j]);
                if (it == vals.end()) {
                    throw Error(where + ": value '" + cells[j] + "' not declared for '" + attrs[j].name + "'");
                }
                cells[j] = std::to_string(it - vals.begin());
            }
            cols[j].push_back(std::move(cells[j]));
        }
        ++rows;
    }
    if (rows == 0) throw Error("ARFF has no data rows");

    std::vector<std::string> names;
    std::vector<Code> declared;
    for (const auto& a : attrs) {
        names.push_back(a.name);
        declared.push_back(a.nominal ? static_cast<Code>(a.values.size()) : 0);
    }
    if (labels.empty()) {
        const auto meka = detail::meka_label_count(relation);
        if (!meka || *meka == 0) throw Error("label columns not specified and relation carries no -C count");
        if (*meka > 0) {
            for (long long j = 0; j < *meka && static_cast<std::size_t>(j) < width; ++j) {
                labels.names.push_back(names[static_cast<std::size_t>(j)]);
            }
        } else {
            labels.last_n = static_cast<std::size_t>(-*meka);
        }
    }
    return detail::assemble(names, cols, labels, opts, declared);
}

inline Ingested load_arff(const std::string& path, const LabelSelection& labels, const IngestOptions& opts = {})
{
    return parse_arff(detail::read_file(path), labels, opts);
}

/// Dispatches on the file extension (.arff, otherwise CSV).
inline Ingested load_dataset(const std::string& path, const LabelSelection& labels, const IngestOptions& opts = {})
{
    const auto dot = path.rfind('.');
    if (dot != std::string::npos && detail::lower(path.substr(dot)) == ".arff") return load_arff(path, labels, opts);
    return load_csv(path, labels, opts);
}

} // namespace camcf::io
