#pragma once

// CSV export of a NodeMetricsTable.  Column order is fixed; see
// docs/metrics_csv.md.

#include "gnndiag/core/error.hpp"
#include "gnndiag/core/format.hpp"
#include "gnndiag/metrics/node_metrics.hpp"

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gnndiag {

inline std::vector<std::string> metrics_csv_columns(std::size_t class_count) {
    std::vector<std::string> cols = {"node", "gt", "p1", "p2", "p3", "correct1", "correct2", "correct3",
                                     "conf", "deg", "cn_label", "cn_label_pred", "cn_pred_label", "cn_pred",
                                     "dis", "closeness"};
    for (std::size_t c = 0; c < class_count; ++c) cols.push_back("spd_" + std::to_string(c));
    cols.emplace_back("nearest_dominant");
    for (std::size_t c = 0; c < class_count; ++c) cols.push_back("kfs_" + std::to_string(c));
    cols.emplace_back("topk_dominant");
    cols.emplace_back("similar_train_ids");
    return cols;
}

inline std::string metrics_csv_header(std::size_t class_count) {
    std::string out;
    for (const auto& c : metrics_csv_columns(class_count)) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out;
}

/// One CSV line (no trailing newline).  DIS is "inf" when unreachable and
/// similar ids are space separated.
inline std::string metrics_csv_row(const NodeMetricsRow& r) {
    std::string s;
    auto field = [&](std::string_view v) {
        if (!s.empty()) s += ',';
        s += v;
    };
    field(std::to_string(r.node));
    field(std::to_string(r.gt));
    for (ClassId p : r.pred) field(std::to_string(p));
    for (bool c : r.correct) field(c ? "1" : "0");
    field(format_double(r.conf));
    field(std::to_string(r.deg));
    for (double v : r.cn) field(format_double(v));
    field(r.dis ? std::to_string(*r.dis) : "inf");
    field(format_double(r.closeness));
    for (double v : r.spd) field(format_double(v));
    field(to_string(r.nearest_dominant));
    for (double v : r.kfs) field(format_double(v));
    field(to_string(r.topk_dominant));
    std::string ids;
    for (NodeId t : r.similar_train_ids) {
        if (!ids.empty()) ids += ' ';
        ids += std::to_string(t);
    }
    field(ids);
    return s;
}

inline std::string metrics_to_csv(const NodeMetricsTable& t) {
    std::string out = metrics_csv_header(t.class_count) + "\n";
    for (const auto& r : t.rows) out += metrics_csv_row(r) + "\n";
    return out;
}

namespace detail {

template <class T>
T parse_number(std::string_view s, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("metrics csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// Inverse of metrics_to_csv.
inline NodeMetricsTable parse_metrics_csv(std::string_view text) {
    auto lines = detail::split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("metrics csv is empty");
    const auto header = detail::split(lines[0], ',');
    std::size_t classes = 0;
    for (auto h : header) classes += h.starts_with("spd_");
    if (metrics_csv_header(classes) != lines[0]) throw ParseError("metrics csv header does not match");

    NodeMetricsTable t;
    t.class_count = classes;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto f = detail::split(lines[ln], ',');
        if (f.size() != header.size()) throw ParseError("metrics csv line " + std::to_string(ln) + ": wrong field count");
        using detail::parse_number;
        NodeMetricsRow r;
        std::size_t i = 0;
        r.node = parse_number<NodeId>(f[i++], ln);
        r.gt = parse_number<ClassId>(f[i++], ln);
        for (auto& p : r.pred) p = parse_number<ClassId>(f[i++], ln);
        for (auto&& c : r.correct) c = parse_number<int>(f[i++], ln) != 0;
        r.conf = parse_number<double>(f[i++], ln);
        r.deg = parse_number<std::size_t>(f[i++], ln);
        for (auto& v : r.cn) v = parse_number<double>(f[i++], ln);
        if (f[i] == "inf") ++i;
        else r.dis = parse_number<std::uint32_t>(f[i++], ln);
        r.closeness = parse_number<double>(f[i++], ln);
        for (std::size_t c = 0; c < classes; ++c) r.spd.push_back(parse_number<double>(f[i++], ln));
        auto v1 = parse_verdict(f[i++]);
        for (std::size_t c = 0; c < classes; ++c) r.kfs.push_back(parse_number<double>(f[i++], ln));
        auto v2 = parse_verdict(f[i++]);
        if (!v1 || !v2) throw ParseError("metrics csv line " + std::to_string(ln) + ": bad verdict");
        r.nearest_dominant = *v1;
        r.topk_dominant = *v2;
        if (!f[i].empty())
            for (auto id : detail::split(f[i], ' ')) r.similar_train_ids.push_back(parse_number<NodeId>(id, ln));
        t.max_degree = std::max(t.max_degree, r.deg);
        t.k = std::max(t.k, r.similar_train_ids.size());
        t.rows.push_back(std::move(r));
    }
    return t;
}

} // namespace gnndiag
