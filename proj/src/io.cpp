#include "fairbv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairbv/errors.hpp"

namespace fairbv {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "distance,is_genuine,group_a,group_b";

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string mode_name(ErrorMode m) { return m == ErrorMode::FmrBiased ? "fmr" : "fnmr"; }

ErrorMode mode_from(const std::string& s) {
    if (s == "fmr") return ErrorMode::FmrBiased;
    if (s == "fnmr") return ErrorMode::FnmrBiased;
    throw InvalidArgument("unknown error mode: " + s);
}

std::string kind_name(OperatingKind k) { return k == OperatingKind::FmrAtTmr ? "fmr_at_tmr" : "fnmr_at_tnmr"; }

OperatingKind kind_from(const std::string& s) {
    if (s == "fmr_at_tmr") return OperatingKind::FmrAtTmr;
    if (s == "fnmr_at_tnmr") return OperatingKind::FnmrAtTnmr;
    throw InvalidArgument("unknown operating kind: " + s);
}

json to_json(const SynthTarget& t) {
    return {{"kind", kind_name(t.kind)},
            {"target_constraint", t.target_constraint},
            {"target_error", t.target_error},
            {"n_genuine", t.n_genuine},
            {"n_impostor", t.n_impostor},
            {"seed", t.seed},
            {"max_iters", t.max_iters},
            {"step_scale", t.step_scale},
            {"error_step_scale", t.error_step_scale},
            {"anchor_offset", t.anchor_offset},
            {"replicate", t.replicate},
            {"tolerance_counts", t.tolerance_counts}};
}

SynthTarget target_from_json(const json& j) {
    SynthTarget t;
    t.kind = kind_from(j.at("kind").get<std::string>());
    t.target_constraint = j.at("target_constraint").get<double>();
    t.target_error = j.at("target_error").get<double>();
    t.n_genuine = j.at("n_genuine").get<std::size_t>();
    t.n_impostor = j.at("n_impostor").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.max_iters = j.at("max_iters").get<std::size_t>();
    t.step_scale = j.at("step_scale").get<double>();
    t.error_step_scale = j.at("error_step_scale").get<double>();
    t.anchor_offset = j.at("anchor_offset").get<double>();
    t.replicate = j.at("replicate").get<std::uint64_t>();
    t.tolerance_counts = j.at("tolerance_counts").get<double>();
    return t;
}

json to_json(const ScenarioSpec& s) {
    return {{"ratios", s.ratios},
            {"base_error", s.base_error},
            {"constraint", s.constraint},
            {"n_genuine", s.n_genuine},
            {"n_impostor", s.n_impostor},
            {"global_target", to_json(s.global_target)},
            {"mode", mode_name(s.mode)},
            {"seed", s.seed},
            {"max_iters", s.max_iters},
            {"step_scale", s.step_scale},
            {"error_step_scale", s.error_step_scale},
            {"anchor_offset", s.anchor_offset},
            {"reuse", s.reuse}};
}

ScenarioSpec spec_from_json(const json& j) {
    ScenarioSpec s;
    s.ratios = j.at("ratios").get<std::vector<int>>();
    s.base_error = j.at("base_error").get<double>();
    s.constraint = j.at("constraint").get<double>();
    s.n_genuine = j.at("n_genuine").get<std::size_t>();
    s.n_impostor = j.at("n_impostor").get<std::size_t>();
    s.global_target = target_from_json(j.at("global_target"));
    s.mode = mode_from(j.at("mode").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.max_iters = j.at("max_iters").get<std::size_t>();
    s.step_scale = j.at("step_scale").get<double>();
    s.error_step_scale = j.at("error_step_scale").get<double>();
    s.anchor_offset = j.at("anchor_offset").get<double>();
    s.reuse = j.at("reuse").get<bool>();
    return s;
}

json to_json(const MetricConfig& c) {
    return {{"alpha", c.alpha},
            {"policy_fmr", c.policy_fmr},
            {"zero_guard", c.zero_guard},
            {"use_zero_guard", c.use_zero_guard}};
}

MetricConfig config_from_json(const json& j) {
    MetricConfig c;
    c.alpha = j.at("alpha").get<double>();
    c.policy_fmr = j.at("policy_fmr").get<double>();
    c.zero_guard = j.at("zero_guard").get<double>();
    c.use_zero_guard = j.at("use_zero_guard").get<bool>();
    return c;
}

json to_json(const PropertySpec& p) {
    json j = {{"name", p.name}, {"kind", to_string(p.kind)}, {"rows", p.rows}};
    if (!p.strict.empty()) j["strict"] = p.strict;
    if (p.strict_from) j["strict_from"] = p.strict_from;
    return j;
}

PropertySpec property_from_json(const json& j) {
    PropertySpec p;
    p.name = j.at("name").get<std::string>();
    p.kind = property_kind_from(j.at("kind").get<std::string>());
    p.rows = j.at("rows").get<std::vector<std::string>>();
    p.strict = j.value("strict", std::vector<std::string>{});
    p.strict_from = j.value("strict_from", std::size_t{0});
    for (const auto& c : p.strict) column_value(ReportRow{}, c);
    return p;
}

json to_json(const PropertyOutcome& o) {
    return {{"name", o.name}, {"passed", o.passed}, {"skipped", o.skipped}, {"detail", o.detail}};
}

PropertyOutcome outcome_from_json(const json& j) {
    return {j.at("name").get<std::string>(), j.at("passed").get<bool>(), j.at("skipped").get<bool>(),
            j.at("detail").get<std::string>()};
}

// Fixed layouts per column, close to how the tables print them.
std::string cell(const std::string& column, double v) {
    if (column == "ir") return fmt("%.2f", v);
    if (column == "garbe" || column == "fdr") return fmt("%.4f", v);
    if (column == "std_eer_g") return v == 0.0 ? "0.00" : fmt("%.2e", v);
    return fmt("%.2f", v);
}

std::string render_markdown(const SuiteResult& r) {
    std::ostringstream os;
    os << "<!-- config: " << to_json(r)["config_snapshot"].dump() << " -->\n";
    os << "| Ratios | IR | GARBE | FDR | σ EER_G | σ SED_G | mean SED_G |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : r.rows) {
        os << "| " << row.ratio_label;
        for (const char* c : kColumns) os << " | " << cell(c, column_value(row, c));
        os << " |\n";
    }
    bool any_flag = false;
    for (const auto& row : r.rows)
        if (row.flagged()) {
            if (!any_flag) os << "\nFlags:\n";
            any_flag = true;
            os << "- " << row.ratio_label << ":";
            for (const auto& f : row.flags) os << " " << f;
            os << "\n";
        }
    if (!r.properties.empty()) {
        os << "\n| Property | Result | Detail |\n|---|---|---|\n";
        for (const auto& p : r.properties)
            os << "| " << p.name << " | " << (p.skipped ? "skipped" : p.passed ? "pass" : "fail") << " | " << p.detail
               << " |\n";
    }
    return os.str();
}

std::string render_csv(const SuiteResult& r) {
    std::ostringstream os;
    os << "# config: " << to_json(r)["config_snapshot"].dump() << "\n";
    os << "ratio_label";
    for (const char* c : kColumns) os << "," << c;
    os << ",flags\n";
    for (const auto& row : r.rows) {
        os << row.ratio_label;
        for (const char* c : kColumns) os << "," << fmt("%.17g", column_value(row, c));
        os << ",";
        for (std::size_t i = 0; i < row.flags.size(); ++i) os << (i ? ";" : "") << row.flags[i];
        os << "\n";
    }
    return os.str();
}

}  // namespace

ReportFormat report_format_from(const std::string& s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    throw InvalidArgument("unknown format: " + s);
}

ScoreDataset parse_dataset(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&] {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next()) throw ParseError(1, "missing header");
    if (line != kHeader) throw ParseError(1, std::string("expected header '") + kHeader + "'");
    std::vector<PairRecord> pairs;
    while (next()) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            f.push_back(line.substr(start, pos - start));
        f.push_back(line.substr(start));
        if (f.size() != 4) throw ParseError(lineno, "expected 4 fields, got " + std::to_string(f.size()));
        PairRecord p;
        auto [end, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), p.distance);
        if (ec != std::errc() || end != f[0].data() + f[0].size() || f[0].empty())
            throw ParseError(lineno, "bad distance '" + f[0] + "'");
        if (f[1] == "1") p.is_genuine = true;
        else if (f[1] == "0") p.is_genuine = false;
        else throw ParseError(lineno, "is_genuine must be 0 or 1, got '" + f[1] + "'");
        if (f[2].empty() || f[3].empty()) throw ParseError(lineno, "empty group id");
        p.group_a = f[2];
        p.group_b = f[3];
        if (!std::isfinite(p.distance) || p.distance < 0.0)
            throw ValidationError("line " + std::to_string(lineno) + ": distance must be finite and >= 0");
        if (p.is_genuine && p.group_a != p.group_b)
            throw ValidationError("line " + std::to_string(lineno) + ": genuine pair spans groups " + p.group_a +
                                  " and " + p.group_b);
        pairs.push_back(std::move(p));
    }
    return ScoreDataset(std::move(pairs));
}

ScoreDataset load_dataset(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return parse_dataset(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line, path.string() + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string serialize_dataset(const ScoreDataset& ds) {
    std::string out = std::string(kHeader) + "\n";
    char buf[64];
    for (const auto& p : ds.pairs()) {
        std::snprintf(buf, sizeof buf, "%.17g", p.distance);
        out += buf;
        out += p.is_genuine ? ",1," : ",0,";
        out += p.group_a;
        out += ',';
        out += p.group_b;
        out += '\n';
    }
    return out;
}

void save_dataset(const ScoreDataset& ds, const fs::path& path) { write_file_atomic(path, serialize_dataset(ds)); }

SuiteDefinition suite_from_json(const json& j) {
    try {
        SuiteDefinition d;
        d.id = j.at("id").get<std::string>();
        d.title = j.value("title", std::string{});
        d.mode = mode_from(j.at("mode").get<std::string>());
        d.policy_fmr = j.at("policy_fmr").get<double>();
        d.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        for (const auto& s : d.scenarios) parse_ratios(s);
        for (const auto& p : j.value("properties", json::array())) d.properties.push_back(property_from_json(p));
        return d;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad suite definition: ") + e.what());
    }
}

json to_json(const SuiteDefinition& d) {
    json props = json::array();
    for (const auto& p : d.properties) props.push_back(to_json(p));
    return {{"id", d.id},           {"title", d.title},         {"mode", mode_name(d.mode)},
            {"policy_fmr", d.policy_fmr}, {"scenarios", d.scenarios}, {"properties", props}};
}

SuiteDefinition load_suite(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
    return suite_from_json(j);
}

SuiteDefinition resolve_suite(const std::string& name, const fs::path& dir) {
    if (name.find('/') == std::string::npos && name.find(".json") == std::string::npos) {
        fs::path p = dir / (name + ".json");
        if (!fs::exists(p)) throw IoError("unknown suite '" + name + "' (no " + p.string() + ")");
        return load_suite(p);
    }
    return load_suite(name);
}

json to_json(const ReportRow& row) {
    json j = {{"ratio_label", row.ratio_label}};
    for (const char* c : kColumns) j[c] = column_value(row, c);
    j["flags"] = row.flags;
    return j;
}

ReportRow row_from_json(const json& j) {
    ReportRow r;
    r.ratio_label = j.at("ratio_label").get<std::string>();
    r.ir = j.at("ir").get<double>();
    r.garbe = j.at("garbe").get<double>();
    r.fdr = j.at("fdr").get<double>();
    r.std_eer_g = j.at("std_eer_g").get<double>();
    r.sed_std = j.at("sed_std").get<double>();
    r.sed_mean = j.at("sed_mean").get<double>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    return r;
}

json to_json(const SuiteResult& r) {
    json rows = json::array(), props = json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    for (const auto& p : r.properties) props.push_back(to_json(p));
    return {{"suite_id", r.suite_id},
            {"seed", r.seed},
            {"config_snapshot",
             {{"metric_config", to_json(r.config)}, {"base_spec", to_json(r.base)}, {"suite", to_json(r.definition)}}},
            {"policy_threshold", r.policy_threshold},
            {"rows", rows},
            {"properties", props}};
}

SuiteResult suite_result_from_json(const json& j) {
    try {
        SuiteResult r;
        r.suite_id = j.at("suite_id").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        const auto& snap = j.at("config_snapshot");
        r.config = config_from_json(snap.at("metric_config"));
        r.base = spec_from_json(snap.at("base_spec"));
        r.definition = suite_from_json(snap.at("suite"));
        r.policy_threshold = j.at("policy_threshold").get<double>();
        for (const auto& row : j.at("rows")) r.rows.push_back(row_from_json(row));
        for (const auto& p : j.at("properties")) r.properties.push_back(outcome_from_json(p));
        return r;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad suite result: ") + e.what());
    }
}

SuiteResult load_suite_result(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
    return suite_result_from_json(j);
}

std::string render_report(const SuiteResult& r, ReportFormat f) {
    switch (f) {
        case ReportFormat::Json: return to_json(r).dump(2) + "\n";
        case ReportFormat::Csv: return render_csv(r);
        case ReportFormat::Markdown: return render_markdown(r);
    }
    return {};
}

void save_report(const SuiteResult& r, ReportFormat f, const fs::path& path) {
    write_file_atomic(path, render_report(r, f));
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fairbv
