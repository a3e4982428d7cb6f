#include "carbonci/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "carbonci/error.hpp"

namespace carbonci::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(begin)));
            break;
        }
        fields.push_back(trim(line.substr(begin, comma - begin)));
        begin = comma + 1;
    }
    return fields;
}

std::string where(const std::string& name, std::size_t line_no) {
    return name + ":" + std::to_string(line_no);
}

double parse_number(std::string_view field, const std::string& name, std::size_t line_no, std::string_view column) {
    double value = 0.0;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError, where(name, line_no) + ": column '" + std::string(column) +
                                               "' holds non-numeric value '" + std::string(field) + "'");
    }
    return value;
}

HourlyStamp parse_stamp(std::string_view field, const std::string& name, std::size_t line_no) {
    try {
        return HourlyStamp::parse(field);
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, where(name, line_no) + ": " + e.what());
    }
}

/// Reads non-blank, non-comment lines. The first is the header.
struct CsvReader {
    std::istream& in;
    std::string name;
    std::size_t line_no = 0;
    std::string line;

    CsvReader(std::istream& in_, std::string name_) : in(in_), name(std::move(name_)) {}

    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in, line)) {
            ++line_no;
            const std::string_view t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            fields = split_fields(t);
            return true;
        }
        return false;
    }
};

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    return in;
}

template <typename Row>
struct Stamped {
    HourlyStamp stamp;
    Row row;
    std::size_t line_no;
};

/// Sorts by stamp, rejects duplicates, forward-fills short gaps.
template <typename Row>
std::vector<Stamped<Row>> fill_gaps(std::vector<Stamped<Row>> rows, const std::string& name, FillLog& log,
                                    std::vector<bool>& filled_flags) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.stamp < b.stamp; });
    std::vector<Stamped<Row>> out;
    filled_flags.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            const std::int64_t missing = rows[i].stamp - rows[i - 1].stamp - 1;
            if (missing < 0) {
                throw Error(ErrorCode::ParseError, where(name, rows[i].line_no) + ": duplicate timestamp " +
                                                       rows[i].stamp.to_iso());
            }
            if (missing > kMaxFillGapHours) {
                throw Error(ErrorCode::GapTooLarge,
                            name + ": " + std::to_string(missing) + " missing hours in [" +
                                (rows[i - 1].stamp + 1).to_iso() + ", " + rows[i].stamp.to_iso() + ")");
            }
            for (std::int64_t k = 1; k <= missing; ++k) {
                Stamped<Row> copy = out.back();
                copy.stamp = rows[i - 1].stamp + k;
                log.filled.push_back(copy.stamp);
                out.push_back(std::move(copy));
                filled_flags.push_back(true);
            }
        }
        out.push_back(rows[i]);
        filled_flags.push_back(false);
    }
    return out;
}

void require_header(bool ok, const std::string& name) {
    if (!ok) {
        throw Error(ErrorCode::ParseError, name + ": missing header row");
    }
}

} // namespace

bool FillLog::contains(HourlyStamp t) const {
    return std::binary_search(filled.begin(), filled.end(), t);
}

void FillLog::merge(const FillLog& other) {
    filled.insert(filled.end(), other.filled.begin(), other.filled.end());
    std::sort(filled.begin(), filled.end());
    filled.erase(std::unique(filled.begin(), filled.end()), filled.end());
}

EmissionFactorTable::EmissionFactorTable(std::map<std::string, double> factors) : factors_(std::move(factors)) {
    for (const auto& [source, f] : factors_) {
        if (!std::isfinite(f) || f < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "emission factor for '" + source + "' must be finite and >= 0");
        }
    }
}

double EmissionFactorTable::factor(const std::string& source) const {
    const auto it = factors_.find(source);
    if (it == factors_.end()) {
        throw Error(ErrorCode::MissingFactor, "no emission factor for source '" + source + "'");
    }
    return it->second;
}

PowerTrace::PowerTrace(RegionId region_, HourlyStamp start_, std::vector<double> normalized_, double peak_mw_)
    : region(std::move(region_)), start(start_), normalized(std::move(normalized_)), peak_mw(peak_mw_) {
    if (!(peak_mw > 0.0) || !std::isfinite(peak_mw)) {
        throw Error(ErrorCode::InvalidArgument, "peak power must be positive");
    }
    if (normalized.empty()) {
        throw Error(ErrorCode::EmptyInput, "power trace is empty");
    }
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        if (!(normalized[i] >= 0.0 && normalized[i] <= 1.0)) {
            throw Error(ErrorCode::ValueOutOfUnitRange,
                        "normalized power outside [0,1] at " + (start + static_cast<std::int64_t>(i)).to_iso());
        }
    }
}

MixTable parse_mix_table(std::istream& in, const std::string& name) {
    CsvReader reader{in, name};
    std::vector<std::string_view> fields;
    require_header(reader.next(fields), name);
    if (fields.size() < 2) {
        throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": mix header needs at least one source");
    }
    MixTable table;
    for (std::size_t c = 1; c < fields.size(); ++c) {
        if (fields[c].empty()) {
            throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": empty source name");
        }
        table.sources.emplace_back(fields[c]);
    }

    std::vector<Stamped<std::vector<double>>> raw;
    while (reader.next(fields)) {
        if (fields.size() != table.sources.size() + 1) {
            throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": expected " +
                                                   std::to_string(table.sources.size() + 1) + " columns, found " +
                                                   std::to_string(fields.size()));
        }
        Stamped<std::vector<double>> row{parse_stamp(fields[0], name, reader.line_no), {}, reader.line_no};
        for (std::size_t c = 0; c < table.sources.size(); ++c) {
            const double v = parse_number(fields[c + 1], name, reader.line_no, table.sources[c]);
            if (v < 0.0) {
                throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": column '" + table.sources[c] +
                                                       "' has negative generation " + std::string(fields[c + 1]));
            }
            row.row.push_back(v);
        }
        raw.push_back(std::move(row));
    }
    if (raw.empty()) {
        throw Error(ErrorCode::ParseError, name + ": no data rows");
    }

    std::vector<bool> flags;
    const auto rows = fill_gaps(std::move(raw), name, table.fills, flags);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SourceMixRow out{rows[i].stamp, {}, flags[i]};
        for (std::size_t c = 0; c < table.sources.size(); ++c) {
            out.generation[table.sources[c]] = rows[i].row[c];
        }
        table.rows.push_back(std::move(out));
    }
    return table;
}

MixTable parse_mix_table(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_mix_table(in, path.string());
}

HourlySeries mix_to_carbon_intensity(const std::vector<SourceMixRow>& rows, const EmissionFactorTable& factors,
                                     const RegionId& region) {
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyInput, "no mix rows");
    }
    std::vector<double> ci;
    ci.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].stamp != rows[i - 1].stamp + 1) {
            throw Error(ErrorCode::AlignmentError, "mix rows are not contiguous at " + rows[i].stamp.to_iso());
        }
        double weighted = 0.0;
        double total = 0.0;
        for (const auto& [source, mwh] : rows[i].generation) {
            const double f = factors.factor(source);
            weighted += mwh * f;
            total += mwh;
        }
        if (!(total > 0.0)) {
            throw Error(ErrorCode::ZeroGeneration, "total generation is zero at " + rows[i].stamp.to_iso());
        }
        ci.push_back(weighted / total);
    }
    return HourlySeries(region, rows.front().stamp, std::move(ci), Unit::GramsPerKwh);
}

HourlySeries mix_to_carbon_intensity(const MixTable& mix, const EmissionFactorTable& factors, const RegionId& region) {
    return mix_to_carbon_intensity(mix.rows, factors, region);
}

EmissionFactorTable parse_emission_factors(std::istream& in, const std::string& name) {
    CsvReader reader{in, name};
    std::vector<std::string_view> fields;
    require_header(reader.next(fields), name);
    std::map<std::string, double> factors;
    while (reader.next(fields)) {
        if (fields.size() != 2 || fields[0].empty()) {
            throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": expected 'source,g_per_kwh'");
        }
        const double f = parse_number(fields[1], name, reader.line_no, "g_per_kwh");
        if (f < 0.0) {
            throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": negative emission factor");
        }
        if (!factors.emplace(std::string(fields[0]), f).second) {
            throw Error(ErrorCode::ParseError,
                        where(name, reader.line_no) + ": duplicate source '" + std::string(fields[0]) + "'");
        }
    }
    return EmissionFactorTable(std::move(factors));
}

EmissionFactorTable parse_emission_factors(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_emission_factors(in, path.string());
}

namespace {

/// Shared reader for `timestamp,value` files.
std::pair<std::vector<Stamped<double>>, std::string> read_two_column(std::istream& in, const std::string& name) {
    CsvReader reader{in, name};
    std::vector<std::string_view> fields;
    require_header(reader.next(fields), name);
    if (fields.size() != 2) {
        throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": expected two header columns");
    }
    std::string column(fields[1]);
    std::vector<Stamped<double>> raw;
    while (reader.next(fields)) {
        if (fields.size() != 2) {
            throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": expected 2 columns, found " +
                                                   std::to_string(fields.size()));
        }
        raw.push_back({parse_stamp(fields[0], name, reader.line_no),
                       parse_number(fields[1], name, reader.line_no, column), reader.line_no});
    }
    if (raw.empty()) {
        throw Error(ErrorCode::ParseError, name + ": no data rows");
    }
    return {std::move(raw), std::move(column)};
}

} // namespace

SeriesTable parse_truth_table(std::istream& in, const std::string& name, const RegionId& region) {
    auto [raw, column] = read_two_column(in, name);
    for (const auto& r : raw) {
        if (r.row < 0.0) {
            throw Error(ErrorCode::ParseError, where(name, r.line_no) + ": column '" + column +
                                                   "' has negative carbon intensity");
        }
    }
    FillLog log;
    std::vector<bool> flags;
    const auto rows = fill_gaps(std::move(raw), name, log, flags);
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(r.row);
    return SeriesTable{HourlySeries(region, rows.front().stamp, std::move(values), Unit::GramsPerKwh), std::move(log)};
}

SeriesTable parse_truth_table(const std::filesystem::path& path, const RegionId& region) {
    auto in = open_input(path);
    return parse_truth_table(in, path.string(), region);
}

std::vector<ForecastBatch> parse_forecast_table(std::istream& in, const std::string& name, const RegionId& region) {
    CsvReader reader{in, name};
    std::vector<std::string_view> fields;
    require_header(reader.next(fields), name);
    if (fields.size() < 2) {
        throw Error(ErrorCode::ParseError, where(name, reader.line_no) + ": forecast header needs h1..hH columns");
    }
    const std::size_t horizon = fields.size() - 1;
    std::vector<Stamped<std::vector<double>>> raw;
    while (reader.next(fields)) {
        if (fields.size() != horizon + 1) {
            throw Error(ErrorCode::InconsistentHorizon, where(name, reader.line_no) + ": row has " +
                                                            std::to_string(fields.size() - 1) +
                                                            " predictions, header declares " + std::to_string(horizon));
        }
        Stamped<std::vector<double>> row{parse_stamp(fields[0], name, reader.line_no), {}, reader.line_no};
        row.row.reserve(horizon);
        for (std::size_t c = 1; c <= horizon; ++c) {
            row.row.push_back(parse_number(fields[c], name, reader.line_no, "h" + std::to_string(c)));
        }
        raw.push_back(std::move(row));
    }
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.stamp < b.stamp; });
    std::vector<ForecastBatch> batches;
    batches.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0 && raw[i].stamp == raw[i - 1].stamp) {
            throw Error(ErrorCode::ParseError, where(name, raw[i].line_no) + ": duplicate origin " +
                                                   raw[i].stamp.to_iso());
        }
        batches.emplace_back(region, raw[i].stamp, std::move(raw[i].row));
    }
    return batches;
}

std::vector<ForecastBatch> parse_forecast_table(const std::filesystem::path& path, const RegionId& region) {
    auto in = open_input(path);
    return parse_forecast_table(in, path.string(), region);
}

PowerTrace parse_power_trace(std::istream& in, const std::string& name, const RegionId& region, double peak_mw) {
    auto [raw, column] = read_two_column(in, name);
    for (const auto& r : raw) {
        if (!(r.row >= 0.0 && r.row <= 1.0)) {
            throw Error(ErrorCode::ValueOutOfUnitRange,
                        where(name, r.line_no) + ": normalized power " + format_double(r.row) + " outside [0,1]");
        }
    }
    FillLog log;
    std::vector<bool> flags;
    const auto rows = fill_gaps(std::move(raw), name, log, flags);
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(r.row);
    return PowerTrace(region, rows.front().stamp, std::move(values), peak_mw);
}

PowerTrace parse_power_trace(const std::filesystem::path& path, const RegionId& region, double peak_mw) {
    auto in = open_input(path);
    return parse_power_trace(in, path.string(), region, peak_mw);
}

FillLog parse_fill_log(const std::filesystem::path& path, const std::string& table_prefix) {
    auto in = open_input(path);
    CsvReader reader{in, path.string()};
    std::vector<std::string_view> fields;
    FillLog log;
    if (!reader.next(fields)) return log;
    while (reader.next(fields)) {
        if (fields.size() != 3) {
            throw Error(ErrorCode::ParseError, where(reader.name, reader.line_no) + ": expected 'table,timestamp,filled'");
        }
        if (fields[2] == "true" && fields[0].substr(0, table_prefix.size()) == table_prefix) {
            log.filled.push_back(parse_stamp(fields[1], reader.name, reader.line_no));
        }
    }
    std::sort(log.filled.begin(), log.filled.end());
    log.filled.erase(std::unique(log.filled.begin(), log.filled.end()), log.filled.end());
    return log;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_mix_table(std::ostream& out, const MixTable& mix) {
    out << "timestamp";
    for (const auto& s : mix.sources) out << ',' << s;
    out << '\n';
    for (const auto& row : mix.rows) {
        out << row.stamp.to_iso();
        for (const auto& s : mix.sources) out << ',' << format_double(row.generation.at(s));
        out << '\n';
    }
}

void write_series(std::ostream& out, const HourlySeries& series, const std::string& value_column) {
    out << "timestamp," << value_column << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << (series.start() + static_cast<std::int64_t>(i)).to_iso() << ',' << format_double(series[i]) << '\n';
    }
}

void write_forecast_table(std::ostream& out, const std::vector<ForecastBatch>& batches) {
    if (batches.empty()) {
        throw Error(ErrorCode::EmptyInput, "no forecast batches to write");
    }
    const int horizon = batches.front().horizon();
    out << "origin_timestamp";
    for (int h = 1; h <= horizon; ++h) out << ",h" << h;
    out << '\n';
    for (const auto& b : batches) {
        if (b.horizon() != horizon) {
            throw Error(ErrorCode::InconsistentHorizon, "batches mix horizons");
        }
        out << b.origin.to_iso();
        for (double v : b.predictions) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_power_trace(std::ostream& out, const PowerTrace& trace) {
    out << "timestamp,normalized_power\n";
    for (std::size_t i = 0; i < trace.normalized.size(); ++i) {
        out << (trace.start + static_cast<std::int64_t>(i)).to_iso() << ',' << format_double(trace.normalized[i])
            << '\n';
    }
}

void write_fill_log(std::ostream& out, const FillLog& log, const std::string& table) {
    for (HourlyStamp t : log.filled) {
        out << table << ',' << t.to_iso() << ",true\n";
    }
}

} // namespace carbonci::ingest
