#include "carbonci/interval_file.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "carbonci/error.hpp"
#include "carbonci/ingest.hpp"

namespace carbonci {

void write_interval_file(std::ostream& out, const IntervalSeries& intervals, const std::vector<double>& points,
                         const std::vector<std::optional<double>>& truths) {
    if (points.size() != intervals.size() || truths.size() != intervals.size()) {
        throw Error(ErrorCode::LengthMismatch, "interval, point and truth columns differ in length");
    }
    using ingest::format_double;
    out << "target_timestamp,alpha,lower,upper,point_forecast,truth\n";
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const Interval& iv = intervals[i];
        out << (intervals.start() + static_cast<std::int64_t>(i)).to_iso() << ',' << format_double(iv.alpha) << ','
            << format_double(iv.lower) << ',' << format_double(iv.upper) << ',' << format_double(points[i]) << ',';
        if (truths[i]) out << format_double(*truths[i]);
        out << '\n';
    }
}

std::vector<IntervalRecord> read_interval_file(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<IntervalRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 6) {
            throw Error(ErrorCode::ParseError, name + ":" + std::to_string(line_no) + ": expected 6 columns");
        }
        try {
            IntervalRecord r;
            r.target = HourlyStamp::parse(f[0]);
            r.interval = Interval(std::stod(f[2]), std::stod(f[3]), std::stod(f[1]));
            r.point_forecast = std::stod(f[4]);
            if (!f[5].empty()) r.truth = std::stod(f[5]);
            if (!out.empty() && r.target != out.back().target + 1) {
                throw Error(ErrorCode::AlignmentError, "interval rows are not consecutive hours");
            }
            out.push_back(r);
        } catch (const Error& e) {
            throw Error(e.code(), name + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, name + ":" + std::to_string(line_no) + ": malformed number");
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::ParseError, name + ": no interval rows");
    }
    return out;
}

std::vector<IntervalRecord> read_interval_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    return read_interval_file(in, path.string());
}

} // namespace carbonci
