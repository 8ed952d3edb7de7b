#include "dltrack/io.hpp"

#include <charconv>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dltrack::io {

Format parse_format(std::string_view s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw config_error("format must be csv or json (got '" + std::string(s) + "')");
}

std::string_view format_extension(Format f) { return f == Format::json ? ".json" : ".csv"; }

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, end);
}

std::string provenance_comment(const Provenance& p) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# config_hash=%016" PRIx64 " seed=%" PRIu64, p.config_hash, p.seed);
    return buf;
}

namespace {

std::string cell_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::to_string(std::get<long long>(c));
}

nlohmann::json cell_json(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_double(*d);
        return *d;
    }
    return std::get<long long>(c);
}

long long ll(std::size_t v) { return static_cast<long long>(v); }

}  // namespace

void write_table(std::ostream& os, const Table& t, Format fmt, const Provenance& p) {
    if (fmt == Format::csv) {
        os << provenance_comment(p) << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
            os << '\n';
        }
        return;
    }
    nlohmann::ordered_json j;
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, p.config_hash);
    j["config_hash"] = hash;
    j["seed"] = p.seed;
    j["columns"] = t.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r;
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    os << j.dump(1) << '\n';
}

void write_table_file(const std::string& path, const Table& t, Format fmt, const Provenance& p) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("cannot write '" + path + "'");
    write_table(os, t, fmt, p);
    os.flush();
    if (!os) throw io_error("error while writing '" + path + "'");
}

std::vector<Measurement> read_batch_csv(std::istream& is) {
    static constexpr std::string_view kHeader = "scan,t,x,y,amplitude,doppler";
    std::vector<Measurement> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kHeader) {
                throw data_error("line " + std::to_string(lineno) + ": expected header '" + std::string(kHeader) + "'",
                                 lineno);
            }
            header = true;
            continue;
        }
        double v[6];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 6; ++k) {
            auto [next, ec] = std::from_chars(p, end, v[k]);
            const bool last = k == 5;
            if (ec != std::errc() || (last ? next != end : (next == end || *next != ','))) {
                throw data_error("line " + std::to_string(lineno) + ": field " + std::to_string(k + 1) +
                                     " is not a number or the row does not have 6 fields",
                                 lineno);
            }
            p = last ? next : next + 1;
        }
        if (v[0] != static_cast<double>(static_cast<long long>(v[0])) || v[0] < 0) {
            throw data_error("line " + std::to_string(lineno) + ": scan must be a non-negative integer", lineno);
        }
        Measurement m;
        m.scan = static_cast<int>(v[0]);
        m.t = v[1];
        m.x = v[2];
        m.y = v[3];
        m.amplitude = v[4];
        m.doppler = v[5];
        out.push_back(m);
    }
    if (!header) throw data_error("missing header line", lineno);
    return out;
}

std::vector<Measurement> read_batch_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot read '" + path + "'");
    return read_batch_csv(is);
}

Table batch_table(const Batch& batch) {
    Table t{{"scan", "t", "x", "y", "amplitude", "doppler"}, {}};
    for (const auto& m : batch.measurements()) {
        t.rows.push_back({static_cast<long long>(m.scan), m.t, m.x, m.y, m.amplitude, m.doppler});
    }
    return t;
}

Table truth_table(const GroundTruth& truth) {
    Table t{{"target_id", "x0", "y0", "vx", "vy", "a_mean"}, {}};
    for (std::size_t j = 0; j < truth.targets.size(); ++j) {
        const auto& g = truth.targets[j];
        t.rows.push_back({ll(j), g.x0, g.y0, g.vx, g.vy, g.amplitude});
    }
    return t;
}

Table truth_mapping_table(const GroundTruth& truth) {
    Table t{{"measurement_index", "target_id"}, {}};
    for (std::size_t n = 0; n < truth.target_of.size(); ++n) {
        if (truth.target_of[n] >= 0) t.rows.push_back({ll(n), static_cast<long long>(truth.target_of[n])});
    }
    return t;
}

Table detection_table(const DetectionReport& rep, const HypothesisSet& hs) {
    Table t{{"track_id", "llr", "gate_size", "detected", "x0", "y0", "vx", "vy", "a", "d"}, {}};
    for (const auto& d : rep.tracks) {
        const auto& h = hs[d.column];
        t.rows.push_back({static_cast<long long>(d.track_id), d.llr, ll(d.gate.size()),
                          static_cast<long long>(d.detected ? 1 : 0), h.x0, h.y0, h.vx, h.vy, h.amplitude, h.doppler});
    }
    return t;
}

Table trace_table(const IterationTrace& trace) {
    Table t{{"iteration", "loglik", "num_active", "num_dormant", "clutter_prior", "activated", "eliminated", "pruned",
             "withdrawn", "spawned", "unjustified", "pdf_evaluations", "update_ops"},
            {}};
    for (const auto& r : trace.records) {
        const double clutter = r.hypotheses.empty() ? 0.0 : r.hypotheses.front().prior;
        t.rows.push_back({static_cast<long long>(r.iteration), r.loglik, ll(r.num_active), ll(r.num_dormant), clutter,
                          static_cast<long long>(r.events.activated), static_cast<long long>(r.events.eliminated),
                          static_cast<long long>(r.events.pruned), static_cast<long long>(r.events.withdrawn),
                          static_cast<long long>(r.events.spawned), static_cast<long long>(r.events.unjustified),
                          static_cast<long long>(r.ops.pdf_evaluations),
                          static_cast<long long>(r.ops.update_ops)});
    }
    return t;
}

Table trace_hypotheses_table(const IterationTrace& trace) {
    Table t{{"iteration", "hypothesis_id", "status", "prior", "sigma_x", "sigma_y", "sigma_a", "sigma_d"}, {}};
    for (const auto& r : trace.records) {
        for (const auto& h : r.hypotheses) {
            t.rows.push_back({static_cast<long long>(r.iteration), static_cast<long long>(h.id),
                              std::string(status_name(h.status)), h.prior, h.sigma[0], h.sigma[1], h.sigma[2],
                              h.sigma[3]});
        }
    }
    return t;
}

Table hypotheses_table(const HypothesisSet& hs) {
    Table t{{"hypothesis_id", "status", "prior", "x0", "y0", "vx", "vy", "a", "d", "sigma_x", "sigma_y", "sigma_a",
             "sigma_d", "age"},
            {}};
    for (const auto& h : hs.hypotheses) {
        t.rows.push_back({static_cast<long long>(h.id), std::string(status_name(h.status)), h.prior, h.x0, h.y0, h.vx,
                          h.vy, h.amplitude, h.doppler, h.sigma[0], h.sigma[1], h.sigma[2], h.sigma[3],
                          static_cast<long long>(h.age)});
    }
    return t;
}

Table association_table(const AssociationMatrix& f, const HypothesisSet& hs) {
    Table t;
    t.columns.push_back("measurement_index");
    for (const auto& h : hs.hypotheses) t.columns.push_back("h" + std::to_string(h.id));
    for (std::size_t n = 0; n < f.rows(); ++n) {
        std::vector<Cell> row{ll(n)};
        for (std::size_t h = 0; h < f.cols(); ++h) row.push_back(f(n, h));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table roc_table(int clutter_per_scan, const std::vector<RocPoint>& pts) {
    Table t{{"clutter_per_scan", "threshold", "pd", "pfa_per_batch", "pfa_per_area", "trials"}, {}};
    for (const auto& p : pts) {
        t.rows.push_back({static_cast<long long>(clutter_per_scan), p.llr_threshold, p.pd, p.pfa_per_batch,
                          p.pfa_per_area, static_cast<long long>(p.trials)});
    }
    return t;
}

Table complexity_table(const ComplexityReport& rep) {
    Table t{{"N", "H", "iters", "ops_per_iter", "wall_ms"}, {}};
    for (const auto* sweep : {&rep.n_sweep, &rep.h_sweep}) {
        for (const auto& r : *sweep) {
            t.rows.push_back({ll(r.n), ll(r.h), static_cast<long long>(r.iterations), r.ops_per_iter, r.wall_ms});
        }
    }
    return t;
}

}  // namespace dltrack::io
