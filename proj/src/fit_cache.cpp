#include "rebound/fit_cache.hpp"

#include <fstream>
#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"

namespace rebound {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

std::uint64_t fit_config_hash(const WindowRules& rules, const OptimizerConfig& cfg,
                              double tc_range_factor) {
    std::string s;
    s += std::to_string(rules.dt1_step) + '|' + std::to_string(rules.dt2_step) + '|' +
         std::to_string(rules.dt_min) + '|' + std::to_string(rules.dt_max) + '|';
    s += std::to_string(cfg.tabu_iterations) + '|' + std::to_string(cfg.tabu_neighbors) + '|' +
         std::to_string(cfg.tabu_list_size) + '|' + std::to_string(cfg.lm_max_iterations) + '|' +
         csv::format_double(cfg.lm_tolerance) + '|' + std::to_string(cfg.seed) + '|' +
         std::to_string(cfg.restarts) + '|' + csv::format_double(tc_range_factor);
    return fnv1a(s);
}

std::string FitCache::header() {
    return "config_hash,t1,t2,n_obs,A,B,C,m,omega,phi,tc,q,b,status\n";
}

std::string FitCache::format_line(const Key& k, const Entry& e) {
    char hash_hex[20];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(k.config_hash));
    std::string line = std::string(hash_hex) + ',' + format_date(k.t1) + ',' + format_date(k.t2);
    if (e.fit) {
        const LpplFit& f = *e.fit;
        line += ',' + std::to_string(f.n_obs);
        for (double v : {f.params.A, f.params.B, f.params.C, f.params.m, f.params.omega,
                         f.params.phi, f.params.tc, f.residual_q, f.b})
            line += ',' + csv::format_double(v);
        line += ",ok";
    } else {
        line += ",0,0,0,0,0,0,0,0,0,0,failed";
    }
    return line + '\n';
}

FitCache FitCache::load(const std::string& path) {
    FitCache cache;
    if (!csv::file_exists(path)) return cache;
    const std::string content = csv::read_file(path);
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (line.rfind("config_hash", 0) == 0) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != 14)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 14 fields in fit cache");
        Key k{};
        k.config_hash = std::stoull(fields[0], nullptr, 16);
        k.t1 = parse_date(fields[1]);
        k.t2 = parse_date(fields[2]);
        Entry e;
        if (fields[13] == "ok") {
            LpplFit f;
            f.window = {k.t1, k.t2};
            f.n_obs = std::stoi(fields[3]);
            const std::string ctx = path + ":" + std::to_string(line_no);
            f.params.A = csv::parse_double(fields[4], ctx);
            f.params.B = csv::parse_double(fields[5], ctx);
            f.params.C = csv::parse_double(fields[6], ctx);
            f.params.m = csv::parse_double(fields[7], ctx);
            f.params.omega = csv::parse_double(fields[8], ctx);
            f.params.phi = csv::parse_double(fields[9], ctx);
            f.params.tc = csv::parse_double(fields[10], ctx);
            f.residual_q = csv::parse_double(fields[11], ctx);
            f.b = csv::parse_double(fields[12], ctx);
            e.fit = f;
        } else if (fields[13] != "failed") {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown status '" +
                             fields[13] + "'");
        }
        cache.entries_[k] = std::move(e);
    }
    return cache;
}

const FitCache::Entry* FitCache::find(const Key& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : &it->second;
}

void FitCache::append(const std::string& path, const Key& k, const Entry& e) {
    const bool fresh = !csv::file_exists(path);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to fit cache: " + path);
    if (fresh) out << header();
    out << format_line(k, e);
    if (!out) throw IoError("short write to fit cache: " + path);
    entries_[k] = e;
}

std::vector<LpplFit> collect_fits(const FitCache& cache, std::uint64_t config_hash) {
    std::vector<LpplFit> fits;
    // entries_ is ordered by key, so fits come out in window order
    for (const auto& [k, e] : cache.entries()) {
        if (k.config_hash != config_hash || !e.fit) continue;
        fits.push_back(*e.fit);
    }
    return fits;
}

} // namespace rebound
