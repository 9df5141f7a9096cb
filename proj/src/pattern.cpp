#include "rebound/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rebound/csv.hpp"
#include "rebound/errors.hpp"
#include "rebound/kde.hpp"
#include "rebound/optimizer.hpp"

namespace rebound {

ClassLabel assign_class(const LpplFit& fit, const ReboundSet& rebounds, double proximity_days) {
    return is_near(fit.params.tc, rebounds, proximity_days) ? ClassLabel::ClassI
                                                            : ClassLabel::ClassII;
}

int assign_group(int length_days) {
    if (length_days < 100 || length_days > 100 * kNumGroups + 100)
        throw ValidationError("assign_group: window length " + std::to_string(length_days) +
                              " outside [100, 1500]");
    int i = length_days % 100 == 0 ? length_days / 100 - 1 : length_days / 100;
    return std::clamp(i, 1, kNumGroups);
}

int assign_group(const LpplFit& fit) { return assign_group(fit.length()); }

double fit_param_value(const LpplFit& fit, int param_index) {
    switch (param_index) {
        case 1: return fit.params.m;
        case 2: return fit.params.omega;
        case 3: return fit.params.phi;
        case 4: return fit.params.B;
        case 5: return fit.b;
        case 6: return fit.residual_q;
        default:
            throw ValidationError("fit_param_value: index " + std::to_string(param_index) +
                                  " outside 1..6");
    }
}

const char* fit_param_name(int param_index) {
    static constexpr const char* names[] = {"m", "omega", "phi", "B", "b", "q"};
    if (param_index < 1 || param_index > 6)
        throw ValidationError("fit_param_name: index outside 1..6");
    return names[param_index - 1];
}

bool InformativeParam::in_good_region(double x) const {
    for (const auto& iv : good_region)
        if (x >= iv.lo && x <= iv.hi) return true;
    return false;
}

namespace {

// Allowed abscissa range per parameter: the search bounds for m, omega, phi;
// the observed sample range for the unbounded B, b, q.
Interval allowed_range(int param_index, const Eigen::VectorXd& combined_samples) {
    const SearchBounds b;
    switch (param_index) {
        case 1: return {b.lo[0], b.hi[0]};
        case 2: return {b.lo[1], b.hi[1]};
        case 3: return {b.lo[2], b.hi[2]};
        default:
            return {combined_samples.minCoeff(), combined_samples.maxCoeff()};
    }
}

std::vector<Interval> good_region_on_grid(const Pdf& pdf_I, const Pdf& pdf_II, Interval allowed,
                                          int grid_points) {
    const double lo = std::max(allowed.lo, std::min(pdf_I.lo(), pdf_II.lo()));
    const double hi = std::min(allowed.hi, std::max(pdf_I.hi(), pdf_II.hi()));
    std::vector<Interval> region;
    if (!(lo < hi)) return region;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    bool inside = false;
    double start = lo;
    for (int g = 0; g < grid_points; ++g) {
        const double x = lo + step * g;
        const bool good = pdf_I.density_at(x) > pdf_II.density_at(x);
        if (good && !inside) {
            inside = true;
            start = x;
        } else if (!good && inside) {
            inside = false;
            region.push_back({start, lo + step * (g - 1)});
        }
    }
    if (inside) region.push_back({start, hi});
    return region;
}

} // namespace

std::vector<InformativeParam> find_informative_params(const std::vector<LpplFit>& learning_fits,
                                                      const ReboundSet& rebounds,
                                                      double proximity_days, double ks_threshold,
                                                      int kde_grid) {
    // bucket parameter values by (group, class)
    std::vector<std::array<std::vector<double>, 2>> values(
        static_cast<std::size_t>(kNumGroups * kNumFitParams));
    for (const auto& fit : learning_fits) {
        const int group = assign_group(fit);
        const int cls = assign_class(fit, rebounds, proximity_days) == ClassLabel::ClassI ? 0 : 1;
        for (int j = 1; j <= kNumFitParams; ++j)
            values[static_cast<std::size_t>((group - 1) * kNumFitParams + (j - 1))][cls]
                .push_back(fit_param_value(fit, j));
    }

    std::vector<InformativeParam> out;
    for (int group = 1; group <= kNumGroups; ++group) {
        for (int j = 1; j <= kNumFitParams; ++j) {
            const auto& bucket = values[static_cast<std::size_t>((group - 1) * kNumFitParams +
                                                                 (j - 1))];
            // a class without enough samples for a density leaves this pair unusable
            if (bucket[0].size() < 2 || bucket[1].size() < 2) continue;
            const Eigen::Map<const Eigen::VectorXd> s_I(bucket[0].data(), bucket[0].size());
            const Eigen::Map<const Eigen::VectorXd> s_II(bucket[1].data(), bucket[1].size());
            const Pdf pdf_I = adaptive_kde(s_I, kde_grid);
            const Pdf pdf_II = adaptive_kde(s_II, kde_grid);
            const double ks = ks_distance(pdf_I, pdf_II);
            if (ks <= ks_threshold) continue;

            Eigen::VectorXd combined(s_I.size() + s_II.size());
            combined << s_I, s_II;
            InformativeParam ip;
            ip.group = group;
            ip.param_index = j;
            ip.id = kNumFitParams * group + j;
            ip.ks = ks;
            ip.good_region =
                good_region_on_grid(pdf_I, pdf_II, allowed_range(j, combined), kde_grid);
            out.push_back(std::move(ip));
        }
    }
    return out;
}

namespace {

// per-group view of a fit subset, sorted by critical time
struct GroupedFits {
    std::array<std::vector<const LpplFit*>, kNumGroups> by_group;

    static GroupedFits build(const std::vector<LpplFit>& fits) {
        GroupedFits g;
        for (const auto& f : fits)
            g.by_group[static_cast<std::size_t>(assign_group(f) - 1)].push_back(&f);
        for (auto& v : g.by_group)
            std::sort(v.begin(), v.end(), [](const LpplFit* a, const LpplFit* b) {
                return a->params.tc < b->params.tc;
            });
        return g;
    }

    // members of `group` with |tc - t| <= D
    template <typename Fn>
    void near(int group, double t, double D, Fn&& fn) const {
        const auto& v = by_group[static_cast<std::size_t>(group - 1)];
        auto it = std::lower_bound(v.begin(), v.end(), t - D,
                                   [](const LpplFit* f, double x) { return f->params.tc < x; });
        for (; it != v.end() && (*it)->params.tc <= t + D; ++it) fn(**it);
    }
};

std::int8_t answer_for(const GroupedFits& grouped, const InformativeParam& ip, double t_scan,
                       double D) {
    int p_in = 0, p_out = 0;
    grouped.near(ip.group, t_scan, D, [&](const LpplFit& f) {
        if (ip.in_good_region(fit_param_value(f, ip.param_index)))
            ++p_in;
        else
            ++p_out;
    });
    if (p_in > p_out) return 1;
    if (p_in < p_out) return -1;
    return 0;
}

} // namespace

Questionnaire build_questionnaire(Day t_scan, const std::vector<LpplFit>& fits,
                                  const std::vector<InformativeParam>& ips,
                                  double proximity_days) {
    const GroupedFits grouped = GroupedFits::build(fits);
    Questionnaire q;
    q.t_scan = t_scan;
    q.answers.reserve(ips.size());
    for (const auto& ip : ips)
        q.answers.push_back(answer_for(grouped, ip, static_cast<double>(t_scan), proximity_days));
    return q;
}

TraitKey encode_trait(const Trait& t) {
    auto enc = [](int v) { return static_cast<TraitKey>(v + 1); }; // {-1,0,1} -> {0,1,2}
    TraitKey key = static_cast<TraitKey>(t.p);
    key = key * 128 + static_cast<TraitKey>(t.q);
    key = key * 128 + static_cast<TraitKey>(t.r);
    key = key * 4 + (t.arity >= 1 ? enc(t.values[0]) : 3u);
    key = key * 4 + (t.arity >= 2 ? enc(t.values[1]) : 3u);
    key = key * 4 + (t.arity >= 3 ? enc(t.values[2]) : 3u);
    return key;
}

Trait decode_trait(TraitKey key) {
    Trait t;
    auto dec = [](TraitKey v) { return static_cast<int>(v) - 1; };
    const TraitKey v3 = key % 4; key /= 4;
    const TraitKey v2 = key % 4; key /= 4;
    const TraitKey v1 = key % 4; key /= 4;
    t.r = static_cast<int>(key % 128); key /= 128;
    t.q = static_cast<int>(key % 128); key /= 128;
    t.p = static_cast<int>(key);
    t.arity = 1 + (v2 != 3 ? 1 : 0) + (v3 != 3 ? 1 : 0);
    t.values[0] = dec(v1);
    if (v2 != 3) t.values[1] = dec(v2);
    if (v3 != 3) t.values[2] = dec(v3);
    return t;
}

std::vector<TraitKey> enumerate_traits(const Questionnaire& q) {
    const int L = static_cast<int>(q.answers.size());
    std::vector<TraitKey> out;
    out.reserve(trait_count_for_length(static_cast<std::size_t>(L)));
    Trait t;
    for (int i = 1; i <= L; ++i) {
        t = {i, i, i, {q.answers[i - 1], 0, 0}, 1};
        out.push_back(encode_trait(t));
    }
    for (int i = 1; i <= L; ++i)
        for (int j = i + 1; j <= L; ++j) {
            t = {i, j, j, {q.answers[i - 1], q.answers[j - 1], 0}, 2};
            out.push_back(encode_trait(t));
        }
    for (int i = 1; i <= L; ++i)
        for (int j = i + 1; j <= L; ++j)
            for (int k = j + 1; k <= L; ++k) {
                t = {i, j, k, {q.answers[i - 1], q.answers[j - 1], q.answers[k - 1]}, 3};
                out.push_back(encode_trait(t));
            }
    return out;
}

std::size_t trait_count_for_length(std::size_t L) {
    return L + L * (L - 1) / 2 + L * (L - 1) * (L - 2) / 6;
}

FeatureSet extract_features(const TraitBags& bags, FeatureQualification q) {
    FeatureSet out;
    out.qualification = q;
    auto count_in = [](const std::unordered_map<TraitKey, int>& m, TraitKey k) {
        auto it = m.find(k);
        return it == m.end() ? 0 : it->second;
    };
    std::unordered_set<TraitKey> keys;
    for (const auto& [k, _] : bags.count_I) keys.insert(k);
    for (const auto& [k, _] : bags.count_II) keys.insert(k);
    for (TraitKey k : keys) {
        const int ci = count_in(bags.count_I, k);
        const int cii = count_in(bags.count_II, k);
        if (ci > q.alpha && cii < q.beta) {
            out.class_I.insert(k);
            out.counts[k] = {ci, cii};
        } else if (ci <= q.alpha && cii >= q.beta) {
            out.class_II.insert(k);
            out.counts[k] = {ci, cii};
        }
    }
    return out;
}

double alarm_index(const std::vector<TraitKey>& traits, const FeatureSet& features) {
    std::size_t nu_I = 0, nu_II = 0;
    for (TraitKey k : traits) {
        if (features.class_I.count(k))
            ++nu_I;
        else if (features.class_II.count(k))
            ++nu_II;
    }
    if (nu_I + nu_II == 0) return 0.0;
    return static_cast<double>(nu_I) / static_cast<double>(nu_I + nu_II);
}

std::string alarm_series_to_csv(const AlarmSeries& s) {
    std::string out = std::string("# mode=") + (s.prediction_mode ? "prediction" : "learning") +
                      "\ndate,ri\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_date(s.day_at(i));
        out += ',';
        out += csv::format_double(s.ri[i]);
        out += '\n';
    }
    return out;
}

AlarmSeries alarm_series_from_csv(const std::string& content) {
    AlarmSeries s;
    std::istringstream in(content);
    std::string line;
    bool first_row = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (line.rfind("# mode=", 0) == 0) {
            s.prediction_mode = line.find("prediction") != std::string::npos;
            continue;
        }
        if (line[0] == '#' || line.rfind("date", 0) == 0) continue;
        auto fields = csv::split_line(line);
        if (fields.size() != 2) throw ParseError("alarm csv: expected 2 fields");
        const Day d = parse_date(fields[0]);
        if (first_row) {
            s.first = d;
            first_row = false;
        } else if (d != s.first + static_cast<Day>(s.ri.size())) {
            throw ParseError("alarm csv: days not consecutive at " + fields[0]);
        }
        s.ri.push_back(csv::parse_double(fields[1], "alarm csv"));
    }
    return s;
}

std::vector<LpplFit> learning_subset(const std::vector<LpplFit>& fits, Day cutoff) {
    std::vector<LpplFit> out;
    const double c = static_cast<double>(cutoff);
    for (const auto& f : fits)
        if (f.params.tc < c && static_cast<double>(f.window.t2) < c) out.push_back(f);
    return out;
}

std::vector<Questionnaire> scan_questionnaires(const std::vector<LpplFit>& fits,
                                               const std::vector<InformativeParam>& ips,
                                               double proximity_days, Day scan_first,
                                               Day scan_last) {
    const GroupedFits grouped = GroupedFits::build(fits);
    std::vector<Questionnaire> out;
    if (scan_last < scan_first) return out;
    out.reserve(static_cast<std::size_t>(scan_last - scan_first + 1));
    for (Day t = scan_first; t <= scan_last; ++t) {
        Questionnaire q;
        q.t_scan = t;
        q.answers.reserve(ips.size());
        for (const auto& ip : ips)
            q.answers.push_back(answer_for(grouped, ip, static_cast<double>(t), proximity_days));
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

struct AnswersHash {
    std::size_t operator()(const std::vector<std::int8_t>& v) const {
        return std::hash<std::string_view>{}(
            std::string_view(reinterpret_cast<const char*>(v.data()), v.size()));
    }
};

} // namespace

TraitBags build_trait_bags(const std::vector<Questionnaire>& days, const ReboundSet& rebounds,
                           double proximity_days) {
    // identical questionnaires share one trait enumeration
    std::unordered_map<std::vector<std::int8_t>, std::pair<int, int>, AnswersHash> multiplicity;
    for (const auto& q : days) {
        auto& m = multiplicity[q.answers];
        if (is_near(static_cast<double>(q.t_scan), rebounds, proximity_days))
            ++m.first;
        else
            ++m.second;
    }
    TraitBags bags;
    Questionnaire scratch;
    for (const auto& [answers, mult] : multiplicity) {
        scratch.answers = answers;
        for (TraitKey k : enumerate_traits(scratch)) {
            if (mult.first > 0) bags.count_I[k] += mult.first;
            if (mult.second > 0) bags.count_II[k] += mult.second;
        }
    }
    return bags;
}

AlarmSeries learning_alarm_series(const std::vector<Questionnaire>& days,
                                  const FeatureSet& features) {
    AlarmSeries s;
    s.prediction_mode = false;
    if (days.empty()) return s;
    s.first = days.front().t_scan;
    s.ri.reserve(days.size());
    std::unordered_map<std::vector<std::int8_t>, double, AnswersHash> cache;
    Questionnaire scratch;
    for (const auto& q : days) {
        auto it = cache.find(q.answers);
        if (it == cache.end()) {
            scratch.answers = q.answers;
            it = cache.emplace(q.answers, alarm_index(enumerate_traits(scratch), features)).first;
        }
        s.ri.push_back(it->second);
    }
    return s;
}

AlarmSeries predict_series(const std::vector<LpplFit>& all_fits,
                           const std::vector<InformativeParam>& ips, const FeatureSet& features,
                           Day t_start, Day t_end, int step_days, double proximity_days,
                           std::vector<PredictionAudit>* audit) {
    if (step_days < 1) throw ValidationError("predict_series: step must be >= 1");
    AlarmSeries s;
    s.prediction_mode = true;
    s.first = t_start + 1;
    if (t_end <= t_start) return s;
    s.ri.assign(static_cast<std::size_t>(t_end - t_start), 0.0);
    if (audit) audit->clear();

    for (Day g = t_start; g < t_end; g += step_days) {
        // fits available at the grid day: window end no later than g
        std::vector<LpplFit> available;
        Day max_t2 = 0;
        bool any = false;
        for (const auto& f : all_fits) {
            if (f.window.t2 > g) continue;
            if (std::abs(f.params.tc - static_cast<double>(g)) <= proximity_days) {
                available.push_back(f);
                if (!any || f.window.t2 > max_t2) max_t2 = f.window.t2;
                any = true;
            }
        }
        const Questionnaire q = build_questionnaire(g, available, ips, proximity_days);
        const double ri = alarm_index(enumerate_traits(q), features);
        if (audit) audit->push_back({g, max_t2, any});
        for (Day t = g + 1; t <= std::min<Day>(g + step_days, t_end); ++t)
            s.ri[static_cast<std::size_t>(t - t_start - 1)] = ri;
    }
    return s;
}

std::string informative_params_to_csv(const std::vector<InformativeParam>& ips) {
    std::string out = "group,param_index,param,ks_distance,good_region\n";
    for (const auto& ip : ips) {
        out += std::to_string(ip.group);
        out += ',';
        out += std::to_string(ip.param_index);
        out += ',';
        out += fit_param_name(ip.param_index);
        out += ',';
        out += csv::format_double(ip.ks);
        out += ',';
        for (std::size_t i = 0; i < ip.good_region.size(); ++i) {
            if (i) out += '|';
            out += csv::format_double(ip.good_region[i].lo);
            out += ':';
            out += csv::format_double(ip.good_region[i].hi);
        }
        out += '\n';
    }
    return out;
}

std::vector<InformativeParam> informative_params_from_csv(const std::string& content) {
    std::vector<InformativeParam> out;
    std::istringstream in(content);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("group", 0) == 0) continue;
        }
        auto fields = csv::split_line(line);
        if (fields.size() != 5) throw ParseError("informative param csv: expected 5 fields");
        InformativeParam ip;
        ip.group = std::stoi(fields[0]);
        ip.param_index = std::stoi(fields[1]);
        ip.id = kNumFitParams * ip.group + ip.param_index;
        ip.ks = csv::parse_double(fields[3], "informative param csv");
        std::istringstream regions(fields[4]);
        std::string part;
        while (std::getline(regions, part, '|')) {
            if (part.empty()) continue;
            const auto colon = part.find(':');
            if (colon == std::string::npos)
                throw ParseError("informative param csv: malformed region '" + part + "'");
            ip.good_region.push_back({csv::parse_double(part.substr(0, colon), "region lo"),
                                      csv::parse_double(part.substr(colon + 1), "region hi")});
        }
        out.push_back(std::move(ip));
    }
    return out;
}

std::string features_to_csv(const FeatureSet& features) {
    std::string out = "# alpha=" + std::to_string(features.qualification.alpha) +
                      " beta=" + std::to_string(features.qualification.beta) + "\n";
    out += "p,q,r,values,count_I,count_II,class\n";
    std::vector<TraitKey> keys;
    keys.reserve(features.class_I.size() + features.class_II.size());
    for (TraitKey k : features.class_I) keys.push_back(k);
    for (TraitKey k : features.class_II) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (TraitKey k : keys) {
        const Trait t = decode_trait(k);
        const auto counts = features.counts.at(k);
        out += std::to_string(t.p) + ',' + std::to_string(t.q) + ',' + std::to_string(t.r) + ',';
        for (int i = 0; i < t.arity; ++i) {
            if (i) out += ' ';
            out += std::to_string(t.values[i]);
        }
        out += ',' + std::to_string(counts.first) + ',' + std::to_string(counts.second) + ',';
        out += features.class_I.count(k) ? "I" : "II";
        out += '\n';
    }
    return out;
}

FeatureSet features_from_csv(const std::string& content) {
    FeatureSet out;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (line.rfind("# alpha=", 0) == 0) {
            std::istringstream hdr(line.substr(2));
            std::string tok;
            while (hdr >> tok) {
                if (tok.rfind("alpha=", 0) == 0) out.qualification.alpha = std::stoi(tok.substr(6));
                if (tok.rfind("beta=", 0) == 0) out.qualification.beta = std::stoi(tok.substr(5));
            }
            continue;
        }
        if (line[0] == '#' || line.rfind("p,q,r", 0) == 0) continue;
        auto fields = csv::split_line(line);
        if (fields.size() != 7) throw ParseError("features csv: expected 7 fields");
        Trait t;
        t.p = std::stoi(fields[0]);
        t.q = std::stoi(fields[1]);
        t.r = std::stoi(fields[2]);
        std::istringstream vals(fields[3]);
        int v, idx = 0;
        while (vals >> v && idx < 3) t.values[idx++] = v;
        t.arity = idx;
        const TraitKey key = encode_trait(t);
        out.counts[key] = {std::stoi(fields[4]), std::stoi(fields[5])};
        if (fields[6] == "I")
            out.class_I.insert(key);
        else if (fields[6] == "II")
            out.class_II.insert(key);
        else
            throw ParseError("features csv: unknown class '" + fields[6] + "'");
    }
    return out;
}

} // namespace rebound
