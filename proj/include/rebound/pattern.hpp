#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rebound/lppl.hpp"
#include "rebound/rebound_detect.hpp"

namespace rebound {

// Class I: fits whose critical time lands within `proximity_days` of a
// rebound. Class II: everything else.
enum class ClassLabel { ClassI, ClassII };

ClassLabel assign_class(const LpplFit& fit, const ReboundSet& rebounds,
                        double proximity_days = 10.0);

constexpr int kNumGroups = 14;
constexpr int kNumFitParams = 6; // j = 1..6 -> m, omega, phi, B, b, q

// Window-length bin [100 i, 100 i + 100], i = 1..14; an exact multiple of
// 100 belongs to the lower bin. Lengths outside [100, 1500] are an error.
int assign_group(int length_days);
int assign_group(const LpplFit& fit);

// Value of parameter j (1-based, order above) for a fit.
double fit_param_value(const LpplFit& fit, int param_index);
const char* fit_param_name(int param_index);

struct Interval {
    double lo;
    double hi;
};

// A (group, parameter) pair whose Class-I and Class-II smoothed CDFs differ
// by more than the KS threshold, with the Class-I "good region"
// {x : pdf_I(x) > pdf_II(x)} clipped to the parameter's allowed range.
struct InformativeParam {
    int id = 0;          // 6 * group + param_index
    int group = 0;       // 1..14
    int param_index = 0; // 1..6
    double ks = 0.0;
    std::vector<Interval> good_region;

    bool in_good_region(double x) const;
};

std::vector<InformativeParam> find_informative_params(const std::vector<LpplFit>& learning_fits,
                                                      const ReboundSet& rebounds,
                                                      double proximity_days = 10.0,
                                                      double ks_threshold = 0.05,
                                                      int kde_grid = 512);

// Per-day answer vector, one answer in {-1, 0, 1} per informative parameter.
struct Questionnaire {
    Day t_scan = 0;
    std::vector<std::int8_t> answers;
};

Questionnaire build_questionnaire(Day t_scan, const std::vector<LpplFit>& fits,
                                  const std::vector<InformativeParam>& ips,
                                  double proximity_days = 10.0);

// Trait: an up-to-3-position excerpt of a questionnaire together with the
// answer values at those positions. Encoded into one 32-bit key for
// counting; positions are 1-based and fit L <= 120.
using TraitKey = std::uint32_t;

struct Trait {
    int p = 0, q = 0, r = 0;
    std::array<int, 3> values{0, 0, 0}; // only the first `arity` entries are meaningful
    int arity = 1;
};

TraitKey encode_trait(const Trait& t);
Trait decode_trait(TraitKey key);

// All single, pair and triple position selections: exactly
// L + C(L,2) + C(L,3) traits, singles first, then pairs, then triples,
// lexicographic by position.
std::vector<TraitKey> enumerate_traits(const Questionnaire& q);

std::size_t trait_count_for_length(std::size_t L);

// Occurrence counts of each trait over the learning days, split by class.
struct TraitBags {
    std::unordered_map<TraitKey, int> count_I;
    std::unordered_map<TraitKey, int> count_II;
};

struct FeatureQualification {
    int alpha = 10;
    int beta = 200;
};

// class_I = {tau : count_I > alpha and count_II < beta}
// class_II = {tau : count_I <= alpha and count_II >= beta}
// (a trait rare in both classes qualifies for neither set)
struct FeatureSet {
    FeatureQualification qualification;
    std::unordered_set<TraitKey> class_I;
    std::unordered_set<TraitKey> class_II;
    std::unordered_map<TraitKey, std::pair<int, int>> counts; // retained for reports

    bool empty() const { return class_I.empty() && class_II.empty(); }
};

FeatureSet extract_features(const TraitBags& bags, FeatureQualification q);

// RI = nu_I / (nu_I + nu_II) over the matched features, 0 when nothing
// matches either class.
double alarm_index(const std::vector<TraitKey>& traits, const FeatureSet& features);

// Daily rebound alarm index covering days first .. first + ri.size() - 1.
struct AlarmSeries {
    Day first = 0;
    std::vector<double> ri;
    bool prediction_mode = false;

    std::size_t size() const { return ri.size(); }
    Day day_at(std::size_t i) const { return first + static_cast<Day>(i); }
    Day last_day() const { return first + static_cast<Day>(ri.size()) - 1; }
    bool covers(Day d) const { return d >= first && d <= last_day(); }
    double at_day(Day d) const { return ri.at(static_cast<std::size_t>(d - first)); }
};

std::string alarm_series_to_csv(const AlarmSeries& s);
AlarmSeries alarm_series_from_csv(const std::string& content);

// Fits with both t_c and t_2 before the cutoff (the learning set; no future
// information enters feature extraction).
std::vector<LpplFit> learning_subset(const std::vector<LpplFit>& fits, Day cutoff);

// One questionnaire per day of [scan_first, scan_last], every day built from
// the same fit subset.
std::vector<Questionnaire> scan_questionnaires(const std::vector<LpplFit>& fits,
                                               const std::vector<InformativeParam>& ips,
                                               double proximity_days, Day scan_first,
                                               Day scan_last);

// Scan days near a rebound contribute their traits to T_I, all other days to
// T_II; each questionnaire contributes each of its traits once.
TraitBags build_trait_bags(const std::vector<Questionnaire>& days, const ReboundSet& rebounds,
                           double proximity_days = 10.0);

AlarmSeries learning_alarm_series(const std::vector<Questionnaire>& days,
                                  const FeatureSet& features);

struct PredictionAudit {
    Day grid_day = 0;
    Day max_t2_used = 0; // latest window end among fits entering the questionnaire
    bool any_fit_used = false;
};

// Walk-forward alarm index: a prediction day t in (g, g + step] reuses the
// index computed at grid day g from fits with t_2 <= g only. Output covers
// (t_start, t_end] daily.
AlarmSeries predict_series(const std::vector<LpplFit>& all_fits,
                           const std::vector<InformativeParam>& ips, const FeatureSet& features,
                           Day t_start, Day t_end, int step_days, double proximity_days = 10.0,
                           std::vector<PredictionAudit>* audit = nullptr);

// Serialization (byte-stable; doubles carry 17 significant digits).
std::string informative_params_to_csv(const std::vector<InformativeParam>& ips);
std::vector<InformativeParam> informative_params_from_csv(const std::string& content);
std::string features_to_csv(const FeatureSet& features);
FeatureSet features_from_csv(const std::string& content);

} // namespace rebound
