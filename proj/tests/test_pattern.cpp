#include <doctest.h>

#include <random>
#include <set>

#include "rebound/errors.hpp"
#include "rebound/pattern.hpp"
#include "test_helpers.hpp"

using namespace rebound;
using namespace testutil;

namespace {

LpplFit make_fit(Day t1, Day t2, double tc, double m = 0.5, double omega = 8.0,
                 double phi = 1.0, double B = 0.1, double b = -0.2, double q = 0.01) {
    LpplFit f;
    f.window = {t1, t2};
    f.params = {1.0, B, 0.05, m, omega, phi, tc};
    f.b = b;
    f.residual_q = q;
    f.n_obs = t2 - t1;
    return f;
}

ReboundSet one_rebound(Day d) {
    ReboundSet r;
    r.dates = {d};
    return r;
}

} // namespace

TEST_CASE("class assignment by critical-time proximity") {
    const ReboundSet reb = one_rebound(5000);
    CHECK(assign_class(make_fit(4000, 4900, 5000.0), reb) == ClassLabel::ClassI);
    CHECK(assign_class(make_fit(4000, 4900, 5030.0), reb) == ClassLabel::ClassII);
    CHECK(assign_class(make_fit(4000, 4900, 5010.0), reb) == ClassLabel::ClassI);
    CHECK(assign_class(make_fit(4000, 4900, 5011.0), reb) == ClassLabel::ClassII);
}

TEST_CASE("group binning") {
    CHECK(assign_group(110) == 1);
    CHECK(assign_group(100) == 1);
    CHECK(assign_group(200) == 1);  // boundary goes to the lower bin
    CHECK(assign_group(201) == 2);
    CHECK(assign_group(1499) == 14);
    CHECK(assign_group(1500) == 14);
    CHECK_THROWS_AS(assign_group(99), ValidationError);
    CHECK_THROWS_AS(assign_group(1501), ValidationError);
    for (int L = 100; L <= 1500; ++L) {
        const int g = assign_group(L);
        CHECK(g >= 1);
        CHECK(g <= 14);
        CHECK(L >= 100 * g);
        CHECK(L <= 100 * g + 100);
    }
}

TEST_CASE("fit parameter accessor order is m, omega, phi, B, b, q") {
    const LpplFit f = make_fit(0, 150, 200.0, 0.3, 9.0, 2.0, -0.5, 0.7, 0.02);
    CHECK(fit_param_value(f, 1) == 0.3);
    CHECK(fit_param_value(f, 2) == 9.0);
    CHECK(fit_param_value(f, 3) == 2.0);
    CHECK(fit_param_value(f, 4) == -0.5);
    CHECK(fit_param_value(f, 5) == 0.7);
    CHECK(fit_param_value(f, 6) == 0.02);
    CHECK_THROWS_AS(fit_param_value(f, 7), ValidationError);
}

TEST_CASE("informative parameters from separated classes") {
    // class I draws m ~ U(0, 0.5), class II draws m ~ U(0.5, 1), everything
    // else identical; only (group 1, m) may qualify
    std::mt19937_64 rng(6);
    std::vector<LpplFit> fits;
    const ReboundSet reb = one_rebound(10000);
    for (int i = 0; i < 500; ++i) {
        const double m_I = std::uniform_real_distribution<double>(0.002, 0.499)(rng);
        fits.push_back(make_fit(9800, 9950, 10000.0 + (i % 21) - 10, m_I));
        const double m_II = std::uniform_real_distribution<double>(0.501, 0.998)(rng);
        fits.push_back(make_fit(9800, 9950, 10100.0 + (i % 50), m_II));
    }
    const auto ips = find_informative_params(fits, reb);
    REQUIRE(ips.size() == 1);
    CHECK(ips[0].group == 1);
    CHECK(ips[0].param_index == 1);
    CHECK(ips[0].id == 7);
    CHECK(ips[0].ks > 0.9);
    // good region covers the class-I support and excludes the class-II bulk
    for (double x = 0.05; x <= 0.45; x += 0.05) CHECK(ips[0].in_good_region(x));
    for (double x = 0.55; x <= 0.95; x += 0.05) CHECK(!ips[0].in_good_region(x));

    SUBCASE("identical classes are never informative") {
        std::vector<LpplFit> same;
        for (int i = 0; i < 200; ++i) {
            const double m = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
            same.push_back(make_fit(9800, 9950, 10000.0 + (i % 21) - 10, m));
            same.push_back(make_fit(9800, 9950, 10100.0 + (i % 50), m));
        }
        CHECK(find_informative_params(same, reb).empty());
    }
}

TEST_CASE("at most 84 informative parameters") {
    std::mt19937_64 rng(14);
    std::vector<LpplFit> fits;
    const ReboundSet reb = one_rebound(20000);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    for (int i = 0; i < 3000; ++i) {
        const int len = 110 + static_cast<int>(rng() % 1390);
        const Day t2 = 19000 + static_cast<Day>(rng() % 1500);
        fits.push_back(make_fit(t2 - len, t2, t2 + uni(0, 300), uni(0.01, 0.99), uni(0.1, 39.0),
                                uni(0.01, 6.2), uni(-1, 1), uni(-1, 1), uni(0, 0.1)));
    }
    const auto ips = find_informative_params(fits, reb);
    CHECK(ips.size() <= 84);
    std::set<int> ids;
    for (const auto& ip : ips) {
        CHECK(ip.id == 6 * ip.group + ip.param_index);
        ids.insert(ip.id);
    }
    CHECK(ids.size() == ips.size()); // unique ids
}

TEST_CASE("questionnaire answers follow the majority rule") {
    InformativeParam ip;
    ip.group = 1; // lengths in [100, 200]
    ip.param_index = 1;
    ip.id = 7;
    ip.ks = 0.5;
    ip.good_region = {{0.2, 0.4}};
    const std::vector<InformativeParam> ips{ip};

    SUBCASE("both members inside the region") {
        std::vector<LpplFit> fits{make_fit(0, 150, 1000.0, 0.25),
                                  make_fit(10, 160, 1005.0, 0.35)};
        CHECK(build_questionnaire(1000, fits, ips).answers[0] == 1);
    }
    SUBCASE("one in, one out is undetermined") {
        std::vector<LpplFit> fits{make_fit(0, 150, 1000.0, 0.25),
                                  make_fit(10, 160, 1005.0, 0.75)};
        CHECK(build_questionnaire(1000, fits, ips).answers[0] == 0);
    }
    SUBCASE("both outside") {
        std::vector<LpplFit> fits{make_fit(0, 150, 1000.0, 0.75),
                                  make_fit(10, 160, 1005.0, 0.85)};
        CHECK(build_questionnaire(1000, fits, ips).answers[0] == -1);
    }
    SUBCASE("no fits near the scan day") {
        std::vector<LpplFit> fits{make_fit(0, 150, 2000.0, 0.25)};
        CHECK(build_questionnaire(1000, fits, ips).answers[0] == 0);
    }
    SUBCASE("fits of other groups are ignored") {
        std::vector<LpplFit> fits{make_fit(0, 500, 1000.0, 0.25)}; // group 4
        CHECK(build_questionnaire(1000, fits, ips).answers[0] == 0);
    }
}

TEST_CASE("traits of (0,1,-1,-1) reproduce the published table") {
    Questionnaire q;
    q.answers = {0, 1, -1, -1};
    const auto traits = enumerate_traits(q);
    REQUIRE(traits.size() == 14);

    struct Row {
        int p, q_, r;
        std::vector<int> vals;
    };
    const std::vector<Row> expected = {
        {1, 1, 1, {0}},        {1, 2, 2, {0, 1}},      {1, 2, 3, {0, 1, -1}},
        {1, 2, 4, {0, 1, -1}}, {1, 3, 3, {0, -1}},     {1, 3, 4, {0, -1, -1}},
        {1, 4, 4, {0, -1}},    {2, 2, 2, {1}},         {2, 3, 3, {1, -1}},
        {2, 3, 4, {1, -1, -1}},{2, 4, 4, {1, -1}},     {3, 3, 3, {-1}},
        {3, 4, 4, {-1, -1}},   {4, 4, 4, {-1}},
    };
    std::multiset<std::string> got, want;
    for (TraitKey k : traits) {
        const Trait t = decode_trait(k);
        std::string s = std::to_string(t.p) + "," + std::to_string(t.q) + "," +
                        std::to_string(t.r) + ":";
        for (int i = 0; i < t.arity; ++i) s += std::to_string(t.values[i]) + ";";
        got.insert(s);
    }
    for (const Row& r : expected) {
        std::string s = std::to_string(r.p) + "," + std::to_string(r.q_) + "," +
                        std::to_string(r.r) + ":";
        for (int v : r.vals) s += std::to_string(v) + ";";
        want.insert(s);
    }
    CHECK(got == want);
}

TEST_CASE("single-question questionnaire has one trait") {
    Questionnaire q;
    q.answers = {1};
    const auto traits = enumerate_traits(q);
    REQUIRE(traits.size() == 1);
    const Trait t = decode_trait(traits[0]);
    CHECK(t.p == 1);
    CHECK(t.q == 1);
    CHECK(t.r == 1);
    CHECK(t.arity == 1);
    CHECK(t.values[0] == 1);
}

TEST_CASE("trait count identity for L in 1..30") {
    std::mt19937_64 rng(3);
    for (std::size_t L = 1; L <= 30; ++L) {
        Questionnaire q;
        for (std::size_t i = 0; i < L; ++i)
            q.answers.push_back(static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1));
        const auto traits = enumerate_traits(q);
        CHECK(traits.size() == L + L * (L - 1) / 2 + L * (L - 1) * (L - 2) / 6);
        CHECK(traits.size() == trait_count_for_length(L));
        // no duplicate keys inside one questionnaire
        std::set<TraitKey> uniq(traits.begin(), traits.end());
        CHECK(uniq.size() == traits.size());
    }
}

TEST_CASE("the L = 4 trait universe has 174 members") {
    std::set<TraitKey> universe;
    for (int code = 0; code < 81; ++code) {
        Questionnaire q;
        int c = code;
        for (int i = 0; i < 4; ++i) {
            q.answers.push_back(static_cast<std::int8_t>(c % 3 - 1));
            c /= 3;
        }
        for (TraitKey k : enumerate_traits(q)) universe.insert(k);
    }
    CHECK(universe.size() == 174);
}

TEST_CASE("trait encode/decode round trip") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        Trait t;
        t.arity = 1 + static_cast<int>(rng() % 3);
        t.p = 1 + static_cast<int>(rng() % 80);
        if (t.arity == 1) {
            t.q = t.r = t.p;
        } else if (t.arity == 2) {
            t.q = t.r = t.p + 1 + static_cast<int>(rng() % 20);
        } else {
            t.q = t.p + 1 + static_cast<int>(rng() % 10);
            t.r = t.q + 1 + static_cast<int>(rng() % 10);
        }
        for (int v = 0; v < t.arity; ++v)
            t.values[v] = static_cast<int>(rng() % 3) - 1;
        const Trait back = decode_trait(encode_trait(t));
        CHECK(back.p == t.p);
        CHECK(back.q == t.q);
        CHECK(back.r == t.r);
        CHECK(back.arity == t.arity);
        for (int v = 0; v < t.arity; ++v) CHECK(back.values[v] == t.values[v]);
    }
}

TEST_CASE("feature qualification boundary semantics") {
    const TraitKey tau = encode_trait({1, 1, 1, {1, 0, 0}, 1});
    auto features_for = [&](int ci, int cii) {
        TraitBags bags;
        if (ci > 0) bags.count_I[tau] = ci;
        if (cii > 0) bags.count_II[tau] = cii;
        return extract_features(bags, {10, 200});
    };
    CHECK(features_for(11, 199).class_I.count(tau) == 1);  // "at least 11, fewer than 200"
    CHECK(features_for(10, 200).class_II.count(tau) == 1); // restated complement
    CHECK(features_for(11, 200).class_I.count(tau) == 0);  // neither rule fires
    CHECK(features_for(11, 200).class_II.count(tau) == 0);
    CHECK(features_for(10, 199).class_I.count(tau) == 0);
    CHECK(features_for(10, 199).class_II.count(tau) == 0);
    const FeatureSet empty_counts = features_for(0, 0);
    CHECK(empty_counts.class_I.empty());
    CHECK(empty_counts.class_II.empty());
}

TEST_CASE("feature classes are disjoint for random bags") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        TraitBags bags;
        for (int i = 0; i < 300; ++i) {
            Trait t{1 + static_cast<int>(rng() % 20), 0, 0, {0, 0, 0}, 1};
            t.q = t.r = t.p;
            t.values[0] = static_cast<int>(rng() % 3) - 1;
            const TraitKey k = encode_trait(t);
            if (rng() % 2) bags.count_I[k] += static_cast<int>(rng() % 30);
            if (rng() % 2) bags.count_II[k] += static_cast<int>(rng() % 400);
        }
        const FeatureQualification q{static_cast<int>(rng() % 15),
                                     1 + static_cast<int>(rng() % 300)};
        const FeatureSet f = extract_features(bags, q);
        for (TraitKey k : f.class_I) CHECK(f.class_II.count(k) == 0);
    }
}

TEST_CASE("alarm index ratios") {
    FeatureSet f;
    const TraitKey a = encode_trait({1, 1, 1, {1, 0, 0}, 1});
    const TraitKey b = encode_trait({2, 2, 2, {1, 0, 0}, 1});
    const TraitKey c = encode_trait({3, 3, 3, {1, 0, 0}, 1});
    const TraitKey d = encode_trait({4, 4, 4, {1, 0, 0}, 1});
    f.class_I = {a, b, c};
    f.class_II = {d};
    CHECK(alarm_index({a, b, c, d}, f) == doctest::Approx(0.75));
    CHECK(alarm_index({a, b, c}, f) == doctest::Approx(1.0));
    CHECK(alarm_index({}, f) == 0.0);
    const TraitKey e = encode_trait({5, 5, 5, {1, 0, 0}, 1});
    CHECK(alarm_index({e}, f) == 0.0); // matches nothing -> 0 by definition
}

TEST_CASE("learning subset keeps only pre-cutoff information") {
    std::vector<LpplFit> fits{
        make_fit(0, 400, 500.0),   // both before cutoff 600
        make_fit(0, 400, 700.0),   // tc after
        make_fit(300, 650, 500.0), // t2 after (tc before; still excluded)
        make_fit(100, 550, 590.0), // both before
    };
    const auto learn = learning_subset(fits, 600);
    REQUIRE(learn.size() == 2);
    CHECK(learn[0].params.tc == 500.0);
    CHECK(learn[1].params.tc == 590.0);
}

TEST_CASE("prediction series: block constancy, leakage, empty features") {
    // one informative parameter on (group 1, m), good region [0.4, 0.6]
    InformativeParam ip;
    ip.group = 1;
    ip.param_index = 1;
    ip.id = 7;
    ip.ks = 0.3;
    ip.good_region = {{0.4, 0.6}};
    const std::vector<InformativeParam> ips{ip};

    // trait "answer 1 at position 1" is the lone class-I feature
    FeatureSet features;
    const TraitKey hit = encode_trait({1, 1, 1, {1, 0, 0}, 1});
    const TraitKey miss = encode_trait({1, 1, 1, {0, 0, 0}, 1});
    features.class_I = {hit};
    features.class_II = {miss};
    features.counts[hit] = {20, 0};
    features.counts[miss] = {0, 500};

    const Day start = 1000;
    // fit available from t2 = 1050, tc = 1080 (inside block starting 1050)
    std::vector<LpplFit> fits{make_fit(900, 1050, 1080.0, 0.5)};
    // a future fit whose tc sits near an early grid day but whose window
    // closes later; it must not leak into early blocks
    fits.push_back(make_fit(950, 1100, 1052.0, 0.5));

    std::vector<PredictionAudit> audit;
    const AlarmSeries s = predict_series(fits, ips, features, start, start + 200, 50, 10.0,
                                         &audit);
    REQUIRE(s.size() == 200);
    CHECK(s.first == start + 1);

    // grid day 1050: only the first fit (t2 = 1050) is available; its tc
    // 1080 is not within 10 days, and the leaked fit (tc 1052) must be
    // ignored because its window ends at 1100 > 1050
    CHECK(s.at_day(1051) == 0.0);
    // grid day 1100: now |tc - 1100| <= 10 does not hold for tc=1080 (20 away)
    // but the second fit (tc = 1052) is 48 away; so still zero
    CHECK(s.at_day(1101) == 0.0);
    for (const auto& a : audit) {
        if (a.any_fit_used) CHECK(a.max_t2_used <= a.grid_day);
    }

    // now place the grid day on the signal: scan day 1080 is not on the
    // 50-day grid (1000, 1050, 1100, ...), so shift the start so it is
    const AlarmSeries s2 = predict_series(fits, ips, features, 1030, 1230, 50, 10.0, &audit);
    // grid day 1080: fit t2=1050 <= 1080, |tc-1080| = 0 -> answer 1 -> RI=1
    CHECK(s2.at_day(1081) == doctest::Approx(1.0));
    // block constancy: all 50 days of the block share the value
    for (Day t = 1081; t <= 1130; ++t) CHECK(s2.at_day(t) == doctest::Approx(1.0));
    CHECK(s2.at_day(1131) == 0.0); // next block, signal gone

    // empty features -> identically zero
    const AlarmSeries s3 = predict_series(fits, ips, FeatureSet{}, 1030, 1230, 50, 10.0);
    for (double v : s3.ri) CHECK(v == 0.0);
}

TEST_CASE("learning scan, bags and learning alarm series") {
    InformativeParam ip;
    ip.group = 1;
    ip.param_index = 1;
    ip.id = 7;
    ip.ks = 0.3;
    ip.good_region = {{0.4, 0.6}};
    const std::vector<InformativeParam> ips{ip};

    const ReboundSet reb = one_rebound(500);
    // fits with tc at the rebound answer 1; fits far away answer 1 too but on
    // different days
    std::vector<LpplFit> fits{make_fit(300, 450, 500.0, 0.5), make_fit(100, 250, 300.0, 0.9)};
    const auto days = scan_questionnaires(fits, ips, 10.0, 280, 520);
    REQUIRE(days.size() == 241);

    const TraitBags bags = build_trait_bags(days, reb, 10.0);
    const TraitKey hit = encode_trait({1, 1, 1, {1, 0, 0}, 1});
    const TraitKey out = encode_trait({1, 1, 1, {-1, 0, 0}, 1});
    const TraitKey zero = encode_trait({1, 1, 1, {0, 0, 0}, 1});
    // answer 1 near the rebound on days 490..510 -> 21 class-I counts
    CHECK(bags.count_I.at(hit) == 21);
    CHECK(bags.count_I.count(out) == 0);
    // answer -1 around day 300 (m = 0.9 outside the region), class II
    CHECK(bags.count_II.at(out) == 21);
    // all remaining days answer 0
    CHECK(bags.count_II.at(zero) == 241 - 21 - 21);

    FeatureSet features = extract_features(bags, {5, 100});
    CHECK(features.class_I.count(hit) == 1);
    CHECK(features.class_II.count(zero) == 1);

    const AlarmSeries learn = learning_alarm_series(days, features);
    CHECK(learn.first == 280);
    CHECK(learn.size() == days.size());
    CHECK(learn.at_day(500) == doctest::Approx(1.0));
    CHECK(learn.at_day(400) == 0.0);
}

TEST_CASE("informative params and features csv round trip") {
    InformativeParam ip;
    ip.group = 3;
    ip.param_index = 2;
    ip.id = 20;
    ip.ks = 0.123456789012345;
    ip.good_region = {{0.1, 0.25}, {0.5, 0.75}};
    const auto back = informative_params_from_csv(informative_params_to_csv({ip}));
    REQUIRE(back.size() == 1);
    CHECK(back[0].group == 3);
    CHECK(back[0].param_index == 2);
    CHECK(back[0].id == 20);
    CHECK(back[0].ks == ip.ks);
    REQUIRE(back[0].good_region.size() == 2);
    CHECK(back[0].good_region[1].lo == 0.5);

    FeatureSet f;
    f.qualification = {7, 300};
    const TraitKey k1 = encode_trait({1, 2, 4, {0, 1, -1}, 3});
    const TraitKey k2 = encode_trait({2, 2, 2, {-1, 0, 0}, 1});
    f.class_I = {k1};
    f.class_II = {k2};
    f.counts[k1] = {15, 2};
    f.counts[k2] = {1, 420};
    const FeatureSet fb = features_from_csv(features_to_csv(f));
    CHECK(fb.qualification.alpha == 7);
    CHECK(fb.qualification.beta == 300);
    CHECK(fb.class_I == f.class_I);
    CHECK(fb.class_II == f.class_II);
    CHECK(fb.counts.at(k1) == std::make_pair(15, 2));
}

TEST_CASE("alarm series csv round trip") {
    AlarmSeries s;
    s.first = make_day(1975, 1, 2);
    s.prediction_mode = true;
    s.ri = {0.0, 0.25, 1.0 / 3.0, 1.0};
    const AlarmSeries back = alarm_series_from_csv(alarm_series_to_csv(s));
    CHECK(back.first == s.first);
    CHECK(back.prediction_mode);
    REQUIRE(back.ri.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back.ri[i] == s.ri[i]);
}
