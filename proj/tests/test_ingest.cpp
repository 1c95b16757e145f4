#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "sg/embed_ingest.hpp"
#include "sg/errors.hpp"
#include "sg/rng.hpp"
#include "sg/snapshot.hpp"
#include "sg/text_io.hpp"
#include "sg/tweet_record.hpp"

#include "test_support.hpp"

using namespace sg;

namespace {

TweetRecord tweet(std::string id, std::string author, std::vector<float> emb,
                  std::string target = "", InteractionKind kind = InteractionKind::none,
                  double sentiment = 0.0) {
    TweetRecord r;
    r.tweet_id = std::move(id);
    r.author_id = std::move(author);
    r.target_id = std::move(target);
    r.kind = kind;
    r.sentiment = sentiment;
    r.embedding = std::move(emb);
    return r;
}

std::vector<TweetRecord> random_records(Rng& rng, size_t n_users, size_t n_tweets, size_t dim) {
    std::vector<TweetRecord> out;
    for (size_t i = 0; i < n_tweets; ++i) {
        std::string author = "user" + std::to_string(rng.below(n_users));
        std::vector<float> emb(dim);
        for (float& x : emb) x = float(rng.normal(0.0, 2.0));
        std::string target;
        InteractionKind kind = InteractionKind::none;
        if (rng.bernoulli(0.5)) {
            target = "user" + std::to_string(rng.below(n_users));
            kind = InteractionKind(rng.below(4));
        }
        out.push_back(tweet("t" + std::to_string(i), author, std::move(emb), target, kind,
                            rng.uniform(-1.0, 1.0)));
    }
    return out;
}

} // namespace

TEST_CASE("feature pooling matches a two-pass mean oracle") {
    Rng rng(31);
    std::vector<TweetRecord> records = random_records(rng, 12, 600, 8);
    UserFeatureTable table = pool_user_features(records);
    CHECK(table.dim == 8);

    // Oracle: exact two-pass mean in double.
    std::map<std::string, std::pair<std::vector<double>, size_t>> sums;
    for (const TweetRecord& r : records) {
        auto& [sum, n] = sums[r.author_id];
        sum.resize(8, 0.0);
        for (size_t i = 0; i < 8; ++i) sum[i] += r.embedding[i];
        ++n;
    }
    CHECK(table.users.size() == sums.size());
    for (const auto& [name, uf] : table.users) {
        const auto& [sum, n] = sums.at(name);
        CHECK(uf.tweet_count == n);
        for (size_t i = 0; i < 8; ++i)
            CHECK(double(uf.mean[i]) == doctest::Approx(sum[i] / double(n)).epsilon(1e-6));
    }
}

TEST_CASE("interaction graph build is independent of record order") {
    Rng rng(32);
    std::vector<TweetRecord> records = random_records(rng, 10, 200, 4);
    std::vector<TweetRecord> shuffled = records;
    std::mt19937 mt(99);
    std::shuffle(shuffled.begin(), shuffled.end(), mt);

    InteractionGraph a = build_interaction_graph(records, pool_user_features(records));
    InteractionGraph b = build_interaction_graph(shuffled, pool_user_features(shuffled));

    REQUIRE(a.node_count() == b.node_count());
    for (uint32_t v = 0; v < a.node_count(); ++v) CHECK(a.users().name(v) == b.users().name(v));
    REQUIRE(a.edge_count() == b.edge_count());
    auto ea = a.edge_list(), eb = b.edge_list();
    for (size_t i = 0; i < ea.size(); ++i) {
        CHECK(ea[i].src == eb[i].src);
        CHECK(ea[i].dst == eb[i].dst);
        CHECK(ea[i].weight == doctest::Approx(eb[i].weight).epsilon(1e-12));
    }
    for (uint32_t v = 0; v < a.node_count(); ++v) {
        CHECK(a.tweet_counts()[v] == b.tweet_counts()[v]);
        auto fa = a.feature_row(v), fb = b.feature_row(v);
        for (size_t i = 0; i < fa.size(); ++i)
            CHECK(double(fa[i]) == doctest::Approx(double(fb[i])).epsilon(1e-6));
    }
}

TEST_CASE("target-only users become featureless nodes; authors must have features") {
    std::vector<TweetRecord> records = {
        tweet("t1", "alice", {1.0f, 2.0f}, "ghost", InteractionKind::reply, 0.5),
        tweet("t2", "alice", {3.0f, 4.0f}),
    };
    IngestStats stats;
    InteractionGraph g = build_interaction_graph(records, pool_user_features(records), &stats);
    CHECK(stats.records == 2);
    CHECK(stats.interactions == 1);
    CHECK(stats.featureless_targets == 1);
    uint32_t ghost = *g.users().lookup("ghost");
    CHECK(g.feature_row(ghost)[0] == 0.0f);
    CHECK(g.tweet_counts()[ghost] == 0);
    uint32_t alice = *g.users().lookup("alice");
    CHECK(g.feature_row(alice)[0] == doctest::Approx(2.0f));
    CHECK(g.tweet_counts()[alice] == 2);

    // A feature table missing one of the authors violates the precondition.
    std::vector<TweetRecord> extended = records;
    extended.push_back(tweet("t3", "carol", {5.0f, 6.0f}));
    CHECK_THROWS_AS(build_interaction_graph(extended, pool_user_features(records)), DataError);
}

TEST_CASE("self-interactions are dropped and counted during the build") {
    std::vector<TweetRecord> records = {
        tweet("t1", "bob", {1.0f}, "bob", InteractionKind::mention, 0.9),
        tweet("t2", "bob", {1.0f}, "eve", InteractionKind::reply, -0.5),
        tweet("t3", "eve", {2.0f}),
    };
    IngestStats stats;
    InteractionGraph g = build_interaction_graph(records, pool_user_features(records), &stats);
    CHECK(stats.self_loops_dropped == 1);
    CHECK(g.edge_count() == 1);
    CHECK(g.out_weights(*g.users().lookup("bob"))[0] == doctest::Approx(-0.5));
}

TEST_CASE("tweet record validation names the offending tweet") {
    TweetRecord r = tweet("tweet-9", "", {1.0f});
    CHECK_THROWS_WITH_AS(r.validate(1), doctest::Contains("tweet-9"), DataError);
    r = tweet("tweet-9", "a", {1.0f, 2.0f});
    CHECK_THROWS_AS(r.validate(1), DataError);  // dimension mismatch
    r = tweet("tweet-9", "a", {std::nanf("")});
    CHECK_THROWS_AS(r.validate(1), DataError);
    r = tweet("tweet-9", "a", {1.0f});
    r.sentiment = 1.5;
    CHECK_THROWS_AS(r.validate(1), DataError);
    r.sentiment = -1.0;
    CHECK_NOTHROW(r.validate(1));
}

TEST_CASE("packed and line-delimited tweet files round-trip exactly") {
    Rng rng(33);
    std::vector<TweetRecord> records = random_records(rng, 5, 40, 6);
    sgtest::TempDir dir("tweets");

    auto check_equal = [&](const std::vector<TweetRecord>& got) {
        REQUIRE(got.size() == records.size());
        for (size_t i = 0; i < records.size(); ++i) {
            CHECK(got[i].tweet_id == records[i].tweet_id);
            CHECK(got[i].author_id == records[i].author_id);
            CHECK(got[i].target_id == records[i].target_id);
            CHECK(got[i].kind == records[i].kind);
            CHECK(got[i].sentiment == records[i].sentiment);  // f64, bit-exact
            CHECK(got[i].embedding == records[i].embedding);  // f32, bit-exact
        }
    };

    std::string packed = dir.file("t.twe1");
    write_tweets_twe1(packed, records);
    check_equal(read_tweets_twe1(packed));
    check_equal(read_tweets_auto(packed));  // magic dispatch

    std::string jsonl = dir.file("t.jsonl");
    write_tweets_jsonl(jsonl, records);
    check_equal(read_tweets_jsonl(jsonl));
    check_equal(read_tweets_auto(jsonl));
}

TEST_CASE("malformed tweet files are rejected with the file position") {
    sgtest::TempDir dir("badtweets");
    std::string path = dir.file("bad.jsonl");
    sgtest::write_file(path, "{\"tweet_id\":\"t1\",\"author_id\":\"a\",\"sentiment\":0.0,"
                             "\"kind\":\"none\",\"embedding\":[0.5]}\nnot json\n");
    CHECK_THROWS_WITH_AS(read_tweets_jsonl(path), doctest::Contains(":2"), DataError);

    std::string trunc = dir.file("trunc.twe1");
    std::vector<TweetRecord> one = {tweet("t", "a", {1.0f, 2.0f})};
    write_tweets_twe1(trunc, one);
    std::string bytes = sgtest::read_file(trunc);
    sgtest::write_file(trunc, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_tweets_twe1(trunc), DataError);
}

TEST_CASE("graph snapshots reload to an identical graph") {
    sgtest::TempDir dir("snap");
    Rng rng(34);

    BipartiteGraph bg = sgtest::random_bipartite(rng, 20, 8);
    std::string bpath = dir.file("b.sgr");
    write_snapshot(bpath, bg);
    CHECK(peek_snapshot_kind(bpath) == SnapshotKind::bipartite);
    BipartiteGraph bg2 = read_bipartite_snapshot(bpath);
    CHECK(bg2.user_count() == bg.user_count());
    CHECK(bg2.hashtag_count() == bg.hashtag_count());
    CHECK(bg2.edge_count() == bg.edge_count());
    CHECK(bg2.total_weight() == bg.total_weight());
    for (uint32_t u = 0; u < bg.user_count(); ++u) {
        CHECK(bg2.users().name(u) == bg.users().name(u));
        auto a = bg.hashtags_of(u), b = bg2.hashtags_of(u);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].id == b[i].id);
            CHECK(a[i].weight == b[i].weight);
        }
    }

    std::vector<TweetRecord> records = random_records(rng, 8, 120, 5);
    InteractionGraph ig = build_interaction_graph(records, pool_user_features(records));
    std::string ipath = dir.file("i.sgr");
    write_snapshot(ipath, ig);
    CHECK(peek_snapshot_kind(ipath) == SnapshotKind::interaction);
    InteractionGraph ig2 = read_interaction_snapshot(ipath);
    CHECK(ig2.node_count() == ig.node_count());
    CHECK(ig2.edge_count() == ig.edge_count());
    CHECK(ig2.feature_dim() == ig.feature_dim());
    for (uint32_t v = 0; v < ig.node_count(); ++v) {
        CHECK(ig2.users().name(v) == ig.users().name(v));
        auto fa = ig.feature_row(v), fb = ig2.feature_row(v);
        for (size_t i = 0; i < fa.size(); ++i) CHECK(fa[i] == fb[i]);  // f32 bit-exact
    }
    auto ea = ig.edge_list(), eb = ig2.edge_list();
    REQUIRE(ea.size() == eb.size());
    for (size_t i = 0; i < ea.size(); ++i) CHECK(ea[i].weight == eb[i].weight);

    // Kind mismatch and corrupted magic are data errors.
    CHECK_THROWS_AS(read_interaction_snapshot(bpath), DataError);
    std::string garbled = dir.file("g.sgr");
    std::string bytes = sgtest::read_file(bpath);
    bytes[0] = 'X';
    sgtest::write_file(garbled, bytes);
    CHECK_THROWS_AS(read_bipartite_snapshot(garbled), DataError);
}

TEST_CASE("tsv readers round-trip and reject malformed rows with positions") {
    sgtest::TempDir dir("tsv");
    StancePair stances{"pro", "anti"};

    std::string labels = dir.file("labels.tsv");
    std::vector<NamedLabel> rows = {{"alice", StanceId::s1, Provenance::seed, 0},
                                    {"bob", StanceId::s2, Provenance::propagated, 3}};
    write_labels_tsv(labels, rows, stances);
    std::vector<NamedLabel> back = read_labels_tsv(labels, stances);
    REQUIRE(back.size() == 2);
    CHECK(back[1].entity == "bob");
    CHECK(back[1].stance == StanceId::s2);
    CHECK(back[1].provenance == Provenance::propagated);
    CHECK(back[1].iteration == 3);

    std::string truth = dir.file("truth.tsv");
    std::vector<TruthLabel> tr = {{"alice", StanceId::s1}, {"mallory", std::nullopt}};
    write_truth_tsv(truth, tr, stances);
    std::vector<TruthLabel> tback = read_truth_tsv(truth, stances);
    REQUIRE(tback.size() == 2);
    CHECK(tback[0].stance == StanceId::s1);
    CHECK_FALSE(tback[1].stance.has_value());

    std::string bad = dir.file("bad.tsv");
    sgtest::write_file(bad, "alice\tpro\tseed\t0\nbob\tnope\tseed\t0\n");
    CHECK_THROWS_WITH_AS(read_labels_tsv(bad, stances), doctest::Contains(":2"), DataError);

    std::string interactions = dir.file("x.tsv");
    sgtest::write_file(interactions, "a\tb\t0.5\nc\td\tnot-a-number\n");
    CHECK_THROWS_WITH_AS(read_interactions_tsv(interactions), doctest::Contains(":2"), DataError);

    std::string posts = dir.file("p.tsv");
    std::vector<PostRecord> precs = {{"u1", {"x", "y"}}, {"u2", {"z"}}};
    write_posts_tsv(posts, precs);
    std::vector<PostRecord> pback = read_posts_tsv(posts);
    REQUIRE(pback.size() == 2);
    CHECK(pback[0].hashtags == std::vector<std::string>{"x", "y"});

    std::string seeds = dir.file("s.txt");
    sgtest::write_file(seeds, "  #TagOne\n\n tagtwo \n");
    std::vector<std::string> sl = read_seed_lines(seeds);
    REQUIRE(sl.size() == 2);
    CHECK(sl[0] == "#TagOne");  // raw spelling kept; normalization happens later
    std::string empty = dir.file("empty.txt");
    sgtest::write_file(empty, "\n\n");
    CHECK_THROWS_AS(read_seed_lines(empty), DataError);
}

TEST_CASE("name/id label conversions detect unknown entities") {
    Interner names;
    names.intern("a");
    names.intern("b");
    std::vector<NamedLabel> rows = {{"a", StanceId::s1, Provenance::seed, 0},
                                    {"zzz", StanceId::s2, Provenance::seed, 0}};
    std::vector<std::string> unknown;
    StanceAssignment asg = to_assignment(rows, names, &unknown);
    CHECK(asg.size() == 1);
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0] == "zzz");
    CHECK_THROWS_AS(to_assignment(rows, names, nullptr), DataError);

    std::vector<NamedLabel> back = to_named_labels(asg, names);
    REQUIRE(back.size() == 1);
    CHECK(back[0].entity == "a");
}
